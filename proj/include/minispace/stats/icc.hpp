#pragma once

#include <span>
#include <vector>

namespace minispace::stats {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Two-way random-effects, absolute-agreement ICC for an n x k matrix
/// (rows are subjects, columns are sessions).
struct IccResult {
    std::size_t n = 0;
    std::size_t k = 0;
    double ms_rows = 0.0;
    double ms_cols = 0.0;
    double ms_error = 0.0;

    double icc_single = 0.0;   // ICC(2,1)
    double icc_average = 0.0;  // ICC(2,k)
    Interval ci_single;        // 95% by default
    Interval ci_average;

    double f_rows = 0.0;  // MS_rows / MS_error
    double p_rows = 1.0;

    // Variance components, truncated at zero when the moment estimate is negative.
    double var_subject = 0.0;
    double var_session = 0.0;
    double var_residual = 0.0;
    bool subject_truncated = false;
    bool session_truncated = false;

    /// var_subject / (var_subject + var_session + var_residual).
    double between_person_share = 0.0;
    /// var_subject / (var_subject + var_residual).
    double between_person_share_excl_session = 0.0;
};

IccResult icc_two_way(std::span<const std::vector<double>> rows, double confidence = 0.95);

/// ICC of the mean of k sessions implied by a single-session ICC.
double spearman_brown(double icc_single, double k);

}  // namespace minispace::stats
