#include "minispace/stats/icc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "minispace/error.hpp"
#include "minispace/stats/distributions.hpp"

namespace minispace::stats {

double spearman_brown(double icc_single, double k) {
    if (!(k >= 1.0)) throw DomainError("spearman_brown: k must be >= 1");
    const double denom = 1.0 + (k - 1.0) * icc_single;
    if (denom == 0.0) throw DomainError("spearman_brown: undefined for this ICC and k");
    return k * icc_single / denom;
}

IccResult icc_two_way(std::span<const std::vector<double>> rows, double confidence) {
    const std::size_t n = rows.size();
    if (n < 2) throw DomainError("icc_two_way: at least 2 subjects are required");
    const std::size_t k = rows.front().size();
    if (k < 2) throw DomainError("icc_two_way: at least 2 sessions are required");
    if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("icc_two_way: confidence must lie in (0, 1)");
    for (const auto& row : rows) {
        if (row.size() != k) throw DomainError("icc_two_way: ragged matrix");
        for (double v : row) {
            if (!std::isfinite(v)) throw DomainError("icc_two_way: values must be finite");
        }
    }

    const auto nd = static_cast<double>(n);
    const auto kd = static_cast<double>(k);
    double grand = 0.0;
    std::vector<double> row_mean(n, 0.0), col_mean(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            row_mean[i] += rows[i][j];
            col_mean[j] += rows[i][j];
            grand += rows[i][j];
        }
    }
    for (auto& v : row_mean) v /= kd;
    for (auto& v : col_mean) v /= nd;
    grand /= nd * kd;

    double ss_rows = 0.0, ss_cols = 0.0, ss_total = 0.0;
    for (double v : row_mean) ss_rows += (v - grand) * (v - grand);
    for (double v : col_mean) ss_cols += (v - grand) * (v - grand);
    ss_rows *= kd;
    ss_cols *= nd;
    for (const auto& row : rows) {
        for (double v : row) ss_total += (v - grand) * (v - grand);
    }
    if (ss_total == 0.0) throw DegenerateError("icc_two_way: all values are identical");
    const double ss_error = std::max(0.0, ss_total - ss_rows - ss_cols);

    IccResult out;
    out.n = n;
    out.k = k;
    const double df_r = nd - 1.0, df_c = kd - 1.0, df_e = (nd - 1.0) * (kd - 1.0);
    out.ms_rows = ss_rows / df_r;
    out.ms_cols = ss_cols / df_c;
    out.ms_error = ss_error / df_e;
    const double msr = out.ms_rows, msc = out.ms_cols, mse = out.ms_error;

    out.icc_single = (msr - mse) / (msr + (kd - 1.0) * mse + kd * (msc - mse) / nd);
    out.icc_average = (msr - mse) / (msr + (msc - mse) / nd);

    if (mse > 0.0) {
        out.f_rows = msr / mse;
        out.p_rows = f_sf(out.f_rows, df_r, df_e);
    } else {
        out.f_rows = std::numeric_limits<double>::infinity();
        out.p_rows = 0.0;
    }

    const double raw_subject = (msr - mse) / kd;
    const double raw_session = (msc - mse) / nd;
    out.subject_truncated = raw_subject < 0.0;
    out.session_truncated = raw_session < 0.0;
    out.var_subject = std::max(0.0, raw_subject);
    out.var_session = std::max(0.0, raw_session);
    out.var_residual = mse;
    const double total = out.var_subject + out.var_session + out.var_residual;
    out.between_person_share = total > 0.0 ? out.var_subject / total : 0.0;
    const double excl = out.var_subject + out.var_residual;
    out.between_person_share_excl_session = excl > 0.0 ? out.var_subject / excl : 0.0;

    // F-based interval for the single-score agreement ICC, with Satterthwaite
    // degrees of freedom for the denominator mean square.
    const double alpha = 1.0 - confidence;
    const double icc = out.icc_single;
    if (mse > 0.0 && std::isfinite(icc)) {
        const double a = kd * icc / (nd * (1.0 - icc));
        const double b = 1.0 + kd * icc * (nd - 1.0) / (nd * (1.0 - icc));
        const double v_num = std::pow(a * msc + b * mse, 2.0);
        const double v_den = std::pow(a * msc, 2.0) / df_c + std::pow(b * mse, 2.0) / df_e;
        const double v = v_den > 0.0 ? v_num / v_den : df_e;
        const double f_upper_q = f_quantile(1.0 - alpha / 2.0, df_r, v);
        const double f_lower_q = f_quantile(1.0 - alpha / 2.0, v, df_r);
        const double lower =
            nd * (msr - f_upper_q * mse) /
            (f_upper_q * (kd * msc + (kd * nd - kd - nd) * mse) + nd * msr);
        const double upper =
            nd * (f_lower_q * msr - mse) / (kd * msc + (kd * nd - kd - nd) * mse + nd * f_lower_q * msr);
        out.ci_single = {lower, upper};
        auto to_average = [&](double r) {
            const double denom = 1.0 + (kd - 1.0) * r;
            return denom > 0.0 ? kd * r / denom : -std::numeric_limits<double>::infinity();
        };
        out.ci_average = {to_average(lower), to_average(upper)};
    } else {
        out.ci_single = {icc, icc};
        out.ci_average = {out.icc_average, out.icc_average};
    }
    return out;
}

}  // namespace minispace::stats
