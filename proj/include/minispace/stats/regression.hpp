#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "minispace/stats/result.hpp"

namespace minispace::stats {

struct Design {
    std::vector<std::string> names;
    Eigen::MatrixXd x;
};

/// Column-by-column construction of a regression design.
class DesignBuilder {
public:
    explicit DesignBuilder(std::size_t n_rows) : n_(n_rows) {}

    DesignBuilder& intercept();
    DesignBuilder& numeric(std::string name, std::span<const double> values);
    /// Treatment coding against levels.front(); one indicator per other level,
    /// named "<factor> [<level> - <reference>]".
    DesignBuilder& treatment(const std::string& factor, std::span<const std::string> values,
                             std::span<const std::string> levels);

    Design build() const;

private:
    std::size_t n_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
};

struct OlsFit {
    std::vector<std::string> names;
    std::vector<double> coefficients;
    std::vector<double> std_errors;
    std::vector<double> t_values;
    std::vector<double> p_values;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double f = 0.0;
    double df_model = 0.0;
    double df_resid = 0.0;
    double p_model = 1.0;
    double sse = 0.0;
    std::vector<double> y;

    std::size_t n() const { return y.size(); }
    /// Index of a named coefficient; throws DomainError when absent.
    std::size_t index_of(const std::string& name) const;
};

/// Ordinary least squares via Householder QR. The design must contain an
/// intercept (a column of ones). Throws SingularDesignError naming the
/// columns that are linear combinations of earlier ones.
OlsFit ols_fit(const Design& design, std::span<const double> y);

/// F-test of the R^2 increase from `reduced` to `full`. Both fits must use
/// the same response and the reduced columns must be a subset of the full
/// ones. Effect is delta R^2.
StatResult nested_model_compare(const OlsFit& reduced, const OlsFit& full);

}  // namespace minispace::stats
