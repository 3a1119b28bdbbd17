#include "minispace/stats/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "minispace/error.hpp"
#include "minispace/stats/distributions.hpp"

namespace minispace::stats {

namespace {

constexpr double kRankTolerance = 1e-10;

Eigen::Index numeric_rank(const Eigen::MatrixXd& x) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(kRankTolerance);
    return qr.rank();
}

std::vector<std::string> dependent_columns(const Design& design) {
    std::vector<std::string> out;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < design.x.cols(); ++j) {
        Eigen::MatrixXd sub(design.x.rows(), static_cast<Eigen::Index>(kept.size()) + 1);
        for (std::size_t c = 0; c < kept.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = design.x.col(kept[c]);
        sub.col(sub.cols() - 1) = design.x.col(j);
        if (numeric_rank(sub) == sub.cols()) {
            kept.push_back(j);
        } else {
            out.push_back(design.names[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

}  // namespace

DesignBuilder& DesignBuilder::intercept() {
    names_.push_back("(Intercept)");
    columns_.emplace_back(n_, 1.0);
    return *this;
}

DesignBuilder& DesignBuilder::numeric(std::string name, std::span<const double> values) {
    if (values.size() != n_) throw DomainError("design column '" + name + "' has the wrong length");
    names_.push_back(std::move(name));
    columns_.emplace_back(values.begin(), values.end());
    return *this;
}

DesignBuilder& DesignBuilder::treatment(const std::string& factor, std::span<const std::string> values,
                                        std::span<const std::string> levels) {
    if (values.size() != n_) throw DomainError("design factor '" + factor + "' has the wrong length");
    if (levels.size() < 2) throw DomainError("design factor '" + factor + "' needs at least 2 levels");
    for (const auto& v : values) {
        if (std::find(levels.begin(), levels.end(), v) == levels.end()) {
            throw DomainError("design factor '" + factor + "': unknown level '" + v + "'");
        }
    }
    for (std::size_t l = 1; l < levels.size(); ++l) {
        std::vector<double> col(n_);
        for (std::size_t i = 0; i < n_; ++i) col[i] = values[i] == levels[l] ? 1.0 : 0.0;
        names_.push_back(factor + " [" + levels[l] + " - " + levels.front() + "]");
        columns_.push_back(std::move(col));
    }
    return *this;
}

Design DesignBuilder::build() const {
    Design d;
    d.names = names_;
    d.x.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(columns_.size()));
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        for (std::size_t i = 0; i < n_; ++i) d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns_[j][i];
    }
    return d;
}

std::size_t OlsFit::index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw DomainError("no coefficient named '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

OlsFit ols_fit(const Design& design, std::span<const double> y) {
    const Eigen::Index n = design.x.rows();
    const Eigen::Index p = design.x.cols();
    if (static_cast<std::size_t>(p) != design.names.size()) throw DomainError("ols_fit: names do not match columns");
    if (static_cast<Eigen::Index>(y.size()) != n) throw DomainError("ols_fit: response length differs from design rows");
    if (p == 0) throw DomainError("ols_fit: empty design");
    if (!design.x.allFinite()) throw DomainError("ols_fit: design contains non-finite values");
    for (double v : y) {
        if (!std::isfinite(v)) throw DomainError("ols_fit: response contains non-finite values");
    }
    bool has_intercept = false;
    for (Eigen::Index j = 0; j < p && !has_intercept; ++j) has_intercept = (design.x.col(j).array() == 1.0).all();
    if (!has_intercept) throw DomainError("ols_fit: design has no intercept column");
    if (n <= p) throw DomainError("ols_fit: need more observations than columns");

    if (numeric_rank(design.x) < p) {
        auto dependent = dependent_columns(design);
        std::string msg = "ols_fit: design is rank deficient; dependent columns:";
        for (const auto& name : dependent) msg += " '" + name + "'";
        throw SingularDesignError(msg, std::move(dependent));
    }

    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(design.x);
    const Eigen::VectorXd beta = qr.solve(yv);
    const Eigen::VectorXd resid = yv - design.x * beta;

    OlsFit fit;
    fit.names = design.names;
    fit.y.assign(y.begin(), y.end());
    fit.sse = resid.squaredNorm();
    const double mean_y = yv.mean();
    const double sst = (yv.array() - mean_y).square().sum();
    if (sst == 0.0) throw DegenerateError("ols_fit: response is constant");
    fit.df_resid = static_cast<double>(n - p);
    fit.df_model = static_cast<double>(p - 1);
    fit.r2 = std::clamp(1.0 - fit.sse / sst, 0.0, 1.0);
    fit.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / fit.df_resid;

    // (X'X)^-1 = R^-1 R^-T.
    const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd xtx_inv = r_inv * r_inv.transpose();
    const double sigma2 = fit.sse / fit.df_resid;

    for (Eigen::Index j = 0; j < p; ++j) {
        const double se = std::sqrt(std::max(0.0, sigma2 * xtx_inv(j, j)));
        const double b = beta(j);
        fit.coefficients.push_back(b);
        fit.std_errors.push_back(se);
        if (se > 0.0) {
            const double t = b / se;
            fit.t_values.push_back(t);
            fit.p_values.push_back(t_two_sided_p(t, fit.df_resid));
        } else {
            fit.t_values.push_back(b == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), b));
            fit.p_values.push_back(b == 0.0 ? 1.0 : 0.0);
        }
    }
    if (p > 1) {
        if (fit.r2 < 1.0) {
            fit.f = (fit.r2 / fit.df_model) / ((1.0 - fit.r2) / fit.df_resid);
            fit.p_model = f_sf(fit.f, fit.df_model, fit.df_resid);
        } else {
            fit.f = std::numeric_limits<double>::infinity();
            fit.p_model = 0.0;
        }
    }
    return fit;
}

StatResult nested_model_compare(const OlsFit& reduced, const OlsFit& full) {
    if (reduced.y != full.y) throw DomainError("nested_model_compare: models were fitted to different responses");
    const std::set<std::string> full_names(full.names.begin(), full.names.end());
    for (const auto& name : reduced.names) {
        if (!full_names.contains(name)) {
            throw DomainError("nested_model_compare: reduced column '" + name + "' is not in the full model");
        }
    }
    const double q = static_cast<double>(full.names.size() - reduced.names.size());
    StatResult out;
    out.method = "Nested OLS F-test";
    const double delta = std::max(0.0, full.r2 - reduced.r2);
    out.effect = {EffectKind::delta_r2, delta};
    out.df = {q, full.df_resid};
    if (q == 0.0) {
        out.statistic = 0.0;
        out.p_value = 1.0;
        return out;
    }
    if (full.r2 >= 1.0) {
        out.statistic = delta > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        out.p_value = delta > 0.0 ? 0.0 : 1.0;
        return out;
    }
    out.statistic = (delta / q) / ((1.0 - full.r2) / full.df_resid);
    out.p_value = f_sf(out.statistic, q, full.df_resid);
    return out;
}

}  // namespace minispace::stats
