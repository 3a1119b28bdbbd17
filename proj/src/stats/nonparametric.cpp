#include "minispace/stats/nonparametric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "minispace/error.hpp"
#include "minispace/stats/distributions.hpp"
#include "minispace/stats/ranks.hpp"

namespace minispace::stats {

namespace {

constexpr std::size_t kExactLimit = 25;

void require_finite(std::span<const double> x, const char* what) {
    for (double v : x) {
        if (!std::isfinite(v)) throw DomainError(std::string(what) + ": inputs must be finite");
    }
}

struct SignedRank {
    double w_plus = 0.0;
    double w_minus = 0.0;
    double z = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    bool exact = false;
};

SignedRank signed_rank(std::span<const double> d) {
    std::vector<double> nonzero;
    for (double v : d) {
        if (v != 0.0) nonzero.push_back(v);
    }
    SignedRank out;
    out.n = nonzero.size();
    if (out.n == 0) throw DegenerateError("signed-rank test: every difference is zero");
    std::vector<double> abs_d(nonzero.size());
    std::transform(nonzero.begin(), nonzero.end(), abs_d.begin(), [](double v) { return std::abs(v); });
    const auto ranks = midranks(abs_d);
    for (std::size_t i = 0; i < ranks.size(); ++i) (nonzero[i] > 0 ? out.w_plus : out.w_minus) += ranks[i];

    const auto n = static_cast<double>(out.n);
    const double expected = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term(abs_d) / 48.0;
    const double diff = out.w_plus - expected;
    const double corrected = std::abs(diff) <= 0.5 ? 0.0 : diff - std::copysign(0.5, diff);
    out.z = corrected / std::sqrt(var);

    if (out.n <= kExactLimit) {
        std::vector<int> doubled(ranks.size());
        for (std::size_t i = 0; i < ranks.size(); ++i) doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
        const auto counts = signed_rank_distribution(doubled);
        const auto observed = static_cast<std::size_t>(std::lround(2.0 * out.w_plus));
        double le = 0.0, ge = 0.0;
        for (std::size_t s = 0; s < counts.size(); ++s) {
            if (s <= observed) le += counts[s];
            if (s >= observed) ge += counts[s];
        }
        const double total = std::ldexp(1.0, static_cast<int>(out.n));
        out.p = std::min(1.0, 2.0 * std::min(le, ge) / total);
        out.exact = true;
    } else {
        out.p = std::min(1.0, 2.0 * normal_sf(std::abs(out.z)));
    }
    return out;
}

}  // namespace

std::vector<double> signed_rank_distribution(std::span<const int> doubled_ranks) {
    int total = 0;
    for (int r : doubled_ranks) {
        if (r <= 0) throw DomainError("signed_rank_distribution: ranks must be positive");
        total += r;
    }
    std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
    counts[0] = 1.0;
    int reach = 0;
    for (int r : doubled_ranks) {
        for (int s = reach; s >= 0; --s) {
            if (counts[static_cast<std::size_t>(s)] != 0.0) counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
        }
        reach += r;
    }
    return counts;
}

StatResult spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("spearman_rho: x and y differ in length");
    if (x.size() < 3) throw DomainError("spearman_rho: at least 3 pairs are required");
    require_finite(x, "spearman_rho");
    require_finite(y, "spearman_rho");
    const auto rx = midranks(x);
    const auto ry = midranks(y);
    const double mx = mean(rx), my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw DomainError("spearman_rho: a variable has zero rank variance");
    const double rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = static_cast<double>(x.size()) - 2.0;
    StatResult out;
    out.method = "Spearman rank correlation";
    out.statistic = rho;
    out.df = {df};
    if (std::abs(rho) >= 1.0) {
        out.p_value = 0.0;
    } else {
        const double t = rho * std::sqrt(df / (1.0 - rho * rho));
        out.p_value = t_two_sided_p(t, df);
    }
    out.effect = {EffectKind::rho, rho};
    return out;
}

StatResult wilcoxon_signed_rank(std::span<const double> x, double benchmark) {
    if (x.empty()) throw DomainError("wilcoxon_signed_rank: no observations");
    require_finite(x, "wilcoxon_signed_rank");
    if (!std::isfinite(benchmark)) throw DomainError("wilcoxon_signed_rank: benchmark must be finite");
    std::vector<double> d(x.size());
    std::transform(x.begin(), x.end(), d.begin(), [&](double v) { return v - benchmark; });
    const SignedRank sr = signed_rank(d);
    StatResult out;
    out.method = "Wilcoxon signed-rank";
    out.statistic = sr.w_plus;
    out.p_value = sr.p;
    out.z = sr.z;
    out.effect = {EffectKind::r, sr.z / std::sqrt(static_cast<double>(sr.n))};
    out.notes = (sr.exact ? "exact p" : "normal approximation") + std::string(", n = ") + std::to_string(sr.n);
    return out;
}

StatResult cliffs_delta(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DomainError("cliffs_delta: both groups must be non-empty");
    require_finite(a, "cliffs_delta");
    require_finite(b, "cliffs_delta");
    double greater = 0.0, less = 0.0;
    for (double x : a) {
        for (double y : b) {
            if (x > y) {
                greater += 1.0;
            } else if (x < y) {
                less += 1.0;
            }
        }
    }
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    const double delta = (greater - less) / (na * nb);

    // Mann-Whitney U of a over b, ties counted half.
    const double u = greater + 0.5 * (na * nb - greater - less);
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const double n = na + nb;
    const double var = na * nb / 12.0 * ((n + 1.0) - tie_term(pooled) / (n * (n - 1.0)));
    StatResult out;
    out.method = "Cliff's delta";
    out.statistic = delta;
    out.effect = {EffectKind::cliffs_delta, delta};
    if (var > 0.0) {
        const double diff = u - na * nb / 2.0;
        const double corrected = std::abs(diff) <= 0.5 ? 0.0 : diff - std::copysign(0.5, diff);
        out.z = corrected / std::sqrt(var);
        out.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(*out.z)));
    } else {
        out.z = 0.0;
        out.p_value = 1.0;
    }
    out.notes = "p from Mann-Whitney U (normal approximation)";
    return out;
}

StatResult kruskal_epsilon_sq(std::span<const std::vector<double>> groups) {
    if (groups.size() < 2) throw DomainError("kruskal_epsilon_sq: at least 2 groups are required");
    std::vector<double> pooled;
    for (const auto& g : groups) {
        if (g.size() < 2) throw DomainError("kruskal_epsilon_sq: every group needs at least 2 observations");
        require_finite(g, "kruskal_epsilon_sq");
        pooled.insert(pooled.end(), g.begin(), g.end());
    }
    if (pooled.size() < 6) throw DomainError("kruskal_epsilon_sq: at least 6 observations are required");
    const auto ranks = midranks(pooled);
    const auto n = static_cast<double>(pooled.size());
    double sum_term = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double r = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) r += ranks[offset + i];
        offset += g.size();
        sum_term += r * r / static_cast<double>(g.size());
    }
    const double correction = 1.0 - tie_term(pooled) / (n * n * n - n);
    const double k = static_cast<double>(groups.size());
    StatResult out;
    out.method = "Kruskal-Wallis";
    out.df = {k - 1.0};
    out.effect.kind = EffectKind::epsilon_sq;
    if (correction <= 0.0) {
        out.statistic = 0.0;
        out.p_value = 1.0;
        out.effect.value = 0.0;
        out.notes = "all observations tied";
        return out;
    }
    const double h = std::max(0.0, (12.0 / (n * (n + 1.0)) * sum_term - 3.0 * (n + 1.0)) / correction);
    out.statistic = h;
    out.p_value = chi2_sf(h, k - 1.0);
    out.effect.value = h / (n - 1.0);
    return out;
}

StatResult kendalls_w(std::span<const std::vector<double>> ratings) {
    const std::size_t m = ratings.size();
    if (m < 2) throw DomainError("kendalls_w: at least 2 raters are required");
    const std::size_t items = ratings.front().size();
    if (items < 2) throw DomainError("kendalls_w: at least 2 items are required");
    std::vector<double> column_sums(items, 0.0);
    double ties = 0.0;
    for (const auto& row : ratings) {
        if (row.size() != items) throw DomainError("kendalls_w: ragged ratings matrix");
        require_finite(row, "kendalls_w");
        const auto r = midranks(row);
        for (std::size_t j = 0; j < items; ++j) column_sums[j] += r[j];
        ties += tie_term(row);
    }
    const double mean_sum = mean(column_sums);
    double s = 0.0;
    for (double v : column_sums) s += (v - mean_sum) * (v - mean_sum);
    const auto md = static_cast<double>(m);
    const auto nd = static_cast<double>(items);
    const double denom = md * md * (nd * nd * nd - nd) - md * ties;
    if (!(denom > 0.0)) throw DegenerateError("kendalls_w: every rater ties every item");
    const double w = 12.0 * s / denom;
    const double chi2 = md * (nd - 1.0) * w;
    StatResult out;
    out.method = "Kendall's W";
    out.statistic = chi2;
    out.df = {nd - 1.0};
    out.p_value = chi2_sf(chi2, nd - 1.0);
    out.effect = {EffectKind::kendalls_w, w};
    return out;
}

StatResult rank_biserial(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("rank_biserial: a and b differ in length");
    if (a.empty()) throw DomainError("rank_biserial: no pairs");
    require_finite(a, "rank_biserial");
    require_finite(b, "rank_biserial");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const SignedRank sr = signed_rank(d);
    StatResult out;
    out.method = "Matched-pairs rank-biserial";
    out.statistic = sr.w_plus;
    out.p_value = sr.p;
    out.z = sr.z;
    out.effect = {EffectKind::r_rb, (sr.w_plus - sr.w_minus) / (sr.w_plus + sr.w_minus)};
    out.notes = sr.exact ? "exact p" : "normal approximation";
    return out;
}

std::vector<double> holm_adjust(std::span<const double> p) {
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("holm_adjust: p-values must lie in [0, 1]");
    }
    const std::size_t m = p.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> out(m);
    double running = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        running = std::max(running, std::min(1.0, static_cast<double>(m - i) * p[order[i]]));
        out[order[i]] = running;
    }
    return out;
}

}  // namespace minispace::stats
