#pragma once

#include <span>
#include <vector>

#include "minispace/stats/result.hpp"

namespace minispace::stats {

/// Spearman rank correlation with a t-approximation p-value (df = n - 2).
StatResult spearman_rho(std::span<const double> x, std::span<const double> y);

/// One-sample Wilcoxon signed-rank test of `x` against `benchmark`.
/// Zero differences are dropped. Exact p when the effective n is at most 25,
/// otherwise a normal approximation with continuity and tie corrections.
/// `z` is positive when x tends to exceed the benchmark; effect r = z / sqrt(n).
StatResult wilcoxon_signed_rank(std::span<const double> x, double benchmark);

/// counts[s] = number of the 2^n sign patterns whose positive doubled-rank
/// sum equals s.
std::vector<double> signed_rank_distribution(std::span<const int> doubled_ranks);

/// Cliff's delta of `a` over `b`, with a Mann-Whitney normal-approximation p.
StatResult cliffs_delta(std::span<const double> a, std::span<const double> b);

/// Kruskal-Wallis H with epsilon-squared = H / (n - 1).
StatResult kruskal_epsilon_sq(std::span<const std::vector<double>> groups);

/// Kendall's W. `ratings` holds one row per rater (subject), one column per
/// item (condition). Tests W with chi-square = m (n - 1) W.
StatResult kendalls_w(std::span<const std::vector<double>> ratings);

/// Matched-pairs rank-biserial correlation of a - b with the signed-rank p.
StatResult rank_biserial(std::span<const double> a, std::span<const double> b);

/// Holm step-down adjustment; returned values are in input order.
std::vector<double> holm_adjust(std::span<const double> p);

}  // namespace minispace::stats
