#pragma once

#include <span>
#include <vector>

namespace minispace::stats {

/// 1-based ranks, ties receive the mean of the ranks they span.
std::vector<double> midranks(std::span<const double> x);

/// Sum of t^3 - t over tie groups of `x`.
double tie_term(std::span<const double> x);

double mean(std::span<const double> x);
/// Sample variance (n - 1 denominator).
double variance(std::span<const double> x);

}  // namespace minispace::stats
