#include "minispace/stats/ranks.hpp"

#include <algorithm>
#include <numeric>

#include "minispace/stats/result.hpp"

namespace minispace::stats {

std::string_view to_string(EffectKind kind) {
    switch (kind) {
        case EffectKind::none: return "none";
        case EffectKind::rho: return "rho";
        case EffectKind::r: return "r";
        case EffectKind::r_rb: return "r_rb";
        case EffectKind::cliffs_delta: return "cliffs_delta";
        case EffectKind::epsilon_sq: return "epsilon_sq";
        case EffectKind::kendalls_w: return "kendalls_w";
        case EffectKind::r2: return "R2";
        case EffectKind::delta_r2: return "delta_R2";
    }
    return "none";
}

std::vector<double> midranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
        i = j;
    }
    return ranks;
}

double tie_term(std::span<const double> x) {
    std::vector<double> v(x.begin(), x.end());
    std::sort(v.begin(), v.end());
    double total = 0.0;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i + 1;
        while (j < v.size() && v[j] == v[i]) ++j;
        const auto t = static_cast<double>(j - i);
        total += t * t * t - t;
        i = j;
    }
    return total;
}

double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

}  // namespace minispace::stats
