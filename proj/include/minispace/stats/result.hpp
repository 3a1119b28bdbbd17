#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace minispace::stats {

enum class EffectKind { none, rho, r, r_rb, cliffs_delta, epsilon_sq, kendalls_w, r2, delta_r2 };

std::string_view to_string(EffectKind kind);

struct EffectSize {
    EffectKind kind = EffectKind::none;
    double value = 0.0;
};

struct StatResult {
    std::string method;
    double statistic = 0.0;
    std::vector<double> df;
    double p_value = 1.0;
    EffectSize effect;
    std::string notes;
    std::optional<double> z;
};

}  // namespace minispace::stats
