#pragma once

#include <span>
#include <string>
#include <vector>

#include "minispace/stats/result.hpp"

namespace minispace::stats {

struct ArtFactor {
    std::string name;
    std::vector<std::string> levels;  // first level is the reference for two-level effect sizes
    bool within = false;              // repeated within subject
};

struct ArtObservation {
    std::string subject;
    std::vector<std::string> levels;  // one per factor, in factor order
    double response = 0.0;
};

struct ArtPosthoc {
    std::string level_a;
    std::string level_b;
    double estimate = 0.0;  // mean aligned rank of a minus b
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    double p_holm = 1.0;
    EffectSize effect;  // Cliff's delta (between) or r_rb (within), a over b
};

struct ArtEffect {
    std::string name;                  // factor names joined by ':'
    std::vector<std::size_t> factors;  // indices into the factor list
    bool within = false;               // involves at least one within factor
    StatResult result;                 // F test; effect size on main effects only
    std::vector<double> aligned;       // aligned responses, observation order
    std::vector<ArtPosthoc> posthoc;   // main effects only, Holm-adjusted
};

struct ArtResult {
    std::vector<ArtFactor> factors;
    std::size_t n_subjects = 0;
    std::vector<ArtEffect> effects;

    /// Lookup by name, e.g. "Age" or "Age:Week". Throws DomainError when absent.
    const ArtEffect& effect(const std::string& name) const;
};

/// Aligned rank transform ANOVA for a full-factorial design with any mix of
/// between- and within-subject factors. Every subject must contribute exactly
/// one observation per within-subject cell and every between-subject cell must
/// be populated.
///
/// Each effect is aligned by removing all other effects (cell-mean residual
/// plus the inclusion-exclusion estimate of that effect), mid-ranked, and
/// tested with a Type III effect-coded model: between effects on subject means
/// against the between-subject residual, within effects on orthonormal
/// within-subject contrasts against the pooled subject-by-within residual.
ArtResult art_anova(std::span<const ArtFactor> factors, std::span<const ArtObservation> observations);

}  // namespace minispace::stats
