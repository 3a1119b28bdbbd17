#include "minispace/stats/art.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <Eigen/Dense>

#include "minispace/error.hpp"
#include "minispace/stats/distributions.hpp"
#include "minispace/stats/nonparametric.hpp"
#include "minispace/stats/ranks.hpp"

namespace minispace::stats {

namespace {

using Eigen::MatrixXd;

struct Layout {
    std::vector<ArtFactor> factors;
    std::vector<std::vector<std::size_t>> level;  // [obs][factor]
    std::vector<double> y;
    std::vector<std::size_t> between;  // factor indices
    std::vector<std::size_t> within;
    std::size_t n_subjects = 0;
    std::vector<std::size_t> subject_of;             // [obs]
    std::vector<std::vector<std::size_t>> obs_at;    // [subject][within cell]
    std::vector<std::vector<std::size_t>> subject_level;  // [subject][factor], between factors only
    std::size_t n_within_cells = 1;
};

std::size_t levels_of(const Layout& lay, std::size_t f) { return lay.factors[f].levels.size(); }

// Mixed-radix key of the levels in `facs`.
std::size_t key_of(const Layout& lay, const std::vector<std::size_t>& lv, const std::vector<std::size_t>& facs) {
    std::size_t key = 0, stride = 1;
    for (std::size_t f : facs) {
        key += lv[f] * stride;
        stride *= levels_of(lay, f);
    }
    return key;
}

std::vector<std::size_t> factors_in(std::uint32_t mask, std::size_t count) {
    std::vector<std::size_t> out;
    for (std::size_t f = 0; f < count; ++f) {
        if (mask & (1u << f)) out.push_back(f);
    }
    return out;
}

Layout prepare(std::span<const ArtFactor> factors, std::span<const ArtObservation> observations) {
    Layout lay;
    lay.factors.assign(factors.begin(), factors.end());
    const std::size_t nf = factors.size();
    if (nf == 0) throw DomainError("art_anova: at least one factor is required");
    if (nf > 8) throw DomainError("art_anova: at most 8 factors are supported");
    std::set<std::string> names;
    for (const auto& f : factors) {
        if (!names.insert(f.name).second) throw DomainError("art_anova: duplicate factor '" + f.name + "'");
        if (f.levels.size() < 2) throw DomainError("art_anova: factor '" + f.name + "' needs at least 2 levels");
        if (std::set<std::string>(f.levels.begin(), f.levels.end()).size() != f.levels.size()) {
            throw DomainError("art_anova: factor '" + f.name + "' repeats a level");
        }
    }
    for (std::size_t f = 0; f < nf; ++f) (factors[f].within ? lay.within : lay.between).push_back(f);
    for (std::size_t f : lay.within) lay.n_within_cells *= levels_of(lay, f);

    if (observations.empty()) throw DomainError("art_anova: no observations");
    std::map<std::string, std::size_t> subject_index;
    for (const auto& obs : observations) {
        if (obs.levels.size() != nf) throw DomainError("art_anova: observation for '" + obs.subject + "' has the wrong number of levels");
        if (!std::isfinite(obs.response)) throw DomainError("art_anova: responses must be finite");
        std::vector<std::size_t> lv(nf);
        for (std::size_t f = 0; f < nf; ++f) {
            const auto& lvls = factors[f].levels;
            const auto it = std::find(lvls.begin(), lvls.end(), obs.levels[f]);
            if (it == lvls.end()) {
                throw DomainError("art_anova: unknown level '" + obs.levels[f] + "' of factor '" + factors[f].name + "'");
            }
            lv[f] = static_cast<std::size_t>(it - lvls.begin());
        }
        const auto [it, inserted] = subject_index.try_emplace(obs.subject, lay.n_subjects);
        if (inserted) {
            ++lay.n_subjects;
            lay.obs_at.emplace_back(lay.n_within_cells, std::numeric_limits<std::size_t>::max());
            lay.subject_level.push_back(lv);
        }
        const std::size_t s = it->second;
        for (std::size_t f : lay.between) {
            if (lay.subject_level[s][f] != lv[f]) {
                throw DomainError("art_anova: between-subject factor '" + factors[f].name + "' varies within subject '" +
                                  obs.subject + "'");
            }
        }
        const std::size_t w = key_of(lay, lv, lay.within);
        if (lay.obs_at[s][w] != std::numeric_limits<std::size_t>::max()) {
            throw UnbalancedDesignError("art_anova: subject '" + obs.subject + "' has more than one observation in a within-subject cell");
        }
        lay.obs_at[s][w] = lay.level.size();
        lay.level.push_back(std::move(lv));
        lay.y.push_back(obs.response);
        lay.subject_of.push_back(s);
    }
    for (const auto& [name, s] : subject_index) {
        for (std::size_t idx : lay.obs_at[s]) {
            if (idx == std::numeric_limits<std::size_t>::max()) {
                throw UnbalancedDesignError("art_anova: subject '" + name + "' is missing a within-subject cell");
            }
        }
    }
    std::size_t n_between_cells = 1;
    for (std::size_t f : lay.between) n_between_cells *= levels_of(lay, f);
    std::vector<std::size_t> per_cell(n_between_cells, 0);
    for (std::size_t s = 0; s < lay.n_subjects; ++s) ++per_cell[key_of(lay, lay.subject_level[s], lay.between)];
    if (std::find(per_cell.begin(), per_cell.end(), 0) != per_cell.end()) {
        throw UnbalancedDesignError("art_anova: a between-subject cell has no subjects");
    }
    if (lay.n_subjects <= n_between_cells) {
        throw UnbalancedDesignError("art_anova: no residual degrees of freedom between subjects");
    }
    double lo = lay.y.front(), hi = lay.y.front();
    for (double v : lay.y) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi) throw DegenerateError("art_anova: response is constant");
    return lay;
}

// Orthonormal Helmert contrasts, L x (L-1).
MatrixXd helmert(std::size_t levels) {
    const auto l = static_cast<Eigen::Index>(levels);
    MatrixXd h = MatrixXd::Zero(l, l - 1);
    for (Eigen::Index j = 0; j + 1 < l; ++j) {
        const double norm = std::sqrt(static_cast<double>((j + 1) * (j + 2)));
        for (Eigen::Index i = 0; i <= j; ++i) h(i, j) = 1.0 / norm;
        h(j + 1, j) = -static_cast<double>(j + 1) / norm;
    }
    return h;
}

// Effect-coded between-subject design with column blocks per subset of the
// between factors (mask over positions in lay.between).
struct BetweenDesign {
    MatrixXd x;
    MatrixXd xtx_inv;
    std::map<std::uint32_t, std::pair<Eigen::Index, Eigen::Index>> block;  // mask -> (start, count)
    double df_error = 0.0;
};

std::vector<std::uint32_t> masks_by_size(std::size_t count) {
    std::vector<std::uint32_t> masks;
    for (std::uint32_t m = 0; m < (1u << count); ++m) masks.push_back(m);
    std::stable_sort(masks.begin(), masks.end(),
                     [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) < std::popcount(b); });
    return masks;
}

BetweenDesign between_design(const Layout& lay) {
    const std::size_t nb = lay.between.size();
    std::vector<std::vector<double>> columns;
    BetweenDesign d;
    for (std::uint32_t mask : masks_by_size(nb)) {
        const auto members = factors_in(mask, nb);
        std::size_t combos = 1;
        for (std::size_t pos : members) combos *= levels_of(lay, lay.between[pos]) - 1;
        d.block[mask] = {static_cast<Eigen::Index>(columns.size()), static_cast<Eigen::Index>(combos)};
        for (std::size_t c = 0; c < combos; ++c) {
            std::vector<double> col(lay.n_subjects, 1.0);
            std::size_t rest = c;
            for (std::size_t pos : members) {
                const std::size_t f = lay.between[pos];
                const std::size_t width = levels_of(lay, f) - 1;
                const std::size_t which = rest % width;
                rest /= width;
                for (std::size_t s = 0; s < lay.n_subjects; ++s) {
                    const std::size_t lv = lay.subject_level[s][f];
                    col[s] *= lv == width ? -1.0 : (lv == which ? 1.0 : 0.0);
                }
            }
            columns.push_back(std::move(col));
        }
    }
    d.x.resize(static_cast<Eigen::Index>(lay.n_subjects), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (std::size_t s = 0; s < lay.n_subjects; ++s) {
            d.x(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = columns[j][s];
        }
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(d.x);
    qr.setThreshold(1e-10);
    if (qr.rank() < d.x.cols()) throw UnbalancedDesignError("art_anova: between-subject design is rank deficient");
    d.xtx_inv = (d.x.transpose() * d.x).inverse();
    d.df_error = static_cast<double>(d.x.rows() - d.x.cols());
    return d;
}

// Contrast matrix over within cells for a subset of the within factors
// (mask over positions in lay.within); factors outside the subset are averaged.
MatrixXd within_contrast(const Layout& lay, std::uint32_t mask) {
    const std::size_t nw = lay.within.size();
    const auto members = factors_in(mask, nw);
    std::size_t combos = 1;
    for (std::size_t pos : members) combos *= levels_of(lay, lay.within[pos]) - 1;
    MatrixXd c(static_cast<Eigen::Index>(lay.n_within_cells), static_cast<Eigen::Index>(combos));
    std::vector<MatrixXd> helm;
    for (std::size_t pos = 0; pos < nw; ++pos) helm.push_back(helmert(levels_of(lay, lay.within[pos])));
    for (std::size_t w = 0; w < lay.n_within_cells; ++w) {
        // decode the within cell into per-factor levels
        std::vector<std::size_t> lv(nw);
        std::size_t rest = w;
        for (std::size_t pos = 0; pos < nw; ++pos) {
            lv[pos] = rest % levels_of(lay, lay.within[pos]);
            rest /= levels_of(lay, lay.within[pos]);
        }
        for (std::size_t col = 0; col < combos; ++col) {
            double v = 1.0;
            std::size_t crest = col;
            for (std::size_t pos = 0; pos < nw; ++pos) {
                const std::size_t levels = levels_of(lay, lay.within[pos]);
                if (mask & (1u << pos)) {
                    const std::size_t which = crest % (levels - 1);
                    crest /= levels - 1;
                    v *= helm[pos](static_cast<Eigen::Index>(lv[pos]), static_cast<Eigen::Index>(which));
                } else {
                    v /= std::sqrt(static_cast<double>(levels));
                }
            }
            c(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(col)) = v;
        }
    }
    return c;
}

struct Fitted {
    double ss_effect = 0.0;
    double ss_error = 0.0;
};

Fitted fit_term(const BetweenDesign& d, const MatrixXd& y, std::uint32_t term) {
    const MatrixXd b = d.xtx_inv * (d.x.transpose() * y);
    const MatrixXd resid = y - d.x * b;
    const auto [start, count] = d.block.at(term);
    const MatrixXd v_inv = d.xtx_inv.block(start, start, count, count).inverse();
    Fitted out;
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
        const Eigen::VectorXd bt = b.block(start, c, count, 1);
        out.ss_effect += bt.dot(v_inv * bt);
    }
    out.ss_error = resid.squaredNorm();
    return out;
}

double sum_sq_resid(const BetweenDesign& d, const MatrixXd& y) {
    const MatrixXd b = d.xtx_inv * (d.x.transpose() * y);
    return (y - d.x * b).squaredNorm();
}

std::vector<double> marginal_means(const Layout& lay, const std::vector<std::size_t>& facs, std::vector<std::size_t>& keys) {
    std::size_t cells = 1;
    for (std::size_t f : facs) cells *= levels_of(lay, f);
    std::vector<double> sum(cells, 0.0), count(cells, 0.0);
    keys.resize(lay.y.size());
    for (std::size_t o = 0; o < lay.y.size(); ++o) {
        keys[o] = key_of(lay, lay.level[o], facs);
        sum[keys[o]] += lay.y[o];
        count[keys[o]] += 1.0;
    }
    for (std::size_t c = 0; c < cells; ++c) sum[c] = count[c] > 0.0 ? sum[c] / count[c] : 0.0;
    return sum;
}

std::vector<double> align(const Layout& lay, std::uint32_t effect_mask) {
    const std::size_t nf = lay.factors.size();
    std::vector<std::size_t> all(nf);
    for (std::size_t f = 0; f < nf; ++f) all[f] = f;
    std::vector<std::size_t> full_keys;
    const auto cell_means = marginal_means(lay, all, full_keys);
    std::vector<double> aligned(lay.y.size());
    for (std::size_t o = 0; o < lay.y.size(); ++o) aligned[o] = lay.y[o] - cell_means[full_keys[o]];
    const int effect_order = std::popcount(effect_mask);
    // inclusion-exclusion over the subsets of the effect
    for (std::uint32_t sub = effect_mask;; sub = (sub - 1) & effect_mask) {
        std::vector<std::size_t> keys;
        const auto means = marginal_means(lay, factors_in(sub, nf), keys);
        const double sign = ((effect_order - std::popcount(sub)) % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t o = 0; o < lay.y.size(); ++o) aligned[o] += sign * means[keys[o]];
        if (sub == 0) break;
    }
    return aligned;
}

// Per-subject mean of the raw response at each level of factor f,
// averaging over the other within-subject factors.
std::vector<std::vector<double>> subject_level_means(const Layout& lay, std::size_t f, const std::vector<double>& values) {
    const std::size_t levels = levels_of(lay, f);
    std::vector<std::vector<double>> sum(lay.n_subjects, std::vector<double>(levels, 0.0));
    std::vector<std::vector<double>> count(lay.n_subjects, std::vector<double>(levels, 0.0));
    for (std::size_t o = 0; o < values.size(); ++o) {
        sum[lay.subject_of[o]][lay.level[o][f]] += values[o];
        count[lay.subject_of[o]][lay.level[o][f]] += 1.0;
    }
    for (std::size_t s = 0; s < lay.n_subjects; ++s) {
        for (std::size_t l = 0; l < levels; ++l) sum[s][l] = count[s][l] > 0.0 ? sum[s][l] / count[s][l] : 0.0;
    }
    return sum;
}

std::vector<double> subject_means(const Layout& lay, const std::vector<double>& values) {
    std::vector<double> out(lay.n_subjects, 0.0);
    for (std::size_t o = 0; o < values.size(); ++o) out[lay.subject_of[o]] += values[o];
    for (double& v : out) v /= static_cast<double>(lay.n_within_cells);
    return out;
}

EffectSize main_effect_size(const Layout& lay, std::size_t f) {
    const std::size_t levels = levels_of(lay, f);
    try {
        if (!lay.factors[f].within) {
            const auto means = subject_means(lay, lay.y);
            std::vector<std::vector<double>> groups(levels);
            for (std::size_t s = 0; s < lay.n_subjects; ++s) groups[lay.subject_level[s][f]].push_back(means[s]);
            if (levels == 2) return cliffs_delta(groups[1], groups[0]).effect;
            return kruskal_epsilon_sq(groups).effect;
        }
        const auto per_level = subject_level_means(lay, f, lay.y);
        if (levels == 2) {
            std::vector<double> a, b;
            for (const auto& row : per_level) {
                a.push_back(row[1]);
                b.push_back(row[0]);
            }
            return rank_biserial(a, b).effect;
        }
        return kendalls_w(per_level).effect;
    } catch (const Error&) {
        return {};
    }
}

std::vector<ArtPosthoc> posthoc(const Layout& lay, std::size_t f, const std::vector<double>& ranks, double mse, double df) {
    const std::size_t levels = levels_of(lay, f);
    std::vector<double> level_mean(levels, 0.0), level_n(levels, 0.0);
    std::vector<std::vector<double>> raw_groups(levels);
    std::vector<std::vector<double>> raw_per_level;
    if (!lay.factors[f].within) {
        const auto subj_rank = subject_means(lay, ranks);
        const auto subj_raw = subject_means(lay, lay.y);
        for (std::size_t s = 0; s < lay.n_subjects; ++s) {
            const std::size_t l = lay.subject_level[s][f];
            level_mean[l] += subj_rank[s];
            level_n[l] += 1.0;
            raw_groups[l].push_back(subj_raw[s]);
        }
    } else {
        for (std::size_t o = 0; o < ranks.size(); ++o) {
            level_mean[lay.level[o][f]] += ranks[o];
            level_n[lay.level[o][f]] += 1.0;
        }
        raw_per_level = subject_level_means(lay, f, lay.y);
    }
    for (std::size_t l = 0; l < levels; ++l) level_mean[l] /= level_n[l];

    std::vector<ArtPosthoc> out;
    for (std::size_t a = 0; a < levels; ++a) {
        for (std::size_t b = a + 1; b < levels; ++b) {
            ArtPosthoc ph;
            ph.level_a = lay.factors[f].levels[a];
            ph.level_b = lay.factors[f].levels[b];
            ph.estimate = level_mean[a] - level_mean[b];
            ph.df = df;
            const double se = std::sqrt(mse * (1.0 / level_n[a] + 1.0 / level_n[b]));
            if (se > 0.0) {
                ph.t = ph.estimate / se;
                ph.p = t_two_sided_p(ph.t, df);
            } else {
                ph.t = ph.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), ph.estimate);
                ph.p = ph.estimate == 0.0 ? 1.0 : 0.0;
            }
            try {
                if (!lay.factors[f].within) {
                    ph.effect = cliffs_delta(raw_groups[a], raw_groups[b]).effect;
                } else {
                    std::vector<double> va, vb;
                    for (const auto& row : raw_per_level) {
                        va.push_back(row[a]);
                        vb.push_back(row[b]);
                    }
                    ph.effect = rank_biserial(va, vb).effect;
                }
            } catch (const Error&) {
                ph.effect = {};
            }
            out.push_back(ph);
        }
    }
    std::vector<double> raw_p;
    for (const auto& ph : out) raw_p.push_back(ph.p);
    const auto adjusted = holm_adjust(raw_p);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].p_holm = adjusted[i];
    return out;
}

void set_f(StatResult& r, double ss_effect, double df_effect, double ss_error, double df_error) {
    r.df = {df_effect, df_error};
    if (ss_error > 0.0) {
        r.statistic = (ss_effect / df_effect) / (ss_error / df_error);
        r.p_value = f_sf(r.statistic, df_effect, df_error);
    } else if (ss_effect > 1e-12) {
        r.statistic = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
    } else {
        r.statistic = 0.0;
        r.p_value = 1.0;
        r.notes = "aligned ranks are constant";
    }
}

}  // namespace

const ArtEffect& ArtResult::effect(const std::string& name) const {
    for (const auto& e : effects) {
        if (e.name == name) return e;
    }
    throw DomainError("ART result has no effect named '" + name + "'");
}

ArtResult art_anova(std::span<const ArtFactor> factors, std::span<const ArtObservation> observations) {
    const Layout lay = prepare(factors, observations);
    const BetweenDesign design = between_design(lay);
    const std::size_t nf = lay.factors.size();
    const auto n_subj = static_cast<Eigen::Index>(lay.n_subjects);
    const auto n_wc = static_cast<Eigen::Index>(lay.n_within_cells);

    // Full within-subject contrast space (all non-empty within subsets).
    MatrixXd all_within(n_wc, n_wc - 1);
    {
        Eigen::Index col = 0;
        for (std::uint32_t m : masks_by_size(lay.within.size())) {
            if (m == 0) continue;
            const MatrixXd c = within_contrast(lay, m);
            all_within.middleCols(col, c.cols()) = c;
            col += c.cols();
        }
    }
    const double df_within_error = design.df_error * static_cast<double>(n_wc - 1);

    ArtResult result;
    result.factors = lay.factors;
    result.n_subjects = lay.n_subjects;
    for (std::uint32_t mask : masks_by_size(nf)) {
        if (mask == 0) continue;
        ArtEffect eff;
        eff.factors = factors_in(mask, nf);
        for (std::size_t f : eff.factors) {
            if (!eff.name.empty()) eff.name += ":";
            eff.name += lay.factors[f].name;
        }
        std::uint32_t b_mask = 0, w_mask = 0;
        double df_effect = 1.0;
        for (std::size_t pos = 0; pos < lay.between.size(); ++pos) {
            if (mask & (1u << lay.between[pos])) {
                b_mask |= 1u << pos;
                df_effect *= static_cast<double>(levels_of(lay, lay.between[pos]) - 1);
            }
        }
        for (std::size_t pos = 0; pos < lay.within.size(); ++pos) {
            if (mask & (1u << lay.within[pos])) {
                w_mask |= 1u << pos;
                df_effect *= static_cast<double>(levels_of(lay, lay.within[pos]) - 1);
            }
        }
        eff.within = w_mask != 0;
        eff.aligned = align(lay, mask);
        const auto ranks = midranks(eff.aligned);
        MatrixXd r(n_subj, n_wc);
        for (std::size_t s = 0; s < lay.n_subjects; ++s) {
            for (std::size_t w = 0; w < lay.n_within_cells; ++w) {
                r(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(w)) = ranks[lay.obs_at[s][w]];
            }
        }

        eff.result.method = "ART ANOVA";
        double mse = 0.0, df_error = 0.0;
        if (!eff.within) {
            const MatrixXd y = r.rowwise().mean();
            const Fitted fit = fit_term(design, y, b_mask);
            df_error = design.df_error;
            set_f(eff.result, fit.ss_effect, df_effect, fit.ss_error, df_error);
            mse = fit.ss_error / df_error;
        } else {
            const Fitted fit = fit_term(design, r * within_contrast(lay, w_mask), b_mask);
            const double ss_error = sum_sq_resid(design, r * all_within);
            df_error = df_within_error;
            set_f(eff.result, fit.ss_effect, df_effect, ss_error, df_error);
            mse = ss_error / df_error;
        }
        if (eff.factors.size() == 1) {
            const std::size_t f = eff.factors.front();
            eff.result.effect = main_effect_size(lay, f);
            eff.posthoc = posthoc(lay, f, ranks, mse, df_error);
        }
        result.effects.push_back(std::move(eff));
    }
    return result;
}

}  // namespace minispace::stats
