#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cmath>
#include <thread>

#include "minispace/csv.hpp"
#include "minispace/error.hpp"
#include "minispace/rng.hpp"
#include "minispace/studysim/analysis.hpp"

namespace minispace::sim {

namespace {

struct Observation {
    double estimate = 0.0;
    bool detected = false;
};

// What one repetition contributes to the reduction.
struct RepOutcome {
    bool ok = false;
    std::string error;
    std::map<std::string, Observation> effects;
    std::map<std::string, bool> orderings;
    std::map<std::string, bool> families;  // true when any adjusted p < alpha
};

bool any_below(const std::vector<double>& p, double alpha) {
    return std::any_of(p.begin(), p.end(), [alpha](double v) { return v < alpha; });
}

void record_art(RepOutcome& out, const std::string& prefix, const stats::ArtResult& art, double alpha) {
    for (const auto& e : art.effects) {
        std::string key = e.name;
        std::replace(key.begin(), key.end(), ' ', '_');
        std::replace(key.begin(), key.end(), ':', 'x');
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
        out.effects[prefix + "_" + key] = {e.result.effect.value, e.result.p_value < alpha};
        if (!e.posthoc.empty()) {
            std::vector<double> p;
            for (const auto& ph : e.posthoc) p.push_back(ph.p_holm);
            out.families[prefix + " " + e.name + " post hoc"] = any_below(p, alpha);
        }
    }
}

// Sample orderings of the pooled composite: age groups over all weeks and
// weeks over all participants.
void record_orderings(RepOutcome& out, const StudyDataset& data) {
    std::vector<MetricRecord> records;
    std::map<std::string, AgeGroup> group;
    for (const auto& p : data.participants) {
        if (p.condition != Condition::unsupervised) continue;
        group[p.id] = p.age_group;
        for (const auto* s : data.sessions_of(p.id)) records.push_back(s->metrics);
    }
    CompositeOptions pooled;
    pooled.grouping = StandardizationGroup::pooled;
    std::array<double, 3> by_age{}, by_week{};
    std::array<int, 3> n_age{}, n_week{};
    for (const auto& r : composite_space_error(records, pooled)) {
        const auto g = static_cast<std::size_t>(group.at(r.participant_id));
        const auto w = static_cast<std::size_t>(r.week - 1);
        by_age[g] += *r.space_error_z;
        ++n_age[g];
        by_week[w] += *r.space_error_z;
        ++n_week[w];
    }
    for (std::size_t i = 0; i < 3; ++i) {
        by_age[i] /= std::max(1, n_age[i]);
        by_week[i] /= std::max(1, n_week[i]);
    }
    out.orderings["age young < middle < old"] = by_age[0] < by_age[1] && by_age[1] < by_age[2];
    out.orderings["week 2 < week 1 < week 3"] = by_week[1] < by_week[0] && by_week[0] < by_week[2];
}

RepOutcome run_rep(const CohortConfig& base, const RecoveryOptions& options, int rep) {
    RepOutcome out;
    try {
        CohortConfig c = base;
        c.seed = Rng::derive(base.seed, static_cast<std::uint64_t>(rep)).next_u64();
        const StudyDataset data = simulate_cohort(c);
        const StudyReport report = analyze_study(data, options.analysis);
        const double alpha = options.analysis.alpha;

        if (report.q1) {
            const auto& icc = report.q1->icc;
            out.effects["icc_single"] = {icc.icc_single, icc.p_rows < alpha};
            std::vector<double> p;
            for (const auto& s : report.q1->spearman) p.push_back(s.p_adjusted);
            out.families["Q1 spearman"] = any_below(p, alpha);
            record_art(out, "q1", report.q1->week_art, alpha);
        }
        for (const auto& panel : report.q2) {
            std::vector<double> p;
            for (const auto& cmp : panel.comparisons) p.push_back(cmp.p_adjusted);
            out.families["Q2 panel " + panel.name] = any_below(p, alpha);
            if (panel.name != "A") continue;
            for (std::size_t w = 0; w < panel.models.size(); ++w) {
                const std::string term = "SPACE error Week " + std::to_string(w + 1);
                const auto& m = panel.models[w];
                out.effects["moca_slope_week" + std::to_string(w + 1)] = {m.coefficients[m.index_of(term)],
                                                                         panel.comparisons[w].p_adjusted < alpha};
            }
        }
        if (report.q4) record_art(out, "q4", *report.q4, alpha);
        if (report.q5) {
            record_art(out, "q5", report.q5->art, alpha);
            std::vector<double> p;
            for (const auto& s : report.q5->supervision_by_age) p.push_back(s.p_adjusted);
            out.families["Q5 supervision by age group"] = any_below(p, alpha);
        }
        record_orderings(out, data);
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace

const EffectRecovery& RecoveryReport::effect(const std::string& name) const {
    for (const auto& e : effects) {
        if (e.effect == name) return e;
    }
    throw DomainError("recovery report has no effect named '" + name + "'");
}

RecoveryReport recovery_experiment(const CohortConfig& config, const RecoveryOptions& options) {
    if (options.n_reps < 1) throw DomainError("recovery_experiment: n_reps must be at least 1");
    config.validate();
    options.analysis.selected();  // reject unknown question names up front
    calibrated_stability(config);  // warm the cache once instead of racing on it

    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(options.n_reps));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int rep = next++; rep < options.n_reps; rep = next++) {
            outcomes[static_cast<std::size_t>(rep)] = run_rep(config, options, rep);
        }
    };
    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(options.n_reps));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    RecoveryReport report;
    report.seed = config.seed;
    report.n_reps = options.n_reps;
    report.alpha = options.analysis.alpha;

    // Deterministic reduction in repetition order.
    std::map<std::string, std::vector<Observation>> effects;
    std::map<std::string, std::pair<int, int>> orderings, families;  // hits, total
    for (std::size_t rep = 0; rep < outcomes.size(); ++rep) {
        const auto& o = outcomes[rep];
        if (!o.ok) {
            report.failures.emplace_back(static_cast<int>(rep), o.error);
            continue;
        }
        for (const auto& [name, obs] : o.effects) effects[name].push_back(obs);
        for (const auto& [name, hit] : o.orderings) {
            orderings[name].first += hit ? 1 : 0;
            ++orderings[name].second;
        }
        for (const auto& [name, hit] : o.families) {
            families[name].first += hit ? 1 : 0;
            ++families[name].second;
        }
    }
    auto planted = [&](const std::string& name) -> std::optional<double> {
        if (name == "icc_single") return config.between_person_share;
        if (name == "moca_slope_week" + std::to_string(config.moca.reference_week)) return config.moca.slope;
        return std::nullopt;
    };
    for (const auto& [name, obs] : effects) {
        EffectRecovery e;
        e.effect = name;
        e.planted = planted(name);
        e.n = static_cast<int>(obs.size());
        double sum = 0.0, hits = 0.0;
        e.min_estimate = obs.front().estimate;
        e.max_estimate = obs.front().estimate;
        for (const auto& x : obs) {
            sum += x.estimate;
            hits += x.detected ? 1.0 : 0.0;
            e.min_estimate = std::min(e.min_estimate, x.estimate);
            e.max_estimate = std::max(e.max_estimate, x.estimate);
        }
        e.mean_estimate = sum / e.n;
        e.detection_rate = hits / e.n;
        double ss = 0.0;
        for (const auto& x : obs) ss += (x.estimate - e.mean_estimate) * (x.estimate - e.mean_estimate);
        e.sd_estimate = e.n > 1 ? std::sqrt(ss / (e.n - 1)) : 0.0;
        if (e.planted) e.bias = e.mean_estimate - *e.planted;
        report.effects.push_back(std::move(e));
    }
    for (const auto& [name, c] : orderings) report.ordering_rates[name] = static_cast<double>(c.first) / c.second;
    for (const auto& [name, c] : families) report.familywise_rates[name] = static_cast<double>(c.first) / c.second;
    return report;
}

std::string recovery_csv(const RecoveryReport& report) {
    auto num = [](double v) { return csv::format_number(v); };
    std::string out;
    csv::append_row(out, {"kind", "name", "planted", "n", "rate", "mean", "sd", "min", "max", "bias"});
    for (const auto& e : report.effects) {
        csv::append_row(out, {"effect", e.effect, e.planted ? num(*e.planted) : "", std::to_string(e.n), num(e.detection_rate),
                              num(e.mean_estimate), num(e.sd_estimate), num(e.min_estimate), num(e.max_estimate),
                              e.bias ? num(*e.bias) : ""});
    }
    const int ok = report.n_reps - static_cast<int>(report.failures.size());
    for (const auto& [name, rate] : report.ordering_rates) {
        csv::append_row(out, {"ordering", name, "", std::to_string(ok), num(rate), "", "", "", "", ""});
    }
    for (const auto& [name, rate] : report.familywise_rates) {
        csv::append_row(out, {"familywise", name, "", std::to_string(ok), num(rate), "", "", "", "", ""});
    }
    for (const auto& [rep, error] : report.failures) {
        csv::append_row(out, {"failure", "rep " + std::to_string(rep), "", "", "", "", "", "", "", error});
    }
    return out;
}

}  // namespace minispace::sim
