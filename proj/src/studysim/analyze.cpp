#include <algorithm>
#include <map>

#include "minispace/csv.hpp"
#include "minispace/error.hpp"
#include "minispace/stats/nonparametric.hpp"
#include "minispace/studysim/analysis.hpp"

namespace minispace::sim {

namespace {

constexpr const char* kAnalysisVersion = "1.0";

const std::vector<std::string> kGenderLevels{"female", "male"};
const std::vector<std::string> kEducationLevels{"high_school", "university"};
const std::vector<std::string> kAgeLevels{"20-40", "41-60", "61-90"};
const std::vector<std::string> kWeekLevels{"1", "2", "3"};
const std::vector<std::string> kSupervisionLevels{"unsupervised", "supervised"};

std::string str(AgeGroup g) { return std::string(to_string(g)); }
std::string str(Gender g) { return std::string(to_string(g)); }
std::string str(Education e) { return std::string(to_string(e)); }
std::string str(Condition c) { return std::string(to_string(c)); }

using Key = std::pair<std::string, int>;  // participant, week

// Everything the questions read, gathered once.
struct Tables {
    std::vector<const Participant*> unsupervised;
    std::vector<const Participant*> supervised;
    std::map<Key, const SessionRecord*> sessions;
    std::map<Key, double> weekly_z;  // standardized within week, unsupervised only
    std::map<Key, double> pooled_z;  // standardized over all weeks, unsupervised only
};

Tables gather(const StudyDataset& data) {
    Tables t;
    std::vector<MetricRecord> records;
    for (const auto& p : data.participants) {
        (p.condition == Condition::unsupervised ? t.unsupervised : t.supervised).push_back(&p);
    }
    for (const auto& s : data.sessions) {
        t.sessions[{s.log.participant_id, s.log.week}] = &s;
    }
    for (const auto* p : t.unsupervised) {
        for (int week = 1; week <= 3; ++week) {
            if (const auto it = t.sessions.find({p->id, week}); it != t.sessions.end()) {
                records.push_back(it->second->metrics);
            }
        }
    }
    if (records.size() >= 2) {
        try {
            for (const auto& r : composite_space_error(records)) t.weekly_z[{r.participant_id, r.week}] = *r.space_error_z;
            CompositeOptions pooled;
            pooled.grouping = StandardizationGroup::pooled;
            for (const auto& r : composite_space_error(records, pooled)) {
                t.pooled_z[{r.participant_id, r.week}] = *r.space_error_z;
            }
        } catch (const StandardizationError&) {
            // reported by the questions that need the composite
        }
    }
    return t;
}

// Week-1 composite of both conditions, standardized as one group.
std::map<std::string, double> supervision_z(const Tables& t) {
    std::vector<MetricRecord> records;
    for (const auto* group : {&t.unsupervised, &t.supervised}) {
        for (const auto* p : *group) {
            if (const auto it = t.sessions.find({p->id, 1}); it != t.sessions.end()) records.push_back(it->second->metrics);
        }
    }
    std::map<std::string, double> out;
    for (const auto& r : composite_space_error(records)) out[r.participant_id] = *r.space_error_z;
    return out;
}

double weekly(const Tables& t, const std::string& question, const std::string& id, int week, bool pooled = false) {
    const auto& m = pooled ? t.pooled_z : t.weekly_z;
    const auto it = m.find({id, week});
    if (it == m.end()) {
        throw AnalysisPlanError(question, "no standardized SPACE error for " + id + " week " + std::to_string(week));
    }
    return it->second;
}

const SessionRecord& session(const Tables& t, const std::string& question, const std::string& id, int week) {
    const auto it = t.sessions.find({id, week});
    if (it == t.sessions.end()) throw AnalysisPlanError(question, id + " has no week " + std::to_string(week) + " session");
    return *it->second;
}

const QuestionnaireScores& scores(const Tables& t, const std::string& question, const std::string& id, int week) {
    const auto& s = session(t, question, id, week);
    if (!s.scores) throw AnalysisPlanError(question, id + " week " + std::to_string(week) + " has no questionnaire scores");
    return *s.scores;
}

void require_levels(const std::string& question, const std::string& factor, const std::vector<std::string>& present,
                    const std::vector<std::string>& levels) {
    for (const auto& level : levels) {
        if (std::find(present.begin(), present.end(), level) == present.end()) {
            throw AnalysisPlanError(question, "factor " + factor + " has no observations at level '" + level + "'");
        }
    }
}

void require_unsupervised(const Tables& t, const std::string& question, std::size_t min_n) {
    if (t.unsupervised.size() < min_n) {
        throw AnalysisPlanError(question, "needs at least " + std::to_string(min_n) + " unsupervised participants, found " +
                                              std::to_string(t.unsupervised.size()));
    }
}

std::vector<NamedResult> holm_named(std::vector<NamedResult> results) {
    std::vector<double> p;
    for (const auto& r : results) p.push_back(r.result.p_value);
    const auto adj = stats::holm_adjust(p);
    for (std::size_t i = 0; i < results.size(); ++i) results[i].p_adjusted = adj[i];
    return results;
}

// Between-subject factor set shared by Q4-Q6: every gender x age (x
// supervision) cell must be populated.
void require_cells(const std::string& question, const std::vector<std::vector<std::string>>& cells_seen,
                   const std::vector<std::vector<std::string>>& factor_levels, const std::vector<std::string>& names) {
    for (std::size_t f = 0; f < factor_levels.size(); ++f) {
        std::vector<std::string> present;
        for (const auto& c : cells_seen) present.push_back(c[f]);
        require_levels(question, names[f], present, factor_levels[f]);
    }
    std::size_t total = 1;
    for (const auto& l : factor_levels) total *= l.size();
    std::vector<std::vector<std::string>> distinct = cells_seen;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() != total) {
        throw AnalysisPlanError(question, "only " + std::to_string(distinct.size()) + " of " + std::to_string(total) +
                                              " between-subject cells have participants");
    }
}

Q1Result run_q1(const Tables& t) {
    require_unsupervised(t, "Q1", 3);
    Q1Result out;
    std::vector<std::vector<double>> rows;
    std::vector<stats::ArtObservation> obs;
    for (const auto* p : t.unsupervised) {
        std::vector<double> row;
        for (int week = 1; week <= 3; ++week) {
            row.push_back(weekly(t, "Q1", p->id, week));
            obs.push_back({p->id, {std::to_string(week)}, weekly(t, "Q1", p->id, week, true)});
        }
        rows.push_back(std::move(row));
    }
    std::vector<NamedResult> rho;
    for (const auto& [a, b] : std::vector<std::pair<int, int>>{{1, 2}, {2, 3}, {1, 3}}) {
        std::vector<double> x, y;
        for (const auto& r : rows) {
            x.push_back(r[static_cast<std::size_t>(a - 1)]);
            y.push_back(r[static_cast<std::size_t>(b - 1)]);
        }
        rho.push_back({"Week " + std::to_string(a) + " - Week " + std::to_string(b), stats::spearman_rho(x, y), 1.0});
    }
    out.spearman = holm_named(std::move(rho));
    out.icc = stats::icc_two_way(rows);
    const std::vector<stats::ArtFactor> factors{{"Week", kWeekLevels, true}};
    out.week_art = stats::art_anova(factors, obs);
    return out;
}

stats::OlsFit fit(const std::vector<const Participant*>& people, const std::vector<std::pair<std::string, std::vector<double>>>& extra) {
    const std::size_t n = people.size();
    std::vector<double> age, y;
    std::vector<std::string> gender, education;
    for (const auto* p : people) {
        age.push_back(p->age);
        y.push_back(p->moca_total);
        gender.push_back(str(p->gender));
        education.push_back(str(p->education));
    }
    stats::DesignBuilder b(n);
    b.intercept().numeric("Age", age).treatment("Gender", gender, kGenderLevels).treatment("Education", education, kEducationLevels);
    for (const auto& [name, values] : extra) b.numeric(name, values);
    return stats::ols_fit(b.build(), y);
}

std::vector<RegressionPanel> run_q2(const Tables& t) {
    require_unsupervised(t, "Q2", 10);
    std::vector<std::string> genders, educations;
    for (const auto* p : t.unsupervised) {
        genders.push_back(str(p->gender));
        educations.push_back(str(p->education));
    }
    require_levels("Q2", "Gender", genders, kGenderLevels);
    require_levels("Q2", "Education", educations, kEducationLevels);

    const stats::OlsFit baseline = fit(t.unsupervised, {});
    std::vector<RegressionPanel> panels;
    for (const std::string name : {"A", "B"}) {
        RegressionPanel panel;
        panel.name = name;
        panel.baseline = baseline;
        std::vector<NamedResult> cmp;
        for (int week = 1; week <= 3; ++week) {
            std::vector<std::pair<std::string, std::vector<double>>> extra;
            if (name == "A") {
                std::vector<double> z;
                for (const auto* p : t.unsupervised) z.push_back(weekly(t, "Q2", p->id, week));
                extra.emplace_back("SPACE error Week " + std::to_string(week), std::move(z));
            } else {
                std::vector<double> move, rot, persp;
                for (const auto* p : t.unsupervised) {
                    const auto& m = session(t, "Q2", p->id, week).metrics;
                    move.push_back(m.movement_time_s);
                    rot.push_back(m.rotation_time_s);
                    persp.push_back(m.perspective_error_deg);
                }
                extra.emplace_back("Movement Time", std::move(move));
                extra.emplace_back("Rotation Time", std::move(rot));
                extra.emplace_back("Perspective Taking Error", std::move(persp));
            }
            panel.models.push_back(fit(t.unsupervised, extra));
            cmp.push_back({"Baseline vs Model " + std::to_string(week),
                           stats::nested_model_compare(baseline, panel.models.back()), 1.0});
        }
        panel.comparisons = holm_named(std::move(cmp));
        panels.push_back(std::move(panel));
    }
    return panels;
}

double benchmark_for(const std::string& measure) {
    if (measure == "sus") return 68.0;
    if (measure == "nasa_tlx") return 50.0;
    return 0.0;
}

std::vector<BenchmarkTest> run_q3(const Tables& t) {
    require_unsupervised(t, "Q3", 2);
    std::vector<BenchmarkTest> out;
    for (const auto& measure : questionnaire_measures()) {
        std::vector<BenchmarkTest> family;
        for (int week = 1; week <= 3; ++week) {
            std::vector<double> x;
            for (const auto* p : t.unsupervised) x.push_back(measure_value(scores(t, "Q3", p->id, week), measure));
            BenchmarkTest b;
            b.measure = measure;
            b.week = week;
            b.benchmark = benchmark_for(measure);
            b.result = stats::wilcoxon_signed_rank(x, b.benchmark);
            family.push_back(std::move(b));
        }
        std::vector<double> p;
        for (const auto& b : family) p.push_back(b.result.p_value);
        const auto adj = stats::holm_adjust(p);
        for (std::size_t i = 0; i < family.size(); ++i) {
            family[i].p_adjusted = adj[i];
            out.push_back(std::move(family[i]));
        }
    }
    return out;
}

std::map<std::string, stats::ArtResult> run_q3_1(const Tables& t) {
    require_unsupervised(t, "Q3.1", 3);
    std::map<std::string, stats::ArtResult> out;
    const std::vector<stats::ArtFactor> factors{{"Week", kWeekLevels, true}};
    for (const auto& measure : questionnaire_measures()) {
        std::vector<stats::ArtObservation> obs;
        for (const auto* p : t.unsupervised) {
            for (int week = 1; week <= 3; ++week) {
                obs.push_back({p->id, {std::to_string(week)}, measure_value(scores(t, "Q3.1", p->id, week), measure)});
            }
        }
        out.emplace(measure, stats::art_anova(factors, obs));
    }
    return out;
}

stats::ArtResult run_q4(const Tables& t) {
    std::vector<std::vector<std::string>> cells;
    std::vector<stats::ArtObservation> obs;
    for (const auto* p : t.unsupervised) {
        cells.push_back({str(p->gender), str(p->age_group)});
        for (int week = 1; week <= 3; ++week) {
            obs.push_back({p->id, {str(p->gender), str(p->age_group), std::to_string(week)}, weekly(t, "Q4", p->id, week, true)});
        }
    }
    require_cells("Q4", cells, {kGenderLevels, kAgeLevels}, {"Gender", "Age Group"});
    const std::vector<stats::ArtFactor> factors{
        {"Gender", kGenderLevels, false}, {"Age Group", kAgeLevels, false}, {"Week", kWeekLevels, true}};
    return stats::art_anova(factors, obs);
}

const std::vector<stats::ArtFactor>& supervision_factors() {
    static const std::vector<stats::ArtFactor> f{
        {"Gender", kGenderLevels, false}, {"Supervision", kSupervisionLevels, false}, {"Age Group", kAgeLevels, false}};
    return f;
}

Q5Result run_q5(const Tables& t) {
    if (t.supervised.empty()) throw AnalysisPlanError("Q5", "the dataset has no supervised participants");
    require_unsupervised(t, "Q5", 2);
    const auto z = supervision_z(t);
    std::vector<std::vector<std::string>> cells;
    std::vector<stats::ArtObservation> obs;
    for (const auto* group : {&t.unsupervised, &t.supervised}) {
        for (const auto* p : *group) {
            std::vector<std::string> levels{str(p->gender), str(p->condition), str(p->age_group)};
            cells.push_back(levels);
            obs.push_back({p->id, std::move(levels), z.at(p->id)});
        }
    }
    require_cells("Q5", cells, {kGenderLevels, kSupervisionLevels, kAgeLevels}, {"Gender", "Supervision", "Age Group"});
    Q5Result out;
    out.art = stats::art_anova(supervision_factors(), obs);
    std::vector<NamedResult> simple;
    for (const auto& age : kAgeLevels) {
        std::vector<double> sup, unsup;
        for (const auto& o : obs) {
            if (o.levels[2] != age) continue;
            (o.levels[1] == "supervised" ? sup : unsup).push_back(o.response);
        }
        simple.push_back({"supervised - unsupervised, " + age, stats::cliffs_delta(sup, unsup), 1.0});
    }
    out.supervision_by_age = holm_named(std::move(simple));
    return out;
}

std::map<std::string, stats::ArtResult> run_q6(const Tables& t) {
    std::vector<const Participant*> people;
    for (const auto* p : t.unsupervised) people.push_back(p);
    for (const auto* p : t.supervised) {
        if (session(t, "Q6", p->id, 1).scores) people.push_back(p);
    }
    if (people.size() == t.unsupervised.size()) {
        throw AnalysisPlanError("Q6", "no supervised participant has questionnaire scores");
    }
    std::vector<std::vector<std::string>> cells;
    for (const auto* p : people) cells.push_back({str(p->gender), str(p->condition), str(p->age_group)});
    require_cells("Q6", cells, {kGenderLevels, kSupervisionLevels, kAgeLevels}, {"Gender", "Supervision", "Age Group"});
    std::map<std::string, stats::ArtResult> out;
    for (const auto& measure : questionnaire_measures()) {
        std::vector<stats::ArtObservation> obs;
        for (std::size_t i = 0; i < people.size(); ++i) {
            obs.push_back({people[i]->id, cells[i], measure_value(scores(t, "Q6", people[i]->id, 1), measure)});
        }
        out.emplace(measure, stats::art_anova(supervision_factors(), obs));
    }
    return out;
}

template <typename F>
auto guarded(const std::string& question, F&& f) {
    try {
        return f();
    } catch (const AnalysisPlanError&) {
        throw;
    } catch (const Error& e) {
        throw AnalysisPlanError(question, e.what());
    }
}

// --- intermediate tables -----------------------------------------------------

std::string num(double v) { return csv::format_number(v); }

std::string table_weekly(const Tables& t, bool pooled) {
    std::string out;
    csv::append_row(out, {"participant_id", "gender", "age_group", "week", "space_error_z"});
    for (const auto* p : t.unsupervised) {
        for (int week = 1; week <= 3; ++week) {
            const auto& m = pooled ? t.pooled_z : t.weekly_z;
            const auto it = m.find({p->id, week});
            if (it == m.end()) continue;
            csv::append_row(out, {p->id, str(p->gender), str(p->age_group), std::to_string(week), num(it->second)});
        }
    }
    return out;
}

std::string table_regression(const Tables& t) {
    std::vector<std::string> header{"participant_id", "moca_total", "age", "gender", "education"};
    for (int week = 1; week <= 3; ++week) {
        const std::string w = "_week" + std::to_string(week);
        for (const char* col : {"space_error_z", "movement_time_s", "rotation_time_s", "perspective_error_deg"}) {
            header.push_back(col + w);
        }
    }
    std::string out;
    csv::append_row(out, header);
    for (const auto* p : t.unsupervised) {
        std::vector<std::string> row{p->id, std::to_string(p->moca_total), std::to_string(p->age), str(p->gender),
                                     str(p->education)};
        for (int week = 1; week <= 3; ++week) {
            const auto z = t.weekly_z.find({p->id, week});
            const auto s = t.sessions.find({p->id, week});
            row.push_back(z == t.weekly_z.end() ? "" : num(z->second));
            if (s == t.sessions.end()) {
                row.insert(row.end(), {"", "", ""});
            } else {
                const auto& m = s->second->metrics;
                row.insert(row.end(), {num(m.movement_time_s), num(m.rotation_time_s), num(m.perspective_error_deg)});
            }
        }
        csv::append_row(out, row);
    }
    return out;
}

std::string table_questionnaires(const Tables& t) {
    std::vector<std::string> header{"participant_id", "condition", "gender", "age_group", "week"};
    for (const auto& m : questionnaire_measures()) header.push_back(m);
    std::string out;
    csv::append_row(out, header);
    for (const auto* group : {&t.unsupervised, &t.supervised}) {
        for (const auto* p : *group) {
            for (int week = 1; week <= 3; ++week) {
                const auto s = t.sessions.find({p->id, week});
                if (s == t.sessions.end() || !s->second->scores) continue;
                std::vector<std::string> row{p->id, str(p->condition), str(p->gender), str(p->age_group), std::to_string(week)};
                for (const auto& m : questionnaire_measures()) row.push_back(num(measure_value(*s->second->scores, m)));
                csv::append_row(out, row);
            }
        }
    }
    return out;
}

std::string table_supervision(const Tables& t) {
    std::string out;
    csv::append_row(out, {"participant_id", "study", "condition", "gender", "age_group", "space_error_z"});
    const auto z = supervision_z(t);
    for (const auto* group : {&t.unsupervised, &t.supervised}) {
        for (const auto* p : *group) {
            const auto it = z.find(p->id);
            if (it == z.end()) continue;
            csv::append_row(out, {p->id, p->study, str(p->condition), str(p->gender), str(p->age_group), num(it->second)});
        }
    }
    return out;
}

}  // namespace

std::vector<std::string> AnalysisOptions::selected() const {
    for (const auto& q : questions) {
        if (std::find(kQuestions.begin(), kQuestions.end(), q) == kQuestions.end()) {
            throw DomainError("unknown research question '" + q + "' (expected one of Q1, Q2, Q3, Q3.1, Q4, Q5, Q6)");
        }
    }
    if (questions.empty()) return kQuestions;
    std::vector<std::string> out;
    for (const auto& q : kQuestions) {
        if (questions.contains(q)) out.push_back(q);
    }
    return out;
}

bool AnalysisOptions::wants(const std::string& question) const {
    return questions.empty() || questions.contains(question);
}

const std::vector<std::string>& questionnaire_measures() {
    static const std::vector<std::string> m{"sus", "nasa_tlx", "ueq_attractiveness", "ueq_pragmatic", "ueq_hedonic"};
    return m;
}

double measure_value(const QuestionnaireScores& s, const std::string& measure) {
    if (measure == "sus") return s.sus;
    if (measure == "nasa_tlx") return s.nasa_tlx;
    if (measure == "ueq_attractiveness") return s.ueq_attractiveness;
    if (measure == "ueq_pragmatic") return s.ueq_pragmatic;
    if (measure == "ueq_hedonic") return s.ueq_hedonic;
    throw DomainError("unknown questionnaire measure '" + measure + "'");
}

StudyReport analyze_study(const StudyDataset& data, const AnalysisOptions& options) {
    const auto questions = options.selected();
    const Tables t = gather(data);
    StudyReport r;
    r.analysis_version = kAnalysisVersion;
    r.n_unsupervised = t.unsupervised.size();
    r.n_supervised = t.supervised.size();
    for (const auto& q : questions) {
        if (q == "Q1") r.q1 = guarded(q, [&] { return run_q1(t); });
        if (q == "Q2") r.q2 = guarded(q, [&] { return run_q2(t); });
        if (q == "Q3") r.q3 = guarded(q, [&] { return run_q3(t); });
        if (q == "Q3.1") r.q3_1 = guarded(q, [&] { return run_q3_1(t); });
        if (q == "Q4") r.q4 = guarded(q, [&] { return run_q4(t); });
        if (q == "Q5") r.q5 = guarded(q, [&] { return run_q5(t); });
        if (q == "Q6") r.q6 = guarded(q, [&] { return run_q6(t); });
    }
    return r;
}

const std::vector<std::string>& analysis_tables() {
    static const std::vector<std::string> names{"weekly", "pooled", "regression", "questionnaires", "supervision"};
    return names;
}

std::string analysis_table_csv(const StudyDataset& data, const std::string& table) {
    const Tables t = gather(data);
    if (table == "weekly") return table_weekly(t, false);
    if (table == "pooled") return table_weekly(t, true);
    if (table == "regression") return table_regression(t);
    if (table == "questionnaires") return table_questionnaires(t);
    if (table == "supervision") return table_supervision(t);
    throw DomainError("unknown analysis table '" + table + "'");
}

}  // namespace minispace::sim
