#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "minispace/csv.hpp"
#include "minispace/error.hpp"
#include "minispace/stats/icc.hpp"
#include "minispace/stats/nonparametric.hpp"
#include "minispace/stats/regression.hpp"
#include "minispace/studysim/analysis.hpp"

using namespace minispace;
using namespace minispace::sim;

namespace {

CohortConfig small_config(int n_per_cell = 8, std::uint64_t seed = 11) {
    CohortConfig c = CohortConfig::defaults();
    c.seed = seed;
    c.n_per_cell = n_per_cell;
    c.supervised_enabled = false;
    return c;
}

// Small cohort with one tiny supervised study that carries questionnaires.
CohortConfig small_with_supervised() {
    CohortConfig c = small_config(6);
    c.supervised_enabled = true;
    c.supervised = {{"proxy", 20, 20, 55.0, 20.0, 20, 90, true}};
    return c;
}

using Table = std::vector<std::map<std::string, std::string>>;

Table read_table(const std::string& text) {
    const auto rows = csv::parse(text);
    REQUIRE(!rows.empty());
    Table out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == rows[0].size());
        std::map<std::string, std::string> r;
        for (std::size_t j = 0; j < rows[0].size(); ++j) r[rows[0][j]] = rows[i][j];
        out.push_back(std::move(r));
    }
    return out;
}

std::string dataset_bytes(const StudyDataset& d) {
    std::string out = participants_csv(d);
    std::vector<SessionLog> logs;
    for (const auto& s : d.sessions) logs.push_back(s.log);
    out += write_session_archive(logs);
    return out;
}

}  // namespace

TEST_SUITE("studysim") {
    TEST_CASE("bundled config round-trips through json") {
        const CohortConfig& d = CohortConfig::defaults();
        CHECK_NOTHROW(d.validate());
        const CohortConfig back = CohortConfig::from_json(nlohmann::json::parse(d.to_json().dump()));
        CHECK(back.to_json().dump() == d.to_json().dump());
        CHECK(d.cells.size() == 6);
        int n = 0;
        for (const auto& cell : d.cells) n += cell.n;
        CHECK(n == 93);
        CHECK(d.between_person_share == doctest::Approx(0.67));
        CHECK(d.moca.slope == doctest::Approx(-1.24));
    }

    TEST_CASE("invalid configs are rejected") {
        CohortConfig c = small_config();
        c.between_person_share = 1.2;
        CHECK_THROWS_AS(c.validate(), DomainError);
        c = small_config();
        c.noise_scale = -1.0;
        CHECK_THROWS_AS(c.validate(), DomainError);
        c = small_config();
        c.moca.reference_week = 4;
        CHECK_THROWS_AS(c.validate(), DomainError);
        CHECK_THROWS_AS(CohortConfig::from_json(nlohmann::json::parse(R"({"cells": [{"age_group": "10-20"}]})")),
                        DomainError);
    }

    TEST_CASE("simulation is deterministic per seed") {
        const CohortConfig c = small_config();
        const std::string a = dataset_bytes(simulate_cohort(c));
        CHECK(a == dataset_bytes(simulate_cohort(c)));
        CHECK(a != dataset_bytes(simulate_cohort(small_config(8, 12))));
    }

    TEST_CASE("dataset shape follows the config") {
        const CohortConfig c = small_config(5);
        const StudyDataset d = simulate_cohort(c);
        CHECK(d.participants.size() == 30);
        CHECK(d.sessions.size() == 90);
        std::set<std::string> ids;
        for (const auto& p : d.participants) {
            ids.insert(p.id);
            CHECK(p.condition == Condition::unsupervised);
            CHECK(age_group_for_age(p.age) == p.age_group);
            CHECK(p.moca_total >= 0);
            CHECK(p.moca_total <= 30);
            const auto sessions = d.sessions_of(p.id);
            REQUIRE(sessions.size() == 3);
            for (int w = 0; w < 3; ++w) {
                CHECK(sessions[w]->log.week == w + 1);
                CHECK(validate_session(sessions[w]->log).empty());
                CHECK(sessions[w]->metrics == compute_metrics(sessions[w]->log));
                CHECK(sessions[w]->scores.has_value());
            }
        }
        CHECK(ids.size() == d.participants.size());
    }

    TEST_CASE("zero noise makes same-cell participants identical") {
        CohortConfig c = small_config(4);
        c.noise_scale = 0.0;
        const StudyDataset d = simulate_cohort(c);
        std::map<std::pair<std::string, int>, MetricRecord> first;
        for (const auto& p : d.participants) {
            const std::string cell = std::string(to_string(p.age_group)) + "/" + std::string(to_string(p.gender));
            for (const auto* s : d.sessions_of(p.id)) {
                MetricRecord m = s->metrics;
                m.participant_id.clear();
                auto [it, fresh] = first.emplace(std::make_pair(cell, s->log.week), m);
                if (!fresh) {
                    CHECK(it->second.rotation_time_s == doctest::Approx(m.rotation_time_s).epsilon(1e-6));
                    CHECK(it->second.movement_time_s == doctest::Approx(m.movement_time_s).epsilon(1e-6));
                    CHECK(it->second.perspective_error_deg == doctest::Approx(m.perspective_error_deg).epsilon(1e-6));
                }
            }
        }
    }

    TEST_CASE("old week-1 perspective error matches its calibration target") {
        CohortConfig c = small_config(150, 3);
        const StudyDataset d = simulate_cohort(c);
        double sum = 0.0;
        int n = 0;
        for (const auto& p : d.participants) {
            if (p.age_group != AgeGroup::old) continue;
            sum += d.sessions_of(p.id)[0]->metrics.perspective_error_deg;
            ++n;
        }
        const auto& target = c.perspective_error_deg[2][0];
        CHECK(n == 300);
        CHECK(std::abs(sum / n - target.mean) < 2.0 * target.sd / std::sqrt(n));
    }

    TEST_CASE("assemble_dataset enforces the dataset invariants") {
        const StudyDataset d = simulate_cohort(small_config(3));
        std::vector<SessionLog> logs;
        for (const auto& s : d.sessions) logs.push_back(s.log);

        auto people = d.participants;
        people[1].id = people[0].id;
        CHECK_THROWS_AS(assemble_dataset(people, logs), ValidationError);

        people = d.participants;
        people[0].moca_total = 31;
        people[1].age = people[1].age_group == AgeGroup::young ? 75 : 25;
        try {
            assemble_dataset(people, logs);
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(e.failures().size() >= 2);
        }

        auto fewer = logs;
        fewer.erase(fewer.begin() + 1);
        CHECK_THROWS_AS(assemble_dataset(d.participants, fewer), ValidationError);
        CHECK_NOTHROW(assemble_dataset(d.participants, logs));
    }

    TEST_CASE("participants csv and dataset directories round-trip") {
        const StudyDataset d = simulate_cohort(small_config(3));
        const std::string text = participants_csv(d);
        CHECK(parse_participants_csv(text) == d.participants);

        const auto dir = std::filesystem::temp_directory_path() / "minispace_dataset_test";
        std::filesystem::remove_all(dir);
        save_dataset(d, dir);
        const StudyDataset back = load_dataset(dir);
        CHECK(dataset_bytes(back) == dataset_bytes(d));
        std::filesystem::remove(dir / "participants.csv");
        CHECK_THROWS_AS(load_dataset(dir), FormatError);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("question selection") {
        AnalysisOptions o;
        CHECK(o.selected() == kQuestions);
        o.questions = {"Q4", "Q1"};
        CHECK(o.selected() == std::vector<std::string>{"Q1", "Q4"});
        CHECK(o.wants("Q1"));
        CHECK_FALSE(o.wants("Q2"));
        o.questions = {"Q9"};
        CHECK_THROWS_AS(o.selected(), DomainError);
    }

    TEST_CASE("supervised questions need supervised participants") {
        const StudyDataset d = simulate_cohort(small_config());
        AnalysisOptions o;
        o.questions = {"Q5"};
        try {
            analyze_study(d, o);
            FAIL("expected an analysis plan error");
        } catch (const AnalysisPlanError& e) {
            CHECK(e.question() == "Q5");
        }
        o.questions = {"Q6"};
        CHECK_THROWS_AS(analyze_study(d, o), AnalysisPlanError);
        o.questions = {"Q1", "Q2", "Q3", "Q3.1", "Q4"};
        const StudyReport r = analyze_study(d, o);
        CHECK(r.q1.has_value());
        CHECK(r.q2.size() == 2);
        CHECK(r.q3.size() == 15);
        CHECK(r.q3_1.size() == 5);
        CHECK(r.q4.has_value());
        CHECK_FALSE(r.q5.has_value());
    }

    TEST_CASE("full report with a supervised study") {
        const StudyDataset d = simulate_cohort(small_with_supervised());
        const StudyReport r = analyze_study(d);
        CHECK(r.n_unsupervised == 36);
        CHECK(r.n_supervised == 40);
        REQUIRE(r.q5.has_value());
        CHECK(r.q5->supervision_by_age.size() == 3);
        CHECK(r.q6.size() == 5);
        CHECK_NOTHROW(r.q5->art.effect("Gender:Supervision:Age Group"));

        const std::string text = report_text(r);
        CHECK(text.find("Panel A") != std::string::npos);
        CHECK(text.find("SPACE error Week 3") != std::string::npos);
        CHECK(text.find("Baseline vs Model 3") != std::string::npos);

        const auto rows = read_table(report_csv(r));
        std::set<std::string> questions;
        for (const auto& row : rows) questions.insert(row.at("question"));
        CHECK(questions == std::set<std::string>(kQuestions.begin(), kQuestions.end()));
    }

    TEST_CASE("reports are deterministic") {
        const CohortConfig c = small_with_supervised();
        const StudyReport a = analyze_study(simulate_cohort(c));
        const StudyReport b = analyze_study(simulate_cohort(c));
        CHECK(report_csv(a) == report_csv(b));
        CHECK(report_text(a) == report_text(b));
    }

    TEST_CASE("report values are reproducible from the intermediate tables") {
        const StudyDataset d = simulate_cohort(small_config(7, 5));
        AnalysisOptions o;
        o.questions = {"Q1", "Q2"};
        const StudyReport r = analyze_study(d, o);

        // ICC from the weekly table.
        std::map<std::string, std::vector<double>> by_person;
        std::vector<std::string> order;
        for (const auto& row : read_table(analysis_table_csv(d, "weekly"))) {
            auto [it, fresh] = by_person.emplace(row.at("participant_id"), std::vector<double>{});
            if (fresh) order.push_back(row.at("participant_id"));
            it->second.push_back(std::stod(row.at("space_error_z")));
        }
        std::vector<std::vector<double>> rows;
        for (const auto& id : order) rows.push_back(by_person.at(id));
        const auto icc = stats::icc_two_way(rows);
        CHECK(icc.icc_single == doctest::Approx(r.q1->icc.icc_single).epsilon(1e-12));
        CHECK(icc.icc_average == doctest::Approx(r.q1->icc.icc_average).epsilon(1e-12));

        // Spearman week 1 vs 2 from the same table.
        std::vector<double> w1, w2;
        for (const auto& row : rows) {
            w1.push_back(row[0]);
            w2.push_back(row[1]);
        }
        CHECK(stats::spearman_rho(w1, w2).statistic ==
              doctest::Approx(r.q1->spearman[0].result.statistic).epsilon(1e-12));

        // Panel A week 3 model from the regression table.
        const auto reg = read_table(analysis_table_csv(d, "regression"));
        std::vector<double> y, age, z;
        std::vector<std::string> gender, education;
        for (const auto& row : reg) {
            y.push_back(std::stod(row.at("moca_total")));
            age.push_back(std::stod(row.at("age")));
            gender.push_back(row.at("gender"));
            education.push_back(row.at("education"));
            z.push_back(std::stod(row.at("space_error_z_week3")));
        }
        const std::vector<std::string> g_levels{"female", "male"}, e_levels{"high_school", "university"};
        stats::DesignBuilder b(y.size());
        b.intercept().numeric("Age", age).treatment("Gender", gender, g_levels).treatment("Education", education, e_levels);
        b.numeric("SPACE error Week 3", z);
        const auto fit = stats::ols_fit(b.build(), y);
        const auto& model = r.q2[0].models[2];
        for (std::size_t i = 0; i < fit.names.size(); ++i) {
            CHECK(fit.names[i] == model.names[i]);
            CHECK(fit.coefficients[i] == doctest::Approx(model.coefficients[i]).epsilon(1e-10));
        }
        CHECK(fit.r2 == doctest::Approx(model.r2).epsilon(1e-10));
        CHECK_THROWS_AS(analysis_table_csv(d, "nope"), DomainError);
    }

    TEST_CASE("recovery records failures instead of throwing") {
        CohortConfig c = small_config(3);
        RecoveryOptions o;
        o.n_reps = 3;
        o.threads = 2;
        o.analysis.questions = {"Q5"};
        const RecoveryReport r = recovery_experiment(c, o);
        CHECK(r.failures.size() == 3);
        CHECK(r.effects.empty());
        CHECK(recovery_csv(r).find("failure,rep 0") != std::string::npos);
    }

    TEST_CASE("recovery is deterministic and independent of thread count") {
        CohortConfig c = small_config(5);
        RecoveryOptions o;
        o.n_reps = 6;
        o.analysis.questions = {"Q1", "Q2", "Q4"};
        o.threads = 1;
        const std::string one = recovery_csv(recovery_experiment(c, o));
        o.threads = 3;
        CHECK(recovery_csv(recovery_experiment(c, o)) == one);
    }

    TEST_CASE("null configs rarely detect and detection grows with n") {
        RecoveryOptions o;
        o.n_reps = 40;
        o.analysis.questions = {"Q1", "Q2", "Q4"};

        const RecoveryReport null_run = recovery_experiment(null_config(small_config(8)), o);
        CHECK(null_run.failures.empty());
        CHECK(null_run.familywise_rates.at("Q2 panel A") <= 0.15);
        CHECK(null_run.effect("q4_age_group").detection_rate <= 0.15);
        CHECK(null_run.effect("q4_gender").detection_rate <= 0.15);

        const RecoveryReport small = recovery_experiment(small_config(5), o);
        const RecoveryReport large = recovery_experiment(small_config(10), o);
        for (const char* name : {"moca_slope_week3", "q4_age_group"}) {
            CAPTURE(name);
            CHECK(large.effect(name).detection_rate + 0.1 >= small.effect(name).detection_rate);
        }
        CHECK(large.effect("moca_slope_week3").planted.value() == doctest::Approx(-1.24));
        CHECK(large.effect("icc_single").bias.has_value());
    }
}
