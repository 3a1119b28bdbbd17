#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "minispace/stats/art.hpp"
#include "minispace/stats/icc.hpp"
#include "minispace/stats/regression.hpp"
#include "minispace/stats/result.hpp"
#include "minispace/studysim/dataset.hpp"

namespace minispace::sim {

/// Research questions of the analysis plan, in report order.
inline const std::vector<std::string> kQuestions{"Q1", "Q2", "Q3", "Q3.1", "Q4", "Q5", "Q6"};

struct AnalysisOptions {
    std::set<std::string> questions;  // empty runs every question
    double alpha = 0.05;

    /// Every question when `questions` is empty. Throws DomainError for unknown names.
    std::vector<std::string> selected() const;
    bool wants(const std::string& question) const;
};

struct NamedResult {
    std::string label;
    stats::StatResult result;
    double p_adjusted = 1.0;
};

/// One regression panel: a demographic baseline plus one model per week.
struct RegressionPanel {
    std::string name;                    // "A" or "B"
    stats::OlsFit baseline;
    std::vector<stats::OlsFit> models;    // weeks 1-3
    std::vector<NamedResult> comparisons; // baseline vs each model, Holm-adjusted
};

struct BenchmarkTest {
    std::string measure;
    int week = 1;
    double benchmark = 0.0;
    stats::StatResult result;
    double p_adjusted = 1.0;  // Holm across weeks for this measure
};

struct Q1Result {
    std::vector<NamedResult> spearman;  // weeks 1-2, 2-3, 1-3; Holm across the three
    stats::IccResult icc;
    stats::ArtResult week_art;  // one-way within ART on the pooled composite
};

struct Q5Result {
    stats::ArtResult art;
    std::vector<NamedResult> supervision_by_age;  // simple effects, Holm across age groups
};

struct StudyReport {
    std::string analysis_version;
    std::size_t n_unsupervised = 0;
    std::size_t n_supervised = 0;
    std::optional<Q1Result> q1;
    std::vector<RegressionPanel> q2;
    std::vector<BenchmarkTest> q3;
    std::map<std::string, stats::ArtResult> q3_1;  // by questionnaire measure
    std::optional<stats::ArtResult> q4;
    std::optional<Q5Result> q5;
    std::map<std::string, stats::ArtResult> q6;
};

/// Questionnaire measures in report order: sus, nasa_tlx, ueq_attractiveness,
/// ueq_pragmatic, ueq_hedonic.
const std::vector<std::string>& questionnaire_measures();
double measure_value(const QuestionnaireScores& s, const std::string& measure);

/// Runs the requested questions. Throws AnalysisPlanError naming the first
/// question whose factors or levels are missing from the dataset.
StudyReport analyze_study(const StudyDataset& data, const AnalysisOptions& options = {});

/// Flat report table. Columns: question, analysis, term, method, estimate,
/// std_error, statistic, df1, df2, p_value, p_adjusted, effect_kind,
/// effect_value, notes.
std::string report_csv(const StudyReport& report);

/// Plain-text summary; regression panels list baseline and week models side by side.
std::string report_text(const StudyReport& report);

/// Names of the intermediate tables the report is computed from.
const std::vector<std::string>& analysis_tables();

/// One intermediate table as CSV. Throws DomainError for an unknown name.
///   weekly         unsupervised participant-weeks, composite standardized within week
///   pooled         unsupervised participant-weeks, composite standardized over all weeks
///   regression     one row per unsupervised participant with MoCA and weekly predictors
///   questionnaires participant-weeks with scores, both conditions
///   supervision    week-1 sessions of both conditions, composite standardized together
std::string analysis_table_csv(const StudyDataset& data, const std::string& table);

// ---------------------------------------------------------------------------
// Effect recovery

struct RecoveryOptions {
    int n_reps = 100;
    unsigned threads = 0;  // 0: hardware concurrency
    AnalysisOptions analysis;
};

struct EffectRecovery {
    std::string effect;
    std::optional<double> planted;  // unset when only the direction is planted
    int n = 0;                      // successful repetitions
    double detection_rate = 0.0;    // share with (adjusted) p < alpha
    double mean_estimate = 0.0;
    double sd_estimate = 0.0;
    double min_estimate = 0.0;
    double max_estimate = 0.0;
    std::optional<double> bias;
};

struct RecoveryReport {
    std::uint64_t seed = 0;
    int n_reps = 0;
    double alpha = 0.05;
    std::vector<EffectRecovery> effects;
    std::map<std::string, double> ordering_rates;     // sample orderings matching the planted ones
    std::map<std::string, double> familywise_rates;   // any adjusted p < alpha within the family
    std::vector<std::pair<int, std::string>> failures;  // repetition index and error

    const EffectRecovery& effect(const std::string& name) const;
};

/// Repeats simulate -> analyze with seeds derived from (config.seed, rep).
/// Repetitions run in parallel; failures are recorded, not thrown.
RecoveryReport recovery_experiment(const CohortConfig& config, const RecoveryOptions& options);

std::string recovery_csv(const RecoveryReport& report);

}  // namespace minispace::sim
