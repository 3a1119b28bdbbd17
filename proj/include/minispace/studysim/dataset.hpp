#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minispace/metrics.hpp"
#include "minispace/questionnaires.hpp"
#include "minispace/sessionlog.hpp"
#include "minispace/studysim/config.hpp"

namespace minispace::sim {

struct Participant {
    std::string id;
    std::string study;  // cohort name or supervised study name
    Condition condition = Condition::unsupervised;
    int age = 30;
    AgeGroup age_group = AgeGroup::young;
    Gender gender = Gender::female;
    Education education = Education::university;
    int moca_total = 26;

    friend bool operator==(const Participant&, const Participant&) = default;
};

/// One participant-week: the log plus everything derived from it.
struct SessionRecord {
    SessionLog log;
    MetricRecord metrics;  // space_error_z unset; composites are analysis-specific
    std::optional<QuestionnaireScores> scores;
};

struct StudyDataset {
    std::vector<Participant> participants;
    std::vector<SessionRecord> sessions;  // grouped by participant, weeks ascending

    /// Throws DomainError for an unknown id.
    const Participant& participant(const std::string& id) const;
    /// Sessions of one participant in week order.
    std::vector<const SessionRecord*> sessions_of(const std::string& id) const;
};

/// Build a dataset from participants and their logs, computing metrics and
/// questionnaire scores. Enforces the dataset invariants: unique ids, age
/// consistent with age group, MoCA in [0, 30], unsupervised participants
/// with weeks 1-3 and supervised participants with exactly week 1.
/// Throws ValidationError listing every violation.
StudyDataset assemble_dataset(std::vector<Participant> participants, std::vector<SessionLog> logs);

/// The standardized SPACE error of each reference session, keyed by
/// participant id, standardized within each condition. Used by the MoCA
/// model and exposed so tests can reproduce it.
std::vector<std::pair<std::string, double>> reference_space_error(const StudyDataset& data, int reference_week);

/// Simulate a full cohort: demographics, complete session logs for every
/// week, questionnaires and MoCA. Deterministic for a given config.
StudyDataset simulate_cohort(const CohortConfig& config);

/// Latent stability that makes the expected ICC(2,1) of weekly SPACE error
/// equal config.between_person_share (cached per config).
double calibrated_stability(const CohortConfig& config);

std::string participants_csv(const StudyDataset& data);
std::vector<Participant> parse_participants_csv(std::string_view text);

/// Writes participants.csv and sessions.zip into `dir` (created if needed).
void save_dataset(const StudyDataset& data, const std::filesystem::path& dir);
/// Throws FormatError when a file is missing and ValidationError when any
/// session entry fails to parse (every failed entry is listed).
StudyDataset load_dataset(const std::filesystem::path& dir);

}  // namespace minispace::sim
