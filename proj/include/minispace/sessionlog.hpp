#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "minispace/error.hpp"
#include "minispace/taskgen.hpp"

namespace minispace {

inline constexpr std::string_view kSchemaVersion = "1.0";
inline constexpr double kNominalSamplingHz = 4.0;
/// Samples may sit this fraction of a period off the nominal grid before a
/// sampling warning is raised.
inline constexpr double kSamplingTolerance = 0.5;

struct Sample {
    double t_s = 0.0;
    double heading_deg = 0.0;
    std::optional<double> x_m;
    std::optional<double> y_m;
    bool touch = false;

    friend bool operator==(const Sample&, const Sample&) = default;
};

enum class TrialKind { rotation, forward, perspective };

std::string_view to_string(TrialKind kind);

struct RotationPayload {
    double target_angle_deg = 0.0;
    friend bool operator==(const RotationPayload&, const RotationPayload&) = default;
};

struct ForwardPayload {
    double target_distance_m = 0.0;
    friend bool operator==(const ForwardPayload&, const ForwardPayload&) = default;
};

struct PerspectivePayload {
    std::string stand_at;
    std::string face;
    std::string point_to;
    double response_deg = 0.0;  // raw pointing response; error is derived downstream
    double rt_s = 0.0;
    friend bool operator==(const PerspectivePayload&, const PerspectivePayload&) = default;
};

struct TrialEvent {
    int index = 0;
    double start_t_s = 0.0;
    double end_t_s = 0.0;
    std::variant<RotationPayload, ForwardPayload, PerspectivePayload> payload;
    std::vector<Sample> samples;

    TrialKind kind() const { return static_cast<TrialKind>(payload.index()); }
    double duration_s() const { return end_t_s - start_t_s; }
    friend bool operator==(const TrialEvent&, const TrialEvent&) = default;
};

struct QuestionnaireResponses {
    std::vector<int> sus;       // 10 items, 1-5
    std::vector<int> nasa_tlx;  // 6 items, 0-100
    std::vector<int> ueq;       // 26 items, 1-7
    friend bool operator==(const QuestionnaireResponses&, const QuestionnaireResponses&) = default;
};

struct SessionLog {
    std::string schema_version{kSchemaVersion};
    std::string participant_id;
    int week = 1;
    std::string started_at;  // ISO-8601, UTC, "Z" suffix
    std::string device;
    double sampling_hz = kNominalSamplingHz;
    std::uint64_t plan_seed = 0;
    LandmarkMap map;
    std::vector<TrialEvent> rotation_trials;
    std::vector<TrialEvent> movement_trials;
    std::vector<TrialEvent> perspective_trials;
    std::optional<QuestionnaireResponses> questionnaires;
    /// Unrecognized top-level keys, kept so they survive a rewrite.
    nlohmann::json extensions = nlohmann::json::object();

    friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

/// Parse and fully validate one log. Throws ParseError (with byte offset),
/// VersionError, or ValidationError listing every failed rule.
SessionLog read_session(std::string_view bytes);

/// Canonical document: fixed key order, numbers rounded to 6 decimal places,
/// newline-terminated. Throws ValidationError for an invalid log.
std::string write_session(const SessionLog& log);

/// Every invariant violation, one message per failed rule; empty when valid.
std::vector<std::string> validate_session(const SessionLog& log);

/// Non-fatal findings such as sample gaps outside the 4 Hz tolerance.
std::vector<std::string> sampling_warnings(const SessionLog& log);

/// The value a number takes after a write/read cycle.
double canonical_number(double value);

/// The log as it reads back after writing; `log` must be valid.
SessionLog canonicalized(const SessionLog& log);

/// Archive entry name for a log: `<participant>_w<week>.json`.
std::string session_entry_name(const SessionLog& log);

struct ErrorRecord {
    std::string kind;
    std::string message;
    std::vector<std::string> failures;
};

struct IngestResult {
    std::string source_name;
    std::variant<SessionLog, ErrorRecord> outcome;

    bool ok() const { return outcome.index() == 0; }
    const SessionLog& log() const { return std::get<SessionLog>(outcome); }
    const ErrorRecord& error() const { return std::get<ErrorRecord>(outcome); }
};

/// Convert any library error to a record; used wherever a batch must not abort.
ErrorRecord to_error_record(const Error& e);

/// Parse every `.json` entry of a zip archive independently, in archive
/// order. Throws FormatError only when the input is not a zip archive.
std::vector<IngestResult> ingest_archive(std::string_view bytes, unsigned threads = 0);

/// Pack logs into a deterministic archive using session_entry_name().
std::string write_session_archive(const std::vector<SessionLog>& logs);

}  // namespace minispace
