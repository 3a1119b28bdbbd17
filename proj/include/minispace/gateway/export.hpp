#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "minispace/sessionlog.hpp"

namespace minispace::gateway {

inline constexpr std::string_view kExportSchemaVersion = "1.0";

enum class ExportMode { detailed, quick_summary };

std::string_view to_string(ExportMode mode);
/// Throws DomainError for anything but "detailed" or "quick_summary".
ExportMode parse_mode(std::string_view text);

struct Variable {
    std::string column_name;
    std::string unit;  // empty for identifiers and unitless scores
    std::string description;
    std::string source_op;
};

struct VariableGroup {
    std::string category;  // Player information, Training, Perspective taking, Questionnaires
    std::vector<Variable> variables;
};

struct VariableCatalog {
    ExportMode mode = ExportMode::quick_summary;
    std::vector<VariableGroup> groups;

    /// Column names in catalog order.
    std::vector<std::string> columns() const;
    bool contains(std::string_view column) const;
};

/// The fixed quick-summary column set.
const std::vector<std::string>& quick_summary_columns();

/// Variables derivable from the sessions actually present. space_error_z is
/// offered only when the batch can be standardized (every week needs two
/// sessions with spread in both components). Throws DomainError for an empty
/// batch.
VariableCatalog build_catalog(std::span<const SessionLog> sessions, ExportMode mode);

nlohmann::ordered_json catalog_to_json(const VariableCatalog& catalog);

struct ExportRequest {
    ExportMode mode = ExportMode::quick_summary;
    std::vector<std::string> selected_columns;  // any order; output follows catalog order
};

/// Thrown for columns outside the batch's catalog; lists every offender.
class UnknownColumnsError : public DomainError {
public:
    explicit UnknownColumnsError(std::vector<std::string> columns);
    const std::vector<std::string>& columns() const noexcept { return columns_; }

private:
    std::vector<std::string> columns_;
};

/// RFC 4180 CSV with CRLF records. quick_summary writes one row per session;
/// detailed writes one row per trial with session values repeated. Throws
/// DomainError for an empty selection and UnknownColumnsError.
std::string export_csv(std::span<const SessionLog> sessions, const ExportRequest& request);

/// One uploaded file: a single session log or a zip of logs.
std::vector<IngestResult> ingest_upload(std::string_view name, std::string_view bytes, unsigned threads = 0);

/// Logs of the entries that parsed.
std::vector<SessionLog> ok_logs(const std::vector<IngestResult>& entries);

/// Per-entry status as reported by the service and the parse command.
nlohmann::ordered_json entry_status_json(const IngestResult& entry);

/// {"error": {"kind", "message", "failures"?}} for any exception.
nlohmann::ordered_json error_json(const std::exception& e);

}  // namespace minispace::gateway
