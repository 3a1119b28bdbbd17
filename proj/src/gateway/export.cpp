#include "minispace/gateway/export.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>

#include "minispace/angles.hpp"
#include "minispace/csv.hpp"
#include "minispace/metrics.hpp"
#include "minispace/questionnaires.hpp"
#include "minispace/zip.hpp"

namespace minispace::gateway {

namespace {

constexpr const char* kPlayer = "Player information";
constexpr const char* kTraining = "Training";
constexpr const char* kPerspective = "Perspective taking";
constexpr const char* kQuestionnaires = "Questionnaires";

// Session-level values shared by every row of a session.
struct Derived {
    PhaseTimes times;
    std::optional<double> perspective_error;
    std::optional<double> space_error_z;
    std::optional<QuestionnaireScores> scores;
};

struct Row {
    const SessionLog& log;
    const Derived& d;
    const char* task = nullptr;        // detailed rows only
    const TrialEvent* trial = nullptr;  // detailed rows only
};

// What the batch offers; decides which columns the catalog lists.
struct Availability {
    bool training = false;
    bool perspective = false;
    bool composite = false;
    bool questionnaires = false;
};

enum class Needs { always, training, perspective, composite, questionnaires };

using Getter = std::function<std::string(const Row&)>;

struct ColumnDef {
    const char* category;
    Variable variable;
    Needs needs;
    Getter get;
};

std::string num(double v) { return csv::format_number(v); }
std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

const PerspectivePayload* perspective_of(const Row& r) {
    return r.trial ? std::get_if<PerspectivePayload>(&r.trial->payload) : nullptr;
}

std::optional<double> perspective_truth_of(const Row& r) {
    const auto* p = perspective_of(r);
    if (!p) return std::nullopt;
    return perspective_truth(r.log.map, p->stand_at, p->face, p->point_to);
}

std::string score(const Row& r, double QuestionnaireScores::*field) {
    return r.d.scores ? num((*r.d.scores).*field) : std::string();
}

// Columns shared by both modes. Order within a category is catalog order.
const std::vector<ColumnDef>& session_columns() {
    static const std::vector<ColumnDef> defs{
        {kPlayer, {"participant_id", "", "Participant identifier", "read_session"}, Needs::always,
         [](const Row& r) { return r.log.participant_id; }},
        {kPlayer, {"week", "", "Study week (1-3)", "read_session"}, Needs::always,
         [](const Row& r) { return std::to_string(r.log.week); }},
        {kTraining, {"rotation_time_s", "s", "Total duration of the rotation phase", "phase_times"}, Needs::training,
         [](const Row& r) { return num(r.d.times.rotation_time_s); }},
        {kTraining, {"movement_time_s", "s", "Total duration of the movement phase", "phase_times"}, Needs::training,
         [](const Row& r) { return num(r.d.times.movement_time_s); }},
        {kTraining, {"total_training_time_s", "s", "Rotation plus movement time", "phase_times"}, Needs::training,
         [](const Row& r) { return num(r.d.times.total_training_time_s); }},
        {kPerspective, {"perspective_error_deg", "deg", "Mean absolute pointing error over perspective trials",
                        "perspective_error"},
         Needs::perspective, [](const Row& r) { return opt(r.d.perspective_error); }},
        {kPerspective, {"space_error_z", "", "Composite SPACE error, standardized within week over this batch",
                        "composite_space_error"},
         Needs::composite, [](const Row& r) { return opt(r.d.space_error_z); }},
    };
    return defs;
}

const std::vector<ColumnDef>& detailed_columns() {
    static const std::vector<ColumnDef> defs = [] {
        const auto& s = session_columns();
        auto find = [&](const std::string& name) {
            return *std::find_if(s.begin(), s.end(), [&](const ColumnDef& c) { return c.variable.column_name == name; });
        };
        std::vector<ColumnDef> d{
            find("participant_id"),
            find("week"),
            {kPlayer, {"started_at", "", "Session start time (UTC)", "read_session"}, Needs::always,
             [](const Row& r) { return r.log.started_at; }},
            {kPlayer, {"device", "", "Device the session was played on", "read_session"}, Needs::always,
             [](const Row& r) { return r.log.device; }},
            {kPlayer, {"trial_task", "", "Task phase of the trial: rotation, movement or perspective", "read_session"},
             Needs::always, [](const Row& r) { return std::string(r.task); }},
            {kPlayer, {"trial_index", "", "Trial position within its phase", "read_session"}, Needs::always,
             [](const Row& r) { return std::to_string(r.trial->index); }},
            {kPlayer, {"trial_start_s", "s", "Trial start, seconds since session start", "read_session"}, Needs::always,
             [](const Row& r) { return num(r.trial->start_t_s); }},
            {kPlayer, {"trial_duration_s", "s", "Trial duration", "read_session"}, Needs::always,
             [](const Row& r) { return num(r.trial->duration_s()); }},
            {kTraining, {"training_kind", "", "Training step: rotation or forward", "read_session"}, Needs::training,
             [](const Row& r) {
                 if (r.trial->kind() == TrialKind::perspective) return std::string();
                 return std::string(to_string(r.trial->kind()));
             }},
            {kTraining, {"training_target_angle_deg", "deg", "Signed rotation target, clockwise positive", "read_session"},
             Needs::training,
             [](const Row& r) {
                 const auto* p = std::get_if<RotationPayload>(&r.trial->payload);
                 return p ? num(p->target_angle_deg) : std::string();
             }},
            {kTraining, {"training_target_distance_m", "m", "Forward movement target", "read_session"}, Needs::training,
             [](const Row& r) {
                 const auto* p = std::get_if<ForwardPayload>(&r.trial->payload);
                 return p ? num(p->target_distance_m) : std::string();
             }},
            find("rotation_time_s"),
            find("movement_time_s"),
            find("total_training_time_s"),
            {kPerspective, {"perspective_stand_at", "", "Landmark the player imagines standing at", "read_session"},
             Needs::perspective,
             [](const Row& r) {
                 const auto* p = perspective_of(r);
                 return p ? p->stand_at : std::string();
             }},
            {kPerspective, {"perspective_face", "", "Landmark the player imagines facing", "read_session"},
             Needs::perspective,
             [](const Row& r) {
                 const auto* p = perspective_of(r);
                 return p ? p->face : std::string();
             }},
            {kPerspective, {"perspective_point_to", "", "Landmark to point at", "read_session"}, Needs::perspective,
             [](const Row& r) {
                 const auto* p = perspective_of(r);
                 return p ? p->point_to : std::string();
             }},
            {kPerspective, {"perspective_response_deg", "deg", "Pointing response, clockwise from ahead", "read_session"},
             Needs::perspective,
             [](const Row& r) {
                 const auto* p = perspective_of(r);
                 return p ? num(p->response_deg) : std::string();
             }},
            {kPerspective, {"perspective_truth_deg", "deg", "Correct egocentric bearing", "perspective_truth"},
             Needs::perspective, [](const Row& r) { return opt(perspective_truth_of(r)); }},
            {kPerspective, {"perspective_trial_error_deg", "deg", "Absolute angular error of this trial",
                            "angular_deviation"},
             Needs::perspective,
             [](const Row& r) {
                 const auto truth = perspective_truth_of(r);
                 return truth ? num(angular_deviation(perspective_of(r)->response_deg, *truth)) : std::string();
             }},
            {kPerspective, {"perspective_rt_s", "s", "Response time of this trial", "read_session"}, Needs::perspective,
             [](const Row& r) {
                 const auto* p = perspective_of(r);
                 return p ? num(p->rt_s) : std::string();
             }},
            find("perspective_error_deg"),
            find("space_error_z"),
            {kQuestionnaires, {"sus", "", "System Usability Scale score (0-100)", "score_sus"}, Needs::questionnaires,
             [](const Row& r) { return score(r, &QuestionnaireScores::sus); }},
            {kQuestionnaires, {"nasa_tlx", "", "Raw NASA-TLX workload (0-100)", "score_nasa_tlx"}, Needs::questionnaires,
             [](const Row& r) { return score(r, &QuestionnaireScores::nasa_tlx); }},
            {kQuestionnaires, {"ueq_attractiveness", "", "UEQ attractiveness (-3 to 3)", "score_ueq"},
             Needs::questionnaires, [](const Row& r) { return score(r, &QuestionnaireScores::ueq_attractiveness); }},
            {kQuestionnaires, {"ueq_pragmatic", "", "UEQ pragmatic quality (-3 to 3)", "score_ueq"}, Needs::questionnaires,
             [](const Row& r) { return score(r, &QuestionnaireScores::ueq_pragmatic); }},
            {kQuestionnaires, {"ueq_hedonic", "", "UEQ hedonic quality (-3 to 3)", "score_ueq"}, Needs::questionnaires,
             [](const Row& r) { return score(r, &QuestionnaireScores::ueq_hedonic); }},
        };
        return d;
    }();
    return defs;
}

const std::vector<ColumnDef>& defs_for(ExportMode mode) {
    return mode == ExportMode::quick_summary ? session_columns() : detailed_columns();
}

struct Prepared {
    Availability available;
    std::vector<Derived> derived;
};

Prepared prepare(std::span<const SessionLog> sessions) {
    if (sessions.empty()) throw DomainError("the batch has no readable sessions");
    Prepared out;
    out.derived.resize(sessions.size());
    bool all_perspective = true;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        const auto& log = sessions[i];
        auto& d = out.derived[i];
        d.times = phase_times(log);
        if (!log.rotation_trials.empty() || !log.movement_trials.empty()) out.available.training = true;
        if (log.perspective_trials.empty()) {
            all_perspective = false;
        } else {
            out.available.perspective = true;
            d.perspective_error = perspective_error(log);
        }
        if (log.questionnaires) {
            out.available.questionnaires = true;
            d.scores = score_questionnaires(*log.questionnaires);
        }
    }
    if (all_perspective) {
        std::vector<MetricRecord> records;
        records.reserve(sessions.size());
        for (std::size_t i = 0; i < sessions.size(); ++i) {
            MetricRecord m;
            m.participant_id = sessions[i].participant_id;
            m.week = sessions[i].week;
            m.rotation_time_s = out.derived[i].times.rotation_time_s;
            m.movement_time_s = out.derived[i].times.movement_time_s;
            m.total_training_time_s = out.derived[i].times.total_training_time_s;
            m.perspective_error_deg = *out.derived[i].perspective_error;
            records.push_back(std::move(m));
        }
        try {
            const auto z = composite_space_error(records);
            for (std::size_t i = 0; i < z.size(); ++i) out.derived[i].space_error_z = z[i].space_error_z;
            out.available.composite = true;
        } catch (const StandardizationError&) {
            // too few sessions or no spread in some week: the column is not offered
        }
    }
    return out;
}

bool offered(const ColumnDef& c, const Availability& a) {
    switch (c.needs) {
        case Needs::always: return true;
        case Needs::training: return a.training;
        case Needs::perspective: return a.perspective;
        case Needs::composite: return a.composite;
        case Needs::questionnaires: return a.questionnaires;
    }
    return false;
}

VariableCatalog catalog_from(const Availability& a, ExportMode mode) {
    VariableCatalog cat;
    cat.mode = mode;
    for (const char* category : {kPlayer, kTraining, kPerspective, kQuestionnaires}) {
        VariableGroup g{category, {}};
        for (const auto& c : defs_for(mode)) {
            if (c.category == std::string_view(category) && offered(c, a)) g.variables.push_back(c.variable);
        }
        if (!g.variables.empty()) cat.groups.push_back(std::move(g));
    }
    return cat;
}

}  // namespace

std::string_view to_string(ExportMode mode) {
    return mode == ExportMode::detailed ? "detailed" : "quick_summary";
}

ExportMode parse_mode(std::string_view text) {
    if (text == "detailed") return ExportMode::detailed;
    if (text == "quick_summary") return ExportMode::quick_summary;
    throw DomainError("unknown export mode '" + std::string(text) + "' (expected detailed or quick_summary)");
}

std::vector<std::string> VariableCatalog::columns() const {
    std::vector<std::string> out;
    for (const auto& g : groups) {
        for (const auto& v : g.variables) out.push_back(v.column_name);
    }
    return out;
}

bool VariableCatalog::contains(std::string_view column) const {
    for (const auto& g : groups) {
        for (const auto& v : g.variables) {
            if (v.column_name == column) return true;
        }
    }
    return false;
}

const std::vector<std::string>& quick_summary_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> out;
        for (const auto& c : session_columns()) out.push_back(c.variable.column_name);
        return out;
    }();
    return cols;
}

VariableCatalog build_catalog(std::span<const SessionLog> sessions, ExportMode mode) {
    return catalog_from(prepare(sessions).available, mode);
}

nlohmann::ordered_json catalog_to_json(const VariableCatalog& catalog) {
    nlohmann::ordered_json doc;
    doc["export_schema"] = kExportSchemaVersion;
    doc["mode"] = to_string(catalog.mode);
    doc["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : catalog.groups) {
        nlohmann::ordered_json group;
        group["category"] = g.category;
        group["variables"] = nlohmann::ordered_json::array();
        for (const auto& v : g.variables) {
            group["variables"].push_back(
                {{"column_name", v.column_name}, {"unit", v.unit}, {"description", v.description}, {"source_op", v.source_op}});
        }
        doc["groups"].push_back(std::move(group));
    }
    return doc;
}

UnknownColumnsError::UnknownColumnsError(std::vector<std::string> columns)
    : DomainError([&] {
          std::string msg = "unknown column(s) for this batch:";
          for (const auto& c : columns) msg += " " + c;
          return msg;
      }()),
      columns_(std::move(columns)) {}

std::string export_csv(std::span<const SessionLog> sessions, const ExportRequest& request) {
    if (request.selected_columns.empty()) throw DomainError("no columns selected");
    const Prepared prep = prepare(sessions);
    const VariableCatalog cat = catalog_from(prep.available, request.mode);

    std::vector<std::string> unknown;
    for (const auto& c : request.selected_columns) {
        if (!cat.contains(c) && std::find(unknown.begin(), unknown.end(), c) == unknown.end()) unknown.push_back(c);
    }
    if (!unknown.empty()) throw UnknownColumnsError(std::move(unknown));

    const std::set<std::string> wanted(request.selected_columns.begin(), request.selected_columns.end());
    std::vector<const ColumnDef*> cols;
    std::vector<std::string> header;
    for (const auto& name : cat.columns()) {
        if (!wanted.count(name)) continue;
        for (const auto& c : defs_for(request.mode)) {
            if (c.variable.column_name == name) cols.push_back(&c);
        }
        header.push_back(name);
    }

    std::string out;
    out.reserve(64 * sessions.size() * (request.mode == ExportMode::detailed ? 40 : 1));
    csv::append_row(out, header);
    std::vector<std::string> fields(cols.size());
    auto emit = [&](const Row& row) {
        for (std::size_t j = 0; j < cols.size(); ++j) fields[j] = cols[j]->get(row);
        csv::append_row(out, fields);
    };
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        const auto& log = sessions[i];
        if (request.mode == ExportMode::quick_summary) {
            emit(Row{log, prep.derived[i]});
            continue;
        }
        for (const auto& [task, trials] : {std::pair{"rotation", &log.rotation_trials},
                                           std::pair{"movement", &log.movement_trials},
                                           std::pair{"perspective", &log.perspective_trials}}) {
            for (const auto& t : *trials) emit(Row{log, prep.derived[i], task, &t});
        }
    }
    return out;
}

std::vector<IngestResult> ingest_upload(std::string_view name, std::string_view bytes, unsigned threads) {
    if (zip::looks_like_archive(bytes)) return ingest_archive(bytes, threads);
    IngestResult r;
    r.source_name = std::string(name);
    try {
        r.outcome = read_session(bytes);
    } catch (const Error& e) {
        r.outcome = to_error_record(e);
    }
    return {std::move(r)};
}

std::vector<SessionLog> ok_logs(const std::vector<IngestResult>& entries) {
    std::vector<SessionLog> out;
    for (const auto& e : entries) {
        if (e.ok()) out.push_back(e.log());
    }
    return out;
}

nlohmann::ordered_json entry_status_json(const IngestResult& entry) {
    nlohmann::ordered_json j;
    j["name"] = entry.source_name;
    if (entry.ok()) {
        j["status"] = "ok";
        j["participant_id"] = entry.log().participant_id;
        j["week"] = entry.log().week;
    } else {
        const auto& e = entry.error();
        j["status"] = "error";
        j["error"] = {{"kind", e.kind}, {"message", e.message}, {"failures", e.failures}};
    }
    return j;
}

nlohmann::ordered_json error_json(const std::exception& e) {
    nlohmann::ordered_json err;
    const auto* lib = dynamic_cast<const Error*>(&e);
    err["kind"] = lib ? lib->kind() : std::string("internal");
    err["message"] = e.what();
    if (const auto* v = dynamic_cast<const ValidationError*>(&e)) err["failures"] = v->failures();
    if (const auto* u = dynamic_cast<const UnknownColumnsError*>(&e)) err["unknown_columns"] = u->columns();
    if (const auto* a = dynamic_cast<const AnalysisPlanError*>(&e)) err["question"] = a->question();
    return {{"error", err}};
}

}  // namespace minispace::gateway
