#include "minispace/sessionlog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <regex>
#include <set>
#include <thread>

#include "minispace/zip.hpp"

namespace minispace {

namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

const std::set<std::string, std::less<>> kTopLevelKeys{
    "schema_version", "participant_id", "week", "started_at", "device", "sampling_hz", "plan_seed",
    "map", "rotation_trials", "movement_trials", "perspective_trials", "questionnaires"};

// Pulls typed fields out of a JSON object, recording a failure for each
// missing or mistyped field instead of throwing.
class FieldReader {
public:
    FieldReader(const json& obj, std::string path, std::vector<std::string>& failures)
        : obj_(obj), path_(std::move(path)), failures_(failures) {}

    bool is_object() const { return obj_.is_object(); }

    const json* find(std::string_view key, bool required = true) const {
        if (!obj_.is_object()) return nullptr;
        auto it = obj_.find(key);
        if (it == obj_.end()) {
            if (required) failures_.push_back(where(key) + ": required field missing");
            return nullptr;
        }
        return &*it;
    }

    std::optional<std::string> string(std::string_view key) const {
        const json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            failures_.push_back(where(key) + ": expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<double> number(std::string_view key, bool required = true) const {
        const json* v = find(key, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            failures_.push_back(where(key) + ": expected a number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    std::optional<long long> integer(std::string_view key) const {
        const json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_number_integer()) {
            failures_.push_back(where(key) + ": expected an integer");
            return std::nullopt;
        }
        if (v->is_number_unsigned() && v->get<std::uint64_t>() > static_cast<std::uint64_t>(INT32_MAX)) {
            failures_.push_back(where(key) + ": integer out of range");
            return std::nullopt;
        }
        return v->get<long long>();
    }

    std::optional<std::uint64_t> unsigned64(std::string_view key) const {
        const json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_number_unsigned()) {
            failures_.push_back(where(key) + ": expected a non-negative integer");
            return std::nullopt;
        }
        return v->get<std::uint64_t>();
    }

    std::optional<bool> boolean(std::string_view key) const {
        const json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_boolean()) {
            failures_.push_back(where(key) + ": expected a boolean");
            return std::nullopt;
        }
        return v->get<bool>();
    }

    const json* array(std::string_view key, bool required = true) const {
        const json* v = find(key, required);
        if (!v) return nullptr;
        if (!v->is_array()) {
            failures_.push_back(where(key) + ": expected an array");
            return nullptr;
        }
        return v;
    }

    std::string where(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

private:
    const json& obj_;
    std::string path_;
    std::vector<std::string>& failures_;
};

std::string indexed(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void read_map(const json& doc, LandmarkMap& map, std::vector<std::string>& failures) {
    if (!doc.is_object()) {
        failures.push_back("map: expected an object");
        return;
    }
    FieldReader r(doc, "map", failures);
    map.map_id = r.string("map_id").value_or("");
    const json* lms = r.array("landmarks");
    if (!lms) return;
    for (std::size_t i = 0; i < lms->size(); ++i) {
        const auto path = indexed("map.landmarks", i);
        const json& item = (*lms)[i];
        if (!item.is_object()) {
            failures.push_back(path + ": expected an object");
            continue;
        }
        FieldReader lr(item, path, failures);
        Landmark lm;
        lm.id = lr.string("id").value_or("");
        lm.name = lr.string("name").value_or("");
        lm.x_m = lr.number("x_m").value_or(0.0);
        lm.y_m = lr.number("y_m").value_or(0.0);
        map.landmarks.push_back(std::move(lm));
    }
}

std::optional<TrialKind> kind_from(std::string_view s) {
    if (s == "rotation") return TrialKind::rotation;
    if (s == "forward") return TrialKind::forward;
    if (s == "perspective") return TrialKind::perspective;
    return std::nullopt;
}

void read_trials(const json* arr, const std::string& path, std::vector<TrialEvent>& out,
                 std::vector<std::string>& failures) {
    if (!arr) return;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const auto tpath = indexed(path, i);
        const json& item = (*arr)[i];
        if (!item.is_object()) {
            failures.push_back(tpath + ": expected an object");
            continue;
        }
        FieldReader r(item, tpath, failures);
        TrialEvent ev;
        ev.index = static_cast<int>(r.integer("index").value_or(-1));
        ev.start_t_s = r.number("start_t_s").value_or(0.0);
        ev.end_t_s = r.number("end_t_s").value_or(0.0);
        const auto kind_name = r.string("kind");
        const auto kind = kind_name ? kind_from(*kind_name) : std::nullopt;
        if (kind_name && !kind) failures.push_back(tpath + ".kind: unknown trial kind '" + *kind_name + "'");
        if (kind == TrialKind::rotation) {
            ev.payload = RotationPayload{r.number("target_angle_deg").value_or(0.0)};
        } else if (kind == TrialKind::forward) {
            ev.payload = ForwardPayload{r.number("target_distance_m").value_or(0.0)};
        } else if (kind == TrialKind::perspective) {
            PerspectivePayload p;
            p.stand_at = r.string("stand_at").value_or("");
            p.face = r.string("face").value_or("");
            p.point_to = r.string("point_to").value_or("");
            p.response_deg = r.number("response_deg").value_or(0.0);
            p.rt_s = r.number("rt_s").value_or(0.0);
            ev.payload = std::move(p);
        }
        if (const json* samples = r.array("samples")) {
            ev.samples.reserve(samples->size());
            for (std::size_t k = 0; k < samples->size(); ++k) {
                const auto spath = indexed(tpath + ".samples", k);
                const json& sj = (*samples)[k];
                if (!sj.is_object()) {
                    failures.push_back(spath + ": expected an object");
                    continue;
                }
                FieldReader sr(sj, spath, failures);
                Sample s;
                s.t_s = sr.number("t_s").value_or(0.0);
                s.heading_deg = sr.number("heading_deg").value_or(0.0);
                s.x_m = sr.number("x_m", false);
                s.y_m = sr.number("y_m", false);
                s.touch = sr.boolean("touch").value_or(false);
                ev.samples.push_back(s);
            }
        }
        out.push_back(std::move(ev));
    }
}

std::vector<int> read_int_items(const json* arr, const std::string& path, std::vector<std::string>& failures) {
    std::vector<int> items;
    if (!arr) return items;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const json& v = (*arr)[i];
        if (!v.is_number_integer() || v.get<long long>() < INT32_MIN || v.get<long long>() > INT32_MAX) {
            failures.push_back(indexed(path, i) + ": expected an integer");
            continue;
        }
        items.push_back(static_cast<int>(v.get<long long>()));
    }
    return items;
}

bool valid_timestamp(const std::string& s) {
    static const std::regex pattern(R"(^(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2}):(\d{2})(\.\d{1,9})?Z$)");
    std::smatch m;
    if (!std::regex_match(s, m, pattern)) return false;
    const int year = std::stoi(m[1]);
    const int month = std::stoi(m[2]);
    const int day = std::stoi(m[3]);
    if (month < 1 || month > 12 || day < 1) return false;
    static constexpr int kDays[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    if (day > kDays[month - 1] || (month == 2 && day == 29 && !leap)) return false;
    return std::stoi(m[4]) < 24 && std::stoi(m[5]) < 60 && std::stoi(m[6]) < 61;
}

bool finite(double v) { return std::isfinite(v); }

void validate_trial_list(const SessionLog& log, const std::vector<TrialEvent>& trials, const std::string& name,
                         std::initializer_list<TrialKind> allowed, std::vector<std::string>& failures) {
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const TrialEvent& t = trials[i];
        const auto path = indexed(name, i);
        if (t.index != static_cast<int>(i)) {
            failures.push_back(path + ".index: trial index must equal its position (" + std::to_string(i) + ")");
        }
        if (std::find(allowed.begin(), allowed.end(), t.kind()) == allowed.end()) {
            failures.push_back(path + ".kind: '" + std::string(to_string(t.kind())) + "' trials are not allowed in " + name);
        }
        if (!finite(t.start_t_s) || !finite(t.end_t_s)) {
            failures.push_back(path + ": start_t_s/end_t_s must be finite");
        } else {
            if (t.start_t_s < 0.0) failures.push_back(path + ".start_t_s: must be non-negative");
            if (t.end_t_s < t.start_t_s) failures.push_back(path + ".end_t_s: end_t_s must be >= start_t_s");
        }
        double last_t = -1.0;
        for (std::size_t k = 0; k < t.samples.size(); ++k) {
            const Sample& s = t.samples[k];
            const auto spath = indexed(path + ".samples", k);
            if (!finite(s.t_s) || s.t_s < 0.0) {
                failures.push_back(spath + ".t_s: must be finite and non-negative");
            } else {
                if (s.t_s < last_t) failures.push_back(spath + ".t_s: sample times must be non-decreasing");
                last_t = s.t_s;
            }
            if (!finite(s.heading_deg) || s.heading_deg < 0.0 || s.heading_deg >= 360.0) {
                failures.push_back(spath + ".heading_deg: must lie in [0, 360)");
            }
            if ((s.x_m && !finite(*s.x_m)) || (s.y_m && !finite(*s.y_m))) {
                failures.push_back(spath + ": position must be finite");
            }
        }
        if (const auto* rot = std::get_if<RotationPayload>(&t.payload)) {
            if (!finite(rot->target_angle_deg)) failures.push_back(path + ".target_angle_deg: must be finite");
        } else if (const auto* fwd = std::get_if<ForwardPayload>(&t.payload)) {
            if (!finite(fwd->target_distance_m) || fwd->target_distance_m <= 0.0) {
                failures.push_back(path + ".target_distance_m: must be a positive distance");
            }
        } else if (const auto* p = std::get_if<PerspectivePayload>(&t.payload)) {
            for (const auto* id : {&p->stand_at, &p->face, &p->point_to}) {
                if (!log.map.contains(*id)) {
                    failures.push_back(path + ": landmark '" + *id + "' is not in the map");
                }
            }
            if (p->stand_at == p->face || p->stand_at == p->point_to || p->face == p->point_to) {
                failures.push_back(path + ": stand_at, face and point_to must be distinct");
            }
            if (!finite(p->response_deg) || p->response_deg < 0.0 || p->response_deg >= 360.0) {
                failures.push_back(path + ".response_deg: must lie in [0, 360)");
            }
            if (!finite(p->rt_s) || p->rt_s < 0.0) failures.push_back(path + ".rt_s: must be finite and non-negative");
        }
    }
}

void check_items(const std::vector<int>& items, std::size_t count, int lo, int hi, const std::string& name,
                 std::vector<std::string>& failures) {
    if (items.size() != count) {
        failures.push_back("questionnaires." + name + ": expected " + std::to_string(count) + " items, found " +
                           std::to_string(items.size()));
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i] < lo || items[i] > hi) {
            failures.push_back(indexed("questionnaires." + name, i) + ": must lie in [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "]");
        }
    }
}

ordered number_json(double v) { return ordered(canonical_number(v)); }

ordered trial_json(const TrialEvent& t) {
    ordered j;
    j["index"] = t.index;
    j["kind"] = std::string(to_string(t.kind()));
    j["start_t_s"] = number_json(t.start_t_s);
    j["end_t_s"] = number_json(t.end_t_s);
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, RotationPayload>) {
                j["target_angle_deg"] = number_json(p.target_angle_deg);
            } else if constexpr (std::is_same_v<P, ForwardPayload>) {
                j["target_distance_m"] = number_json(p.target_distance_m);
            } else {
                j["stand_at"] = p.stand_at;
                j["face"] = p.face;
                j["point_to"] = p.point_to;
                j["response_deg"] = number_json(p.response_deg);
                j["rt_s"] = number_json(p.rt_s);
            }
        },
        t.payload);
    auto& samples = j["samples"] = ordered::array();
    for (const auto& s : t.samples) {
        ordered sj;
        sj["t_s"] = number_json(s.t_s);
        sj["heading_deg"] = number_json(s.heading_deg);
        if (s.x_m) sj["x_m"] = number_json(*s.x_m);
        if (s.y_m) sj["y_m"] = number_json(*s.y_m);
        sj["touch"] = s.touch;
        samples.push_back(std::move(sj));
    }
    return j;
}

ordered canonical_map_json(const LandmarkMap& map) {
    ordered j = map_to_json(map);
    for (auto& lm : j["landmarks"]) {
        lm["x_m"] = number_json(lm["x_m"].get<double>());
        lm["y_m"] = number_json(lm["y_m"].get<double>());
    }
    return j;
}

}  // namespace

std::string_view to_string(TrialKind kind) {
    switch (kind) {
        case TrialKind::rotation: return "rotation";
        case TrialKind::forward: return "forward";
        case TrialKind::perspective: return "perspective";
    }
    return "unknown";
}

SessionLog canonicalized(const SessionLog& log) { return read_session(write_session(log)); }

double canonical_number(double value) {
    if (!std::isfinite(value)) return value;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    double out = std::strtod(buf, nullptr);
    return out == 0.0 ? 0.0 : out;
}

std::vector<std::string> validate_session(const SessionLog& log) {
    std::vector<std::string> failures;
    if (log.schema_version != kSchemaVersion) {
        failures.push_back("schema_version: unsupported version '" + log.schema_version + "'");
    }
    if (log.participant_id.empty()) failures.push_back("participant_id: must be non-empty");
    const bool week_ok = log.week >= 1 && log.week <= 3;
    if (!week_ok) failures.push_back("week: must be 1, 2 or 3");
    if (!valid_timestamp(log.started_at)) failures.push_back("started_at: must be an ISO-8601 UTC timestamp ending in Z");
    if (!finite(log.sampling_hz) || log.sampling_hz <= 0.0) failures.push_back("sampling_hz: must be positive");

    validate_map(log.map, failures);
    if (week_ok && static_cast<int>(log.map.landmarks.size()) != landmark_count_for_week(log.week)) {
        failures.push_back("map.landmark_count: week " + std::to_string(log.week) + " requires " +
                           std::to_string(landmark_count_for_week(log.week)) + " landmarks, found " +
                           std::to_string(log.map.landmarks.size()));
    }

    validate_trial_list(log, log.rotation_trials, "rotation_trials", {TrialKind::rotation}, failures);
    validate_trial_list(log, log.movement_trials, "movement_trials", {TrialKind::forward, TrialKind::rotation}, failures);
    validate_trial_list(log, log.perspective_trials, "perspective_trials", {TrialKind::perspective}, failures);
    // An empty list means the perspective task was not played; a partial one is an error.
    if (week_ok && !log.perspective_trials.empty() &&
        static_cast<int>(log.perspective_trials.size()) != perspective_trial_count_for_week(log.week)) {
        failures.push_back("perspective_trials.count: week " + std::to_string(log.week) + " requires " +
                           std::to_string(perspective_trial_count_for_week(log.week)) + " perspective trials, found " +
                           std::to_string(log.perspective_trials.size()));
    }

    if (log.questionnaires) {
        check_items(log.questionnaires->sus, 10, 1, 5, "sus", failures);
        check_items(log.questionnaires->nasa_tlx, 6, 0, 100, "nasa_tlx", failures);
        check_items(log.questionnaires->ueq, 26, 1, 7, "ueq", failures);
    }
    if (!log.extensions.is_object()) failures.push_back("extensions: must be an object");
    return failures;
}

SessionLog read_session(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw ParseError("malformed session log: " + std::string(e.what()), e.byte);
    }
    if (!doc.is_object()) throw ValidationError({"document: top level must be an object"});

    std::vector<std::string> failures;
    FieldReader r(doc, "", failures);
    SessionLog log;

    if (const auto version = r.string("schema_version")) {
        if (*version != kSchemaVersion) {
            throw VersionError("unsupported schema_version '" + *version + "' (expected " + std::string(kSchemaVersion) + ")");
        }
    }
    log.participant_id = r.string("participant_id").value_or("?");
    log.week = static_cast<int>(r.integer("week").value_or(1));
    log.started_at = r.string("started_at").value_or("1970-01-01T00:00:00Z");
    log.device = r.string("device").value_or("");
    log.sampling_hz = r.number("sampling_hz").value_or(kNominalSamplingHz);
    log.plan_seed = r.unsigned64("plan_seed").value_or(0);
    if (const json* map = r.find("map")) read_map(*map, log.map, failures);
    read_trials(r.array("rotation_trials"), "rotation_trials", log.rotation_trials, failures);
    read_trials(r.array("movement_trials"), "movement_trials", log.movement_trials, failures);
    read_trials(r.array("perspective_trials"), "perspective_trials", log.perspective_trials, failures);
    if (const json* q = r.find("questionnaires", false); q && !q->is_null()) {
        if (!q->is_object()) {
            failures.push_back("questionnaires: expected an object");
        } else {
            FieldReader qr(*q, "questionnaires", failures);
            QuestionnaireResponses resp;
            resp.sus = read_int_items(qr.array("sus"), "questionnaires.sus", failures);
            resp.nasa_tlx = read_int_items(qr.array("nasa_tlx"), "questionnaires.nasa_tlx", failures);
            resp.ueq = read_int_items(qr.array("ueq"), "questionnaires.ueq", failures);
            log.questionnaires = std::move(resp);
        }
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!kTopLevelKeys.contains(it.key())) log.extensions[it.key()] = it.value();
    }

    // Semantic rules run on whatever could be extracted; a path already
    // reported as missing or mistyped is not reported twice.
    std::set<std::string> reported;
    for (const auto& f : failures) reported.insert(f.substr(0, f.find(':')));
    for (auto& f : validate_session(log)) {
        if (!reported.contains(f.substr(0, f.find(':')))) failures.push_back(std::move(f));
    }
    if (!failures.empty()) throw ValidationError(std::move(failures));
    return log;
}

std::string write_session(const SessionLog& log) {
    if (auto failures = validate_session(log); !failures.empty()) throw ValidationError(std::move(failures));

    ordered doc;
    doc["schema_version"] = log.schema_version;
    doc["participant_id"] = log.participant_id;
    doc["week"] = log.week;
    doc["started_at"] = log.started_at;
    doc["device"] = log.device;
    doc["sampling_hz"] = number_json(log.sampling_hz);
    doc["plan_seed"] = log.plan_seed;
    doc["map"] = canonical_map_json(log.map);
    for (const auto* name : {"rotation_trials", "movement_trials", "perspective_trials"}) {
        const auto& list = std::string_view(name) == "rotation_trials"   ? log.rotation_trials
                           : std::string_view(name) == "movement_trials" ? log.movement_trials
                                                                         : log.perspective_trials;
        auto& arr = doc[name] = ordered::array();
        for (const auto& t : list) arr.push_back(trial_json(t));
    }
    if (log.questionnaires) {
        ordered q;
        q["sus"] = log.questionnaires->sus;
        q["nasa_tlx"] = log.questionnaires->nasa_tlx;
        q["ueq"] = log.questionnaires->ueq;
        doc["questionnaires"] = std::move(q);
    }
    // json::object iterates keys in sorted order, so extensions are emitted deterministically
    for (auto it = log.extensions.begin(); it != log.extensions.end(); ++it) doc[it.key()] = it.value();

    // One line per top-level key and one line per trial.
    std::string out = "{\n";
    std::size_t n = 0;
    for (auto it = doc.begin(); it != doc.end(); ++it, ++n) {
        out += "  ";
        out += ordered(it.key()).dump();
        out += ": ";
        const auto& v = it.value();
        if (v.is_array() && !v.empty() && v.front().is_object()) {
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                out += "    ";
                out += v[i].dump();
                out += i + 1 < v.size() ? ",\n" : "\n";
            }
            out += "  ]";
        } else {
            out += v.dump();
        }
        out += n + 1 < doc.size() ? ",\n" : "\n";
    }
    out += "}\n";
    return out;
}

std::vector<std::string> sampling_warnings(const SessionLog& log) {
    std::vector<std::string> warnings;
    if (!(log.sampling_hz > 0.0)) return warnings;
    const double period = 1.0 / log.sampling_hz;
    auto scan = [&](const std::vector<TrialEvent>& trials, const char* name) {
        for (std::size_t i = 0; i < trials.size(); ++i) {
            const auto& samples = trials[i].samples;
            for (std::size_t k = 1; k < samples.size(); ++k) {
                const double gap = samples[k].t_s - samples[k - 1].t_s;
                if (std::abs(gap - period) > kSamplingTolerance * period + 1e-9) {
                    warnings.push_back(indexed(name, i) + ".samples[" + std::to_string(k) + "]: gap of " +
                                       std::to_string(gap) + " s is outside the " + std::to_string(log.sampling_hz) +
                                       " Hz tolerance");
                }
            }
        }
    };
    scan(log.rotation_trials, "rotation_trials");
    scan(log.movement_trials, "movement_trials");
    scan(log.perspective_trials, "perspective_trials");
    return warnings;
}

std::string session_entry_name(const SessionLog& log) {
    return log.participant_id + "_w" + std::to_string(log.week) + ".json";
}

ErrorRecord to_error_record(const Error& e) {
    ErrorRecord rec{e.kind(), e.what(), {}};
    if (const auto* v = dynamic_cast<const ValidationError*>(&e)) rec.failures = v->failures();
    return rec;
}

std::vector<IngestResult> ingest_archive(std::string_view bytes, unsigned threads) {
    auto entries = zip::read_archive(bytes);
    std::erase_if(entries, [](const zip::Entry& e) {
        if (e.name.size() < 5) return true;
        std::string ext = e.name.substr(e.name.size() - 5);
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        return ext != ".json";
    });

    std::vector<IngestResult> results(entries.size());
    auto work = [&](std::size_t i) {
        const auto& entry = entries[i];
        results[i].source_name = entry.name;
        if (!entry.ok()) {
            results[i].outcome = ErrorRecord{"format", "archive entry '" + entry.name + "': " + entry.error, {}};
            return;
        }
        try {
            results[i].outcome = read_session(entry.data);
        } catch (const Error& e) {
            ErrorRecord rec = to_error_record(e);
            rec.message = "archive entry '" + entry.name + "': " + rec.message;
            results[i].outcome = std::move(rec);
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, entries.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < entries.size(); ++i) work(i);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < entries.size(); i += threads) work(i);
            });
        }
    }
    return results;
}

std::string write_session_archive(const std::vector<SessionLog>& logs) {
    std::vector<zip::Entry> entries;
    entries.reserve(logs.size());
    for (const auto& log : logs) entries.push_back({session_entry_name(log), write_session(log), {}});
    return zip::write_archive(entries);
}

}  // namespace minispace
