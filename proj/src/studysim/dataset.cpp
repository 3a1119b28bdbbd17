#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "minispace/csv.hpp"
#include "minispace/error.hpp"
#include "minispace/studysim/dataset.hpp"

namespace minispace::sim {

namespace {

const std::vector<std::string> kParticipantColumns{"participant_id", "study",   "condition",  "age",
                                                   "age_group",      "gender",  "education",  "moca_total"};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("failed writing " + path.string());
}

int parse_int(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw DomainError(what + ": '" + s + "' is not an integer");
    return v;
}

}  // namespace

const Participant& StudyDataset::participant(const std::string& id) const {
    for (const auto& p : participants) {
        if (p.id == id) return p;
    }
    throw DomainError("unknown participant '" + id + "'");
}

std::vector<const SessionRecord*> StudyDataset::sessions_of(const std::string& id) const {
    std::vector<const SessionRecord*> out;
    for (const auto& s : sessions) {
        if (s.log.participant_id == id) out.push_back(&s);
    }
    std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) { return a->log.week < b->log.week; });
    return out;
}

StudyDataset assemble_dataset(std::vector<Participant> participants, std::vector<SessionLog> logs) {
    std::vector<std::string> failures;
    std::map<std::string, std::size_t> order;
    for (std::size_t i = 0; i < participants.size(); ++i) {
        const auto& p = participants[i];
        if (!order.emplace(p.id, i).second) failures.push_back(p.id + ": duplicate participant id");
        try {
            if (age_group_for_age(p.age) != p.age_group) {
                failures.push_back(p.id + ": age " + std::to_string(p.age) + " is not in age group " + std::string(to_string(p.age_group)));
            }
        } catch (const DomainError& e) {
            failures.push_back(p.id + ": " + e.what());
        }
        if (p.moca_total < 0 || p.moca_total > 30) failures.push_back(p.id + ": moca_total must lie in [0, 30]");
    }
    std::map<std::string, std::set<int>> weeks;
    for (const auto& log : logs) {
        if (!order.contains(log.participant_id)) {
            failures.push_back(session_entry_name(log) + ": participant not in the demographics table");
            continue;
        }
        if (!weeks[log.participant_id].insert(log.week).second) {
            failures.push_back(session_entry_name(log) + ": duplicate week");
        }
        for (auto& f : validate_session(log)) failures.push_back(session_entry_name(log) + ": " + f);
        if (log.perspective_trials.empty()) {
            failures.push_back(session_entry_name(log) + ": study sessions must include the perspective task");
        }
    }
    for (const auto& p : participants) {
        const auto& have = weeks[p.id];
        const std::set<int> need = p.condition == Condition::unsupervised ? std::set<int>{1, 2, 3} : std::set<int>{1};
        if (have != need) {
            failures.push_back(p.id + ": " + std::string(to_string(p.condition)) + " participants need week" +
                               (need.size() > 1 ? "s 1-3" : " 1 only"));
        }
    }
    if (!failures.empty()) throw ValidationError(std::move(failures));

    std::stable_sort(logs.begin(), logs.end(), [&](const SessionLog& a, const SessionLog& b) {
        const auto ia = order.at(a.participant_id), ib = order.at(b.participant_id);
        return ia != ib ? ia < ib : a.week < b.week;
    });
    StudyDataset data;
    data.participants = std::move(participants);
    data.sessions.reserve(logs.size());
    for (auto& log : logs) {
        SessionRecord rec;
        rec.metrics = compute_metrics(log);
        if (log.questionnaires) rec.scores = score_questionnaires(*log.questionnaires);
        rec.log = std::move(log);
        data.sessions.push_back(std::move(rec));
    }
    return data;
}

std::vector<std::pair<std::string, double>> reference_space_error(const StudyDataset& data, int reference_week) {
    std::vector<std::pair<std::string, double>> out;
    for (Condition cond : {Condition::unsupervised, Condition::supervised}) {
        std::vector<MetricRecord> records;
        for (const auto& p : data.participants) {
            if (p.condition != cond) continue;
            const int week = cond == Condition::unsupervised ? reference_week : 1;
            for (const auto* s : data.sessions_of(p.id)) {
                if (s->log.week == week) records.push_back(s->metrics);
            }
        }
        if (records.empty()) continue;
        for (const auto& r : composite_space_error(records)) out.emplace_back(r.participant_id, *r.space_error_z);
    }
    return out;
}

std::string participants_csv(const StudyDataset& data) {
    std::string out;
    csv::append_row(out, kParticipantColumns);
    for (const auto& p : data.participants) {
        csv::append_row(out, {p.id, p.study, std::string(to_string(p.condition)), std::to_string(p.age),
                              std::string(to_string(p.age_group)), std::string(to_string(p.gender)),
                              std::string(to_string(p.education)), std::to_string(p.moca_total)});
    }
    return out;
}

std::vector<Participant> parse_participants_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows[0] != kParticipantColumns) {
        throw FormatError("participants table must start with the header: participant_id,study,condition,age,age_group,gender,education,moca_total");
    }
    std::vector<Participant> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1 && row[0].empty()) continue;
        const std::string where = "participants row " + std::to_string(r + 1);
        if (row.size() != kParticipantColumns.size()) throw FormatError(where + ": expected 8 fields");
        Participant p;
        p.id = row[0];
        p.study = row[1];
        p.condition = parse_condition(row[2]);
        p.age = parse_int(row[3], where + " age");
        p.age_group = parse_age_group(row[4]);
        p.gender = parse_gender(row[5]);
        p.education = parse_education(row[6]);
        p.moca_total = parse_int(row[7], where + " moca_total");
        out.push_back(std::move(p));
    }
    return out;
}

void save_dataset(const StudyDataset& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "participants.csv", participants_csv(data));
    std::vector<SessionLog> logs;
    logs.reserve(data.sessions.size());
    for (const auto& s : data.sessions) logs.push_back(s.log);
    write_file(dir / "sessions.zip", write_session_archive(logs));
}

StudyDataset load_dataset(const std::filesystem::path& dir) {
    auto participants = parse_participants_csv(read_file(dir / "participants.csv"));
    const auto results = ingest_archive(read_file(dir / "sessions.zip"));
    std::vector<SessionLog> logs;
    std::vector<std::string> failures;
    for (const auto& r : results) {
        if (r.ok()) {
            logs.push_back(r.log());
        } else {
            failures.push_back(r.source_name + ": " + r.error().message);
        }
    }
    if (!failures.empty()) throw ValidationError(std::move(failures));
    return assemble_dataset(std::move(participants), std::move(logs));
}

}  // namespace minispace::sim
