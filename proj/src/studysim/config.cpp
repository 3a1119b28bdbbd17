#include "minispace/studysim/config.hpp"

#include <cmath>
#include <set>

#include "embedded_data.hpp"
#include "minispace/error.hpp"

namespace minispace::sim {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

std::string_view to_string(AgeGroup g) {
    switch (g) {
        case AgeGroup::young: return "20-40";
        case AgeGroup::middle: return "41-60";
        case AgeGroup::old: return "61-90";
    }
    return "?";
}

std::string_view to_string(Gender g) { return g == Gender::female ? "female" : "male"; }
std::string_view to_string(Education e) { return e == Education::high_school ? "high_school" : "university"; }
std::string_view to_string(Condition c) { return c == Condition::unsupervised ? "unsupervised" : "supervised"; }

AgeGroup parse_age_group(std::string_view s) {
    for (AgeGroup g : kAgeGroups) {
        if (s == to_string(g)) return g;
    }
    throw DomainError("unknown age group '" + std::string(s) + "' (expected 20-40, 41-60 or 61-90)");
}

Gender parse_gender(std::string_view s) {
    if (s == "female") return Gender::female;
    if (s == "male") return Gender::male;
    throw DomainError("unknown gender '" + std::string(s) + "'");
}

Education parse_education(std::string_view s) {
    if (s == "high_school") return Education::high_school;
    if (s == "university") return Education::university;
    throw DomainError("unknown education '" + std::string(s) + "'");
}

Condition parse_condition(std::string_view s) {
    if (s == "unsupervised") return Condition::unsupervised;
    if (s == "supervised") return Condition::supervised;
    throw DomainError("unknown condition '" + std::string(s) + "'");
}

AgeGroup age_group_for_age(int age) {
    if (age >= 20 && age <= 40) return AgeGroup::young;
    if (age >= 41 && age <= 60) return AgeGroup::middle;
    if (age >= 61 && age <= 90) return AgeGroup::old;
    throw DomainError("age " + std::to_string(age) + " is outside 20-90");
}

namespace {

// Reads keys from one object, rejecting any it does not know about.
class ObjectReader {
public:
    ObjectReader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
        if (!doc_.is_object()) throw DomainError(where() + ": expected an object");
    }
    ~ObjectReader() = default;

    const json* get(const std::string& key) {
        seen_.insert(key);
        const auto it = doc_.find(key);
        return it == doc_.end() ? nullptr : &*it;
    }
    void number(const std::string& key, double& out) {
        if (const json* v = get(key)) {
            if (!v->is_number()) throw DomainError(where(key) + ": expected a number");
            out = v->get<double>();
        }
    }
    void integer(const std::string& key, int& out) {
        if (const json* v = get(key)) {
            if (!v->is_number_integer()) throw DomainError(where(key) + ": expected an integer");
            out = v->get<int>();
        }
    }
    void boolean(const std::string& key, bool& out) {
        if (const json* v = get(key)) {
            if (!v->is_boolean()) throw DomainError(where(key) + ": expected true or false");
            out = v->get<bool>();
        }
    }
    void string(const std::string& key, std::string& out) {
        if (const json* v = get(key)) {
            if (!v->is_string()) throw DomainError(where(key) + ": expected a string");
            out = v->get<std::string>();
        }
    }
    void finish() const {
        for (auto it = doc_.begin(); it != doc_.end(); ++it) {
            if (!seen_.contains(it.key()) && !it.key().starts_with("_")) {
                throw DomainError(where(it.key()) + ": unknown key");
            }
        }
    }
    std::string where(const std::string& key = "") const {
        const std::string base = path_.empty() ? "config" : "config." + path_;
        return key.empty() ? base : base + "." + key;
    }
    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& doc_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_targets(const json& doc, const std::string& path, WeeklyTargets& out) {
    ObjectReader r(doc, path);
    for (AgeGroup g : kAgeGroups) {
        const std::string key(to_string(g));
        const json* v = r.get(key);
        if (!v) continue;
        if (!v->is_array() || v->size() != 3) throw DomainError(r.where(key) + ": expected three [mean, sd] pairs");
        for (std::size_t w = 0; w < 3; ++w) {
            const json& pair = (*v)[w];
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
                throw DomainError(r.where(key) + "[" + std::to_string(w) + "]: expected [mean, sd]");
            }
            out[static_cast<std::size_t>(g)][w] = {pair[0].get<double>(), pair[1].get<double>()};
        }
    }
    r.finish();
}

ordered targets_json(const WeeklyTargets& t) {
    ordered o = ordered::object();
    for (AgeGroup g : kAgeGroups) {
        ordered weeks = ordered::array();
        for (const auto& ms : t[static_cast<std::size_t>(g)]) weeks.push_back({ms.mean, ms.sd});
        o[std::string(to_string(g))] = weeks;
    }
    return o;
}

void read_measure(const json& doc, const std::string& path, QuestionnaireMeasure& m) {
    ObjectReader r(doc, path);
    r.number("gender_shift", m.gender_shift);
    r.number("supervised_shift", m.supervised_shift);
    if (const json* t = r.get("targets")) read_targets(*t, r.child("targets"), m.targets);
    r.finish();
}

ordered measure_json(const QuestionnaireMeasure& m) {
    ordered o;
    o["gender_shift"] = m.gender_shift;
    o["supervised_shift"] = m.supervised_shift;
    o["targets"] = targets_json(m.targets);
    return o;
}

void check_targets(const WeeklyTargets& t, const std::string& name, bool positive) {
    for (const auto& group : t) {
        for (const auto& ms : group) {
            if (!std::isfinite(ms.mean) || !std::isfinite(ms.sd) || !(ms.sd > 0.0)) {
                throw DomainError("config." + name + ": every target needs a finite mean and an SD > 0");
            }
            if (positive && !(ms.mean > 0.0)) throw DomainError("config." + name + ": target means must be positive");
        }
    }
}

}  // namespace

MeanSd CohortConfig::target(const WeeklyTargets& t, AgeGroup g, int week) const {
    const auto gi = static_cast<std::size_t>(g);
    auto at = [&](std::size_t w) {
        const MeanSd young = t[0][w];
        const MeanSd own = t[gi][w];
        return MeanSd{young.mean + effects.age * (own.mean - young.mean), young.sd + effects.age * (own.sd - young.sd)};
    };
    const MeanSd w1 = at(0);
    if (week == 1) return w1;
    const double scale = week == 2 ? effects.learning : effects.difficulty;
    const MeanSd wk = at(static_cast<std::size_t>(week - 1));
    return {w1.mean + scale * (wk.mean - w1.mean), w1.sd + scale * (wk.sd - w1.sd)};
}

CohortConfig CohortConfig::from_json(const json& doc) {
    CohortConfig c;
    ObjectReader r(doc, "");
    r.string("name", c.name);
    if (const json* v = r.get("seed")) {
        if (!v->is_number_unsigned() && !v->is_number_integer()) throw DomainError("config.seed: expected an integer");
        c.seed = v->get<std::uint64_t>();
    }
    if (const json* v = r.get("n_per_cell"); v && !v->is_null()) {
        if (!v->is_number_integer()) throw DomainError("config.n_per_cell: expected an integer");
        c.n_per_cell = v->get<int>();
    }
    r.number("university_share", c.university_share);
    if (const json* cells = r.get("cells")) {
        if (!cells->is_array()) throw DomainError("config.cells: expected an array");
        for (std::size_t i = 0; i < cells->size(); ++i) {
            ObjectReader cr((*cells)[i], "cells[" + std::to_string(i) + "]");
            CellSpec cell;
            std::string s;
            cr.string("age_group", s);
            cell.age_group = parse_age_group(s);
            s.clear();
            cr.string("gender", s);
            cell.gender = parse_gender(s);
            cr.integer("n", cell.n);
            cr.number("age_mean", cell.age_mean);
            cr.number("age_sd", cell.age_sd);
            cr.integer("age_min", cell.age_min);
            cr.integer("age_max", cell.age_max);
            cr.finish();
            c.cells.push_back(cell);
        }
    }
    if (const json* t = r.get("targets")) {
        ObjectReader tr(*t, "targets");
        if (const json* v = tr.get("rotation_time_s")) read_targets(*v, "targets.rotation_time_s", c.rotation_time_s);
        if (const json* v = tr.get("movement_time_s")) read_targets(*v, "targets.movement_time_s", c.movement_time_s);
        if (const json* v = tr.get("perspective_error_deg")) {
            read_targets(*v, "targets.perspective_error_deg", c.perspective_error_deg);
        }
        tr.finish();
    }
    if (const json* e = r.get("effects")) {
        ObjectReader er(*e, "effects");
        er.number("age", c.effects.age);
        er.number("learning", c.effects.learning);
        er.number("difficulty", c.effects.difficulty);
        er.finish();
    }
    if (const json* l = r.get("latent")) {
        ObjectReader lr(*l, "latent");
        lr.number("between_person_share", c.between_person_share);
        lr.number("loading", c.loading);
        lr.number("gender_shift", c.gender_shift);
        lr.number("noise_scale", c.noise_scale);
        lr.boolean("balanced", c.balanced);
        if (const json* s = lr.get("supervision_shift")) {
            ObjectReader sr(*s, "latent.supervision_shift");
            for (AgeGroup g : kAgeGroups) sr.number(std::string(to_string(g)), c.supervision_shift[static_cast<std::size_t>(g)]);
            sr.finish();
        }
        lr.finish();
    }
    if (const json* m = r.get("moca")) {
        ObjectReader mr(*m, "moca");
        mr.number("intercept", c.moca.intercept);
        mr.number("age", c.moca.age);
        mr.number("male", c.moca.male);
        mr.number("university", c.moca.university);
        mr.number("slope", c.moca.slope);
        mr.integer("reference_week", c.moca.reference_week);
        mr.number("noise_sd", c.moca.noise_sd);
        mr.finish();
    }
    if (const json* q = r.get("questionnaires")) {
        ObjectReader qr(*q, "questionnaires");
        qr.number("person_share", c.questionnaires.person_share);
        auto& qm = c.questionnaires;
        for (auto [key, m] : {std::pair{"sus", &qm.sus}, {"nasa_tlx", &qm.nasa_tlx}, {"ueq_attractiveness", &qm.ueq_attractiveness},
                              {"ueq_pragmatic", &qm.ueq_pragmatic}, {"ueq_hedonic", &qm.ueq_hedonic}}) {
            if (const json* v = qr.get(key)) read_measure(*v, "questionnaires." + std::string(key), *m);
        }
        qr.finish();
    }
    if (const json* s = r.get("supervised")) {
        ObjectReader sr(*s, "supervised");
        sr.boolean("enabled", c.supervised_enabled);
        if (const json* studies = sr.get("studies")) {
            if (!studies->is_array()) throw DomainError("config.supervised.studies: expected an array");
            for (std::size_t i = 0; i < studies->size(); ++i) {
                ObjectReader st((*studies)[i], "supervised.studies[" + std::to_string(i) + "]");
                SupervisedStudy study;
                st.string("name", study.name);
                st.integer("n_female", study.n_female);
                st.integer("n_male", study.n_male);
                st.number("age_mean", study.age_mean);
                st.number("age_sd", study.age_sd);
                st.integer("age_min", study.age_min);
                st.integer("age_max", study.age_max);
                st.boolean("questionnaires", study.questionnaires);
                st.finish();
                c.supervised.push_back(study);
            }
        }
        sr.finish();
    }
    r.finish();
    c.validate();
    return c;
}

ordered CohortConfig::to_json() const {
    ordered o;
    o["name"] = name;
    o["seed"] = seed;
    if (n_per_cell) o["n_per_cell"] = *n_per_cell;
    o["university_share"] = university_share;
    o["cells"] = ordered::array();
    for (const auto& cell : cells) {
        o["cells"].push_back({{"age_group", to_string(cell.age_group)},
                              {"gender", to_string(cell.gender)},
                              {"n", cell.n},
                              {"age_mean", cell.age_mean},
                              {"age_sd", cell.age_sd},
                              {"age_min", cell.age_min},
                              {"age_max", cell.age_max}});
    }
    o["targets"]["rotation_time_s"] = targets_json(rotation_time_s);
    o["targets"]["movement_time_s"] = targets_json(movement_time_s);
    o["targets"]["perspective_error_deg"] = targets_json(perspective_error_deg);
    o["effects"] = {{"age", effects.age}, {"learning", effects.learning}, {"difficulty", effects.difficulty}};
    o["latent"]["between_person_share"] = between_person_share;
    o["latent"]["loading"] = loading;
    o["latent"]["gender_shift"] = gender_shift;
    for (AgeGroup g : kAgeGroups) {
        o["latent"]["supervision_shift"][std::string(to_string(g))] = supervision_shift[static_cast<std::size_t>(g)];
    }
    o["latent"]["noise_scale"] = noise_scale;
    o["latent"]["balanced"] = balanced;
    o["moca"] = {{"intercept", moca.intercept}, {"age", moca.age},         {"male", moca.male},
                 {"university", moca.university}, {"slope", moca.slope}, {"reference_week", moca.reference_week},
                 {"noise_sd", moca.noise_sd}};
    o["questionnaires"]["person_share"] = questionnaires.person_share;
    o["questionnaires"]["sus"] = measure_json(questionnaires.sus);
    o["questionnaires"]["nasa_tlx"] = measure_json(questionnaires.nasa_tlx);
    o["questionnaires"]["ueq_attractiveness"] = measure_json(questionnaires.ueq_attractiveness);
    o["questionnaires"]["ueq_pragmatic"] = measure_json(questionnaires.ueq_pragmatic);
    o["questionnaires"]["ueq_hedonic"] = measure_json(questionnaires.ueq_hedonic);
    o["supervised"]["enabled"] = supervised_enabled;
    o["supervised"]["studies"] = ordered::array();
    for (const auto& s : supervised) {
        o["supervised"]["studies"].push_back({{"name", s.name},
                                              {"n_female", s.n_female},
                                              {"n_male", s.n_male},
                                              {"age_mean", s.age_mean},
                                              {"age_sd", s.age_sd},
                                              {"age_min", s.age_min},
                                              {"age_max", s.age_max},
                                              {"questionnaires", s.questionnaires}});
    }
    return o;
}

void CohortConfig::validate() const {
    if (cells.empty()) throw DomainError("config.cells: at least one cell is required");
    if (n_per_cell && *n_per_cell < 2) throw DomainError("config.n_per_cell: must be at least 2");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        const std::string path = "config.cells[" + std::to_string(i) + "]";
        if (cell_size(c) < 2) throw DomainError(path + ".n: must be at least 2");
        if (!(c.age_sd > 0.0)) throw DomainError(path + ".age_sd: must be > 0");
        if (c.age_min > c.age_max) throw DomainError(path + ": age_min exceeds age_max");
        if (age_group_for_age(c.age_min) != c.age_group || age_group_for_age(c.age_max) != c.age_group) {
            throw DomainError(path + ": age range does not fit age group " + std::string(to_string(c.age_group)));
        }
    }
    if (!(university_share >= 0.0 && university_share <= 1.0)) throw DomainError("config.university_share: must lie in [0, 1]");
    check_targets(rotation_time_s, "targets.rotation_time_s", true);
    check_targets(movement_time_s, "targets.movement_time_s", true);
    check_targets(perspective_error_deg, "targets.perspective_error_deg", true);
    for (const auto* m : {&questionnaires.sus, &questionnaires.nasa_tlx, &questionnaires.ueq_attractiveness,
                          &questionnaires.ueq_pragmatic, &questionnaires.ueq_hedonic}) {
        check_targets(m->targets, "questionnaires", false);
    }
    if (!(between_person_share > 0.0 && between_person_share < 1.0)) {
        throw DomainError("config.latent.between_person_share: must lie in (0, 1)");
    }
    if (!(loading >= 0.0 && loading <= 1.0)) throw DomainError("config.latent.loading: must lie in [0, 1]");
    if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) throw DomainError("config.latent.noise_scale: must be >= 0");
    if (!(questionnaires.person_share >= 0.0 && questionnaires.person_share <= 1.0)) {
        throw DomainError("config.questionnaires.person_share: must lie in [0, 1]");
    }
    if (moca.reference_week < 1 || moca.reference_week > 3) throw DomainError("config.moca.reference_week: must be 1, 2 or 3");
    if (!(moca.noise_sd >= 0.0)) throw DomainError("config.moca.noise_sd: must be >= 0");
    for (std::size_t i = 0; i < supervised.size(); ++i) {
        const auto& s = supervised[i];
        const std::string path = "config.supervised.studies[" + std::to_string(i) + "]";
        if (s.n_female < 0 || s.n_male < 0 || s.n_female + s.n_male < 1) throw DomainError(path + ": needs at least one participant");
        if (!(s.age_sd > 0.0)) throw DomainError(path + ".age_sd: must be > 0");
        if (s.age_min < 20 || s.age_max > 90 || s.age_min > s.age_max) throw DomainError(path + ": ages must lie within 20-90");
    }
}

const CohortConfig& CohortConfig::defaults() {
    static const CohortConfig config = from_json(json::parse(embedded::study_default_json()));
    return config;
}

CohortConfig null_config(const CohortConfig& base) {
    CohortConfig c = base;
    c.effects = {0.0, 0.0, 0.0};
    c.gender_shift = 0.0;
    c.supervision_shift = {0.0, 0.0, 0.0};
    c.moca.age = 0.0;
    c.moca.male = 0.0;
    c.moca.university = 0.0;
    c.moca.slope = 0.0;
    for (auto* m : {&c.questionnaires.sus, &c.questionnaires.nasa_tlx, &c.questionnaires.ueq_attractiveness,
                    &c.questionnaires.ueq_pragmatic, &c.questionnaires.ueq_hedonic}) {
        m->gender_shift = 0.0;
        m->supervised_shift = 0.0;
    }
    return c;
}

}  // namespace minispace::sim
