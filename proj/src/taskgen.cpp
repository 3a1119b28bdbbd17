#include "minispace/taskgen.hpp"

#include <array>
#include <cmath>
#include <set>
#include <utility>

#include "embedded_data.hpp"
#include "minispace/error.hpp"
#include "minispace/rng.hpp"

namespace minispace {

namespace {

constexpr std::array<int, 2> kBasicMagnitudes{45, 90};
constexpr std::array<int, 7> kFullMagnitudes{45, 90, 135, 180, 225, 270, 315};

enum Stream : std::uint64_t { kRotationStream = 1, kTrialStream = 2 };

struct DefaultMaps {
    LandmarkMap basic;
    LandmarkMap extended;
};

const DefaultMaps& default_maps() {
    static const DefaultMaps maps = [] {
        const auto doc = nlohmann::json::parse(embedded::default_maps_json());
        DefaultMaps out;
        for (const auto& entry : doc.at("maps")) {
            LandmarkMap map = map_from_json(entry.at("map"));
            for (int week : entry.at("weeks").get<std::vector<int>>()) {
                if (week == 3) {
                    out.extended = map;
                } else {
                    out.basic = map;
                }
            }
        }
        return out;
    }();
    return maps;
}

}  // namespace

const Landmark& LandmarkMap::at(const std::string& id) const {
    for (const auto& lm : landmarks) {
        if (lm.id == id) return lm;
    }
    throw DomainError("unknown landmark id '" + id + "' in map '" + map_id + "'");
}

bool LandmarkMap::contains(const std::string& id) const {
    for (const auto& lm : landmarks) {
        if (lm.id == id) return true;
    }
    return false;
}

void check_week(int week) {
    if (week < 1 || week > 3) throw DomainError("week must be 1, 2 or 3 (got " + std::to_string(week) + ")");
}

int landmark_count_for_week(int week) {
    check_week(week);
    return week == 3 ? kExtendedLandmarkCount : kBasicLandmarkCount;
}

int perspective_trial_count_for_week(int week) {
    check_week(week);
    return week == 3 ? kExtendedTrialCount : kBasicTrialCount;
}

std::vector<RotationStep> gen_rotation_sequence(int week, int n_pairs, std::uint64_t seed) {
    check_week(week);
    if (n_pairs < 1) throw DomainError("n_pairs must be at least 1");

    Rng rng(seed);
    std::vector<RotationStep> steps;
    auto push_pair = [&](int magnitude) {
        const RotationStep step{magnitude, rng.coin() ? 1 : -1};
        steps.push_back(step);
        steps.push_back(step.negated());
    };

    if (week == 3) {
        auto magnitudes = kFullMagnitudes;
        rng.shuffle(std::span<int>(magnitudes));
        for (int m : magnitudes) push_pair(m);
    } else {
        for (int i = 0; i < n_pairs; ++i) {
            push_pair(kBasicMagnitudes[rng.below(kBasicMagnitudes.size())]);
        }
    }
    return steps;
}

std::vector<PerspectiveTrialSpec> eligible_triples(const LandmarkMap& map) {
    std::vector<PerspectiveTrialSpec> out;
    const auto& lms = map.landmarks;
    for (std::size_t s = 0; s < lms.size(); ++s) {
        for (std::size_t f = 0; f < lms.size(); ++f) {
            for (std::size_t t = 0; t < lms.size(); ++t) {
                if (s == f || s == t || f == t) continue;
                const Point2 stand = lms[s].position();
                if (stand == lms[f].position() || stand == lms[t].position()) continue;
                const double bearing = egocentric_bearing(stand, lms[f].position(), lms[t].position());
                if (axis_clearance(bearing) >= kBearingFloorDeg) {
                    out.push_back({lms[s].id, lms[f].id, lms[t].id});
                }
            }
        }
    }
    return out;
}

std::vector<PerspectiveTrialSpec> gen_perspective_trials(int week, const LandmarkMap& map,
                                                         std::uint64_t seed) {
    const int landmarks = landmark_count_for_week(week);
    if (static_cast<int>(map.landmarks.size()) != landmarks) {
        throw DomainError("week " + std::to_string(week) + " requires a " + std::to_string(landmarks) +
                          "-landmark map, got " + std::to_string(map.landmarks.size()));
    }
    std::vector<std::string> failures;
    validate_map(map, failures);
    if (!failures.empty()) throw DomainError("invalid map: " + failures.front());

    auto pool = eligible_triples(map);
    const auto needed = static_cast<std::size_t>(perspective_trial_count_for_week(week));
    if (pool.size() < needed) {
        throw DomainError("map '" + map.map_id + "' has only " + std::to_string(pool.size()) +
                          " unambiguous triples; " + std::to_string(needed) + " required");
    }
    Rng rng(seed);
    rng.shuffle(std::span<PerspectiveTrialSpec>(pool));
    pool.resize(needed);
    return pool;
}

const LandmarkMap& default_map(int week) {
    check_week(week);
    return week == 3 ? default_maps().extended : default_maps().basic;
}

TaskPlan generate_plan(int week, std::uint64_t seed, const PlanConfig& config, const LandmarkMap* map) {
    check_week(week);
    for (double d : config.forward_distances_m) {
        if (!std::isfinite(d) || d <= 0.0) throw DomainError("forward distances must be positive");
    }
    TaskPlan plan;
    plan.week = week;
    plan.seed = seed;
    plan.map = map ? *map : default_map(week);
    plan.rotation_steps = gen_rotation_sequence(week, config.n_pairs, Rng::derive(seed, kRotationStream).next_u64());
    plan.perspective_trials =
        gen_perspective_trials(week, plan.map, Rng::derive(seed, kTrialStream).next_u64());

    const std::size_t pairs = plan.rotation_steps.size() / 2;
    for (std::size_t i = 0; i < config.forward_distances_m.size(); ++i) {
        const std::size_t p = i % pairs;
        plan.movement_segments.push_back(
            {config.forward_distances_m[i], {plan.rotation_steps[2 * p], plan.rotation_steps[2 * p + 1]}});
    }
    return plan;
}

void validate_map(const LandmarkMap& map, std::vector<std::string>& failures) {
    std::set<std::string> ids;
    for (const auto& lm : map.landmarks) {
        if (lm.id.empty()) failures.push_back("map.landmark_id: landmark ids must be non-empty");
        if (!ids.insert(lm.id).second) failures.push_back("map.unique_ids: duplicate landmark id '" + lm.id + "'");
        if (!std::isfinite(lm.x_m) || !std::isfinite(lm.y_m)) {
            failures.push_back("map.finite_position: landmark '" + lm.id + "' has a non-finite coordinate");
        }
    }
    for (std::size_t i = 0; i < map.landmarks.size(); ++i) {
        for (std::size_t j = i + 1; j < map.landmarks.size(); ++j) {
            if (map.landmarks[i].position() == map.landmarks[j].position()) {
                failures.push_back("map.distinct_positions: landmarks '" + map.landmarks[i].id + "' and '" +
                                   map.landmarks[j].id + "' share a position");
            }
        }
    }
}

nlohmann::ordered_json map_to_json(const LandmarkMap& map) {
    nlohmann::ordered_json out;
    out["map_id"] = map.map_id;
    auto& arr = out["landmarks"] = nlohmann::ordered_json::array();
    for (const auto& lm : map.landmarks) {
        nlohmann::ordered_json j;
        j["id"] = lm.id;
        j["name"] = lm.name;
        j["x_m"] = lm.x_m;
        j["y_m"] = lm.y_m;
        arr.push_back(std::move(j));
    }
    return out;
}

LandmarkMap map_from_json(const nlohmann::json& doc) {
    try {
        LandmarkMap map;
        map.map_id = doc.at("map_id").get<std::string>();
        for (const auto& lm : doc.at("landmarks")) {
            map.landmarks.push_back({lm.at("id").get<std::string>(), lm.value("name", lm.at("id").get<std::string>()),
                                     lm.at("x_m").get<double>(), lm.at("y_m").get<double>()});
        }
        return map;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed landmark map: ") + e.what());
    }
}

nlohmann::ordered_json plan_to_json(const TaskPlan& plan) {
    auto step_json = [](const RotationStep& s) {
        nlohmann::ordered_json j;
        j["magnitude_deg"] = s.magnitude_deg;
        j["sign"] = s.sign;
        return j;
    };
    nlohmann::ordered_json out;
    out["week"] = plan.week;
    out["seed"] = plan.seed;
    auto& steps = out["rotation_steps"] = nlohmann::ordered_json::array();
    for (const auto& s : plan.rotation_steps) steps.push_back(step_json(s));
    auto& segments = out["movement_segments"] = nlohmann::ordered_json::array();
    for (const auto& seg : plan.movement_segments) {
        nlohmann::ordered_json j;
        j["forward_distance_m"] = seg.forward_distance_m;
        auto& rep = j["rotation_repeat"] = nlohmann::ordered_json::array();
        for (const auto& s : seg.rotation_repeat) rep.push_back(step_json(s));
        segments.push_back(std::move(j));
    }
    out["map"] = map_to_json(plan.map);
    auto& trials = out["perspective_trials"] = nlohmann::ordered_json::array();
    for (const auto& t : plan.perspective_trials) {
        nlohmann::ordered_json j;
        j["stand_at"] = t.stand_at;
        j["face"] = t.face;
        j["point_to"] = t.point_to;
        trials.push_back(std::move(j));
    }
    return out;
}

}  // namespace minispace
