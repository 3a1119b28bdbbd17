#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "minispace/angles.hpp"

namespace minispace {

struct Landmark {
    std::string id;
    std::string name;
    double x_m = 0.0;
    double y_m = 0.0;

    Point2 position() const { return {x_m, y_m}; }
    friend bool operator==(const Landmark&, const Landmark&) = default;
};

struct LandmarkMap {
    std::string map_id;
    std::vector<Landmark> landmarks;

    /// Throws DomainError for an unknown id.
    const Landmark& at(const std::string& id) const;
    bool contains(const std::string& id) const;

    friend bool operator==(const LandmarkMap&, const LandmarkMap&) = default;
};

/// One rotation of the guide robot; sign +1 is clockwise.
struct RotationStep {
    int magnitude_deg = 45;
    int sign = 1;

    int signed_deg() const { return sign * magnitude_deg; }
    RotationStep negated() const { return {magnitude_deg, -sign}; }
    friend bool operator==(const RotationStep&, const RotationStep&) = default;
};

/// A forward move followed by a repeat of earlier rotation steps.
struct MovementSegment {
    double forward_distance_m = 5.0;
    std::vector<RotationStep> rotation_repeat;

    friend bool operator==(const MovementSegment&, const MovementSegment&) = default;
};

struct PerspectiveTrialSpec {
    std::string stand_at;
    std::string face;
    std::string point_to;

    friend bool operator==(const PerspectiveTrialSpec&, const PerspectiveTrialSpec&) = default;
};

struct PlanConfig {
    int n_pairs = 2;                                   // weeks 1-2 only
    std::vector<double> forward_distances_m{5.0, 5.0, 5.0};
};

struct TaskPlan {
    int week = 1;
    std::uint64_t seed = 0;
    std::vector<RotationStep> rotation_steps;
    std::vector<MovementSegment> movement_segments;
    LandmarkMap map;
    std::vector<PerspectiveTrialSpec> perspective_trials;

    friend bool operator==(const TaskPlan&, const TaskPlan&) = default;
};

/// Targets closer than this to dead-ahead or dead-behind are never asked.
inline constexpr double kBearingFloorDeg = 10.0;

inline constexpr int kBasicLandmarkCount = 4;
inline constexpr int kExtendedLandmarkCount = 7;
inline constexpr int kBasicTrialCount = 6;
inline constexpr int kExtendedTrialCount = 16;

/// Throws DomainError unless week is 1, 2 or 3.
void check_week(int week);
int landmark_count_for_week(int week);
int perspective_trial_count_for_week(int week);

std::vector<RotationStep> gen_rotation_sequence(int week, int n_pairs, std::uint64_t seed);

std::vector<PerspectiveTrialSpec> gen_perspective_trials(int week, const LandmarkMap& map,
                                                         std::uint64_t seed);

/// Bundled default map for a week (weeks 1 and 2 share a map).
const LandmarkMap& default_map(int week);

/// Every (stand, face, target) triple that clears the bearing floor, in
/// lexicographic landmark-index order.
std::vector<PerspectiveTrialSpec> eligible_triples(const LandmarkMap& map);

/// Full weekly plan; sub-generators receive seeds derived from `seed`.
TaskPlan generate_plan(int week, std::uint64_t seed, const PlanConfig& config = {},
                       const LandmarkMap* map = nullptr);

/// Structural checks shared with the session-log validator. Appends one
/// message per failed rule.
void validate_map(const LandmarkMap& map, std::vector<std::string>& failures);

nlohmann::ordered_json map_to_json(const LandmarkMap& map);
nlohmann::ordered_json plan_to_json(const TaskPlan& plan);

/// Parse a map block; throws DomainError on malformed input.
LandmarkMap map_from_json(const nlohmann::json& doc);

}  // namespace minispace
