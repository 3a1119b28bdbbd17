#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minispace/sessionlog.hpp"

namespace minispace {

struct MetricRecord {
    std::string participant_id;
    int week = 1;
    double rotation_time_s = 0.0;
    double movement_time_s = 0.0;
    double total_training_time_s = 0.0;
    double perspective_error_deg = 0.0;
    std::optional<double> space_error_z;  // set by composite_space_error

    friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

struct PhaseTimes {
    double rotation_time_s = 0.0;
    double movement_time_s = 0.0;
    double total_training_time_s = 0.0;
};

/// Egocentric bearing of `point_to` when standing at `stand_at` facing
/// `face`; clockwise-positive, 0 = ahead. Throws DomainError for unknown or
/// repeated ids and GeometryError when stand and face coincide.
double perspective_truth(const LandmarkMap& map, const std::string& stand_at, const std::string& face,
                         const std::string& point_to);

/// Mean angular deviation of responses from truth over all perspective trials.
double perspective_error(const SessionLog& log);

PhaseTimes phase_times(const SessionLog& log);

/// Phase times and perspective error for one log (no composite yet).
MetricRecord compute_metrics(const SessionLog& log);

enum class StandardizationGroup { per_week, pooled };

/// What stands in for the visuospatial-training side of the composite.
enum class TrainingComponent {
    total_time,   // z(total training time)
    phase_times,  // mean of z(rotation time) and z(movement time)
};

struct CompositeOptions {
    StandardizationGroup grouping = StandardizationGroup::per_week;
    TrainingComponent training = TrainingComponent::total_time;
};

/// z-score the training and perspective components within each group (sample
/// SD) and average them into space_error_z. Returns a copy with the field set.
/// Throws StandardizationError naming the group when it has fewer than two
/// records or a component has zero variance.
std::vector<MetricRecord> composite_space_error(std::span<const MetricRecord> records,
                                               const CompositeOptions& options = {});

}  // namespace minispace
