#include "minispace/metrics.hpp"

#include <cmath>
#include <map>

#include "minispace/angles.hpp"
#include "minispace/error.hpp"

namespace minispace {

double perspective_truth(const LandmarkMap& map, const std::string& stand_at, const std::string& face,
                         const std::string& point_to) {
    if (stand_at == face || stand_at == point_to || face == point_to) {
        throw DomainError("perspective_truth: stand_at, face and point_to must be distinct");
    }
    const Point2 stand = map.at(stand_at).position();
    const Point2 facing = map.at(face).position();
    const Point2 target = map.at(point_to).position();
    if (stand == facing) throw GeometryError("perspective_truth: facing landmark coincides with the stand point");
    if (stand == target) throw GeometryError("perspective_truth: target landmark coincides with the stand point");
    return egocentric_bearing(stand, facing, target);
}

double perspective_error(const SessionLog& log) {
    if (log.perspective_trials.empty()) throw DomainError("perspective_error: log has no perspective trials");
    double sum = 0.0;
    for (const auto& trial : log.perspective_trials) {
        const auto& p = std::get<PerspectivePayload>(trial.payload);
        sum += angular_deviation(p.response_deg, perspective_truth(log.map, p.stand_at, p.face, p.point_to));
    }
    return sum / static_cast<double>(log.perspective_trials.size());
}

PhaseTimes phase_times(const SessionLog& log) {
    auto sum = [](const std::vector<TrialEvent>& trials, const char* name) {
        double total = 0.0;
        for (std::size_t i = 0; i < trials.size(); ++i) {
            if (trials[i].end_t_s < trials[i].start_t_s) {
                throw ValidationError({std::string(name) + "[" + std::to_string(i) + "].end_t_s: end_t_s must be >= start_t_s"});
            }
            total += trials[i].duration_s();
        }
        return total;
    };
    PhaseTimes out;
    out.rotation_time_s = sum(log.rotation_trials, "rotation_trials");
    out.movement_time_s = sum(log.movement_trials, "movement_trials");
    out.total_training_time_s = out.rotation_time_s + out.movement_time_s;
    return out;
}

MetricRecord compute_metrics(const SessionLog& log) {
    const PhaseTimes times = phase_times(log);
    MetricRecord rec;
    rec.participant_id = log.participant_id;
    rec.week = log.week;
    rec.rotation_time_s = times.rotation_time_s;
    rec.movement_time_s = times.movement_time_s;
    rec.total_training_time_s = times.total_training_time_s;
    rec.perspective_error_deg = perspective_error(log);
    return rec;
}

namespace {

std::string group_name(const CompositeOptions& options, int week) {
    return options.grouping == StandardizationGroup::pooled ? std::string("pooled") : "week " + std::to_string(week);
}

// z-scores with the n-1 standard deviation.
std::vector<double> zscores(const std::vector<double>& x, const std::string& what, const std::string& group) {
    const auto n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0) || !std::isfinite(sd)) {
        throw StandardizationError("group '" + group + "': " + what + " has zero variance");
    }
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - mean) / sd;
    return z;
}

}  // namespace

std::vector<MetricRecord> composite_space_error(std::span<const MetricRecord> records, const CompositeOptions& options) {
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i) {
        groups[options.grouping == StandardizationGroup::pooled ? 0 : records[i].week].push_back(i);
    }
    std::vector<MetricRecord> out(records.begin(), records.end());
    for (const auto& [key, members] : groups) {
        const std::string name = group_name(options, key);
        if (members.size() < 2) {
            throw StandardizationError("group '" + name + "' has " + std::to_string(members.size()) +
                                       " record(s); at least 2 are required");
        }
        auto column = [&](auto field) {
            std::vector<double> v;
            v.reserve(members.size());
            for (std::size_t i : members) v.push_back(records[i].*field);
            return v;
        };
        const auto z_error = zscores(column(&MetricRecord::perspective_error_deg), "perspective_error_deg", name);
        std::vector<double> z_training;
        if (options.training == TrainingComponent::total_time) {
            z_training = zscores(column(&MetricRecord::total_training_time_s), "total_training_time_s", name);
        } else {
            const auto zr = zscores(column(&MetricRecord::rotation_time_s), "rotation_time_s", name);
            const auto zm = zscores(column(&MetricRecord::movement_time_s), "movement_time_s", name);
            z_training.resize(zr.size());
            for (std::size_t i = 0; i < zr.size(); ++i) z_training[i] = 0.5 * (zr[i] + zm[i]);
        }
        for (std::size_t k = 0; k < members.size(); ++k) {
            out[members[k]].space_error_z = 0.5 * (z_training[k] + z_error[k]);
        }
    }
    return out;
}

}  // namespace minispace
