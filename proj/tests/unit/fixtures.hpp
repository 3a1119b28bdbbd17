#pragma once

#include <cstdio>
#include <string>

#include "minispace/angles.hpp"
#include "minispace/metrics.hpp"
#include "minispace/sessionlog.hpp"
#include "minispace/taskgen.hpp"

namespace fixtures {

using namespace minispace;

inline std::vector<Sample> samples_between(double start, double end, double heading, bool touch = false,
                                           bool positioned = false) {
    std::vector<Sample> out;
    for (double t = start; t <= end + 1e-9; t += 0.25) {
        Sample s;
        s.t_s = t;
        s.heading_deg = heading;
        s.touch = touch;
        if (positioned) {
            s.x_m = 0.5 * (t - start);
            s.y_m = 0.0;
        }
        out.push_back(s);
    }
    return out;
}

// A valid log built directly from a generated plan. Every perspective
// response is off by `offset_deg` clockwise; `pace` stretches training trials.
inline SessionLog make_log(const std::string& pid, int week, std::uint64_t seed, double offset_deg = 10.0,
                           bool with_questionnaires = true, double pace = 1.0) {
    const TaskPlan plan = generate_plan(week, seed);
    SessionLog log;
    log.participant_id = pid;
    log.week = week;
    char stamp[32];
    std::snprintf(stamp, sizeof stamp, "2024-03-%02dT10:15:00Z", 4 + 7 * (week - 1));
    log.started_at = stamp;
    log.device = "iPad (9th generation)";
    log.plan_seed = seed;
    log.map = plan.map;

    double t = 0.0;
    double heading = 0.0;
    for (const auto& step : plan.rotation_steps) {
        TrialEvent e;
        e.index = static_cast<int>(log.rotation_trials.size());
        e.start_t_s = t;
        e.end_t_s = t + pace * (2.0 + step.magnitude_deg / 90.0);
        e.payload = RotationPayload{static_cast<double>(step.signed_deg())};
        heading = wrap_degrees(heading + step.signed_deg());
        e.samples = samples_between(e.start_t_s, e.end_t_s, heading);
        t = e.end_t_s;
        log.rotation_trials.push_back(std::move(e));
    }
    for (const auto& seg : plan.movement_segments) {
        TrialEvent fwd;
        fwd.index = static_cast<int>(log.movement_trials.size());
        fwd.start_t_s = t;
        fwd.end_t_s = t + pace * seg.forward_distance_m;
        fwd.payload = ForwardPayload{seg.forward_distance_m};
        fwd.samples = samples_between(fwd.start_t_s, fwd.end_t_s, heading, true, true);
        t = fwd.end_t_s;
        log.movement_trials.push_back(std::move(fwd));
        for (const auto& step : seg.rotation_repeat) {
            TrialEvent e;
            e.index = static_cast<int>(log.movement_trials.size());
            e.start_t_s = t;
            e.end_t_s = t + pace * 1.5;
            e.payload = RotationPayload{static_cast<double>(step.signed_deg())};
            heading = wrap_degrees(heading + step.signed_deg());
            e.samples = samples_between(e.start_t_s, e.end_t_s, heading);
            t = e.end_t_s;
            log.movement_trials.push_back(std::move(e));
        }
    }
    for (const auto& spec : plan.perspective_trials) {
        TrialEvent e;
        e.index = static_cast<int>(log.perspective_trials.size());
        e.start_t_s = t;
        e.end_t_s = t + 6.0;
        const double truth = perspective_truth(log.map, spec.stand_at, spec.face, spec.point_to);
        e.payload = PerspectivePayload{spec.stand_at, spec.face, spec.point_to, wrap_degrees(truth + offset_deg), 5.5};
        t = e.end_t_s;
        log.perspective_trials.push_back(std::move(e));
    }
    if (with_questionnaires) {
        QuestionnaireResponses q;
        q.sus = {4, 2, 4, 2, 4, 2, 4, 2, 4, 2};
        q.nasa_tlx = {10, 20, 30, 40, 50, 60};
        q.ueq.assign(26, 5);
        log.questionnaires = q;
    }
    return canonicalized(log);
}

// Two participants over three weeks with distinct plans and pointing offsets,
// so every week can be standardized.
inline std::vector<SessionLog> small_batch(bool with_questionnaires = true) {
    std::vector<SessionLog> out;
    for (int p = 0; p < 2; ++p) {
        for (int week = 1; week <= 3; ++week) {
            out.push_back(make_log(p == 0 ? "P01" : "P02", week, 100 + 17 * p + week, p == 0 ? 8.0 : 21.0,
                                   with_questionnaires, p == 0 ? 1.0 : 1.5));
        }
    }
    return out;
}

}  // namespace fixtures
