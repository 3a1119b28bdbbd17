#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include "minispace/angles.hpp"
#include "minispace/error.hpp"
#include "minispace/questionnaires.hpp"
#include "minispace/rng.hpp"
#include "minispace/stats/icc.hpp"
#include "minispace/studysim/dataset.hpp"
#include "minispace/taskgen.hpp"

namespace minispace::sim {

namespace {

constexpr double kMaxPerspectiveError = 150.0;
constexpr std::size_t kComponents = 3;  // rotation, movement, perspective

// Stream tags for Rng::derive; each purpose gets its own range.
constexpr std::uint64_t kPersonStream = 0;
constexpr std::uint64_t kTraitStream = 1ULL << 40;
constexpr std::uint64_t kPlanStream = 2ULL << 40;
constexpr std::uint64_t kMocaStream = 3ULL << 40;
constexpr std::uint64_t kCohortStream = 4ULL << 40;
constexpr std::uint64_t kCalibrationSeed = 0x5EED5EEDULL;

double canon(double v) { return canonical_number(v); }

double canon_deg(double v) {
    const double c = canonical_number(wrap_degrees(v));
    return c >= 360.0 ? 0.0 : c;
}

struct LogNormal {
    double mu = 0.0;
    double sigma = 0.0;
};

LogNormal lognormal_for(MeanSd t) {
    const double cv = t.sd / t.mean;
    const double s2 = std::log1p(cv * cv);
    return {std::log(t.mean) - 0.5 * s2, std::sqrt(s2)};
}

// Stable latent traits of one participant: overall ability and one
// component-specific trait per measure.
struct Traits {
    double ability = 0.0;
    std::array<double, kComponents> component{};
};

// Per-week random parts, drawn in a fixed order from the person stream.
struct WeekNoise {
    double performance = 0.0;
    std::array<double, kComponents> component{};
};

struct WeekValues {
    double rotation_time_s = 0.0;
    double movement_time_s = 0.0;
    double perspective_error_deg = 0.0;
};

struct Person {
    AgeGroup group = AgeGroup::young;
    double shift = 0.0;  // latent mean shift (gender, supervision)
    Traits traits;
    std::array<WeekNoise, 3> weeks{};
};

WeekValues week_values(const CohortConfig& c, const Person& p, int week, double stability) {
    const auto& noise = p.weeks[static_cast<std::size_t>(week - 1)];
    const double stable = std::sqrt(stability);
    const double varying = std::sqrt(1.0 - stability);
    const double performance = stable * p.traits.ability + varying * noise.performance;
    const double unique = std::sqrt(1.0 - c.loading * c.loading);
    std::array<double, kComponents> value{};
    const std::array<const WeeklyTargets*, kComponents> targets{&c.rotation_time_s, &c.movement_time_s,
                                                                 &c.perspective_error_deg};
    for (std::size_t k = 0; k < kComponents; ++k) {
        const double own = stable * p.traits.component[k] + varying * noise.component[k];
        const double u = c.loading * performance + unique * own;
        const LogNormal ln = lognormal_for(c.target(*targets[k], p.group, week));
        value[k] = std::exp(ln.mu + ln.sigma * (c.noise_scale * u + c.loading * p.shift));
    }
    return {value[0], value[1], std::min(value[2], kMaxPerspectiveError)};
}

// Stable traits for a block of participants that share a design cell.
std::vector<Traits> draw_traits(Rng& rng, std::size_t n) {
    std::vector<Traits> traits(n);
    for (auto& t : traits) {
        t.ability = rng.normal();
        for (auto& c : t.component) c = rng.normal();
    }
    return traits;
}

void draw_week_noise(Rng& rng, Person& p) {
    for (auto& w : p.weeks) {
        w.performance = rng.normal();
        for (auto& c : w.component) c = rng.normal();
    }
}

// Make already-centered column vectors mutually orthogonal, each with sum of
// squares `ss`. Gram-Schmidt in column order.
void orthonormalize(std::vector<std::vector<double>>& cols, double ss) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
        auto& v = cols[j];
        for (std::size_t i = 0; i < j; ++i) {
            const auto& u = cols[i];
            const double dot = std::inner_product(v.begin(), v.end(), u.begin(), 0.0) / ss;
            for (std::size_t r = 0; r < v.size(); ++r) v[r] -= dot * u[r];
        }
        const double norm = std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
        if (norm <= 0.0) continue;
        const double scale = std::sqrt(ss / norm);
        for (auto& x : v) x *= scale;
    }
}

// Balance the random parts of the unsupervised cohort. Traits are centered
// within every stratum that carries a planted between-person effect (age
// group, gender), so chance confounding with those effects is removed, and
// get exact sample moments overall. With no planted effects only the cohort
// mean is fixed and cell means vary freely. Weekly noise sums to zero within
// each person and is orthogonal across measures. Together this keeps the
// stable share of each sample close to its design value.
void balance_cohort(const CohortConfig& c, std::span<Person> people) {
    const std::size_t n = people.size();
    std::map<std::pair<int, double>, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < n; ++i) {
        const int group = c.effects.age != 0.0 ? static_cast<int>(people[i].group) : 0;
        strata[{group, people[i].shift}].push_back(i);
    }
    if (n <= kComponents + strata.size() + 1) return;
    std::vector<std::vector<double>> traits(kComponents + 1, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        traits[0][i] = people[i].traits.ability;
        for (std::size_t k = 0; k < kComponents; ++k) traits[k + 1][i] = people[i].traits.component[k];
    }
    for (auto& col : traits) {
        for (const auto& [key, members] : strata) {
            double mean = 0.0;
            for (auto i : members) mean += col[i];
            mean /= static_cast<double>(members.size());
            for (auto i : members) col[i] -= mean;
        }
    }
    orthonormalize(traits, static_cast<double>(n - strata.size()));
    for (std::size_t i = 0; i < n; ++i) {
        people[i].traits.ability = traits[0][i];
        for (std::size_t k = 0; k < kComponents; ++k) people[i].traits.component[k] = traits[k + 1][i];
    }

    std::vector<std::vector<double>> noise(kComponents + 1, std::vector<double>(3 * n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t w = 0; w < 3; ++w) {
            noise[0][3 * i + w] = people[i].weeks[w].performance;
            for (std::size_t k = 0; k < kComponents; ++k) noise[k + 1][3 * i + w] = people[i].weeks[w].component[k];
        }
    }
    for (auto& col : noise) {
        for (std::size_t i = 0; i < n; ++i) {
            const double mean = (col[3 * i] + col[3 * i + 1] + col[3 * i + 2]) / 3.0;
            for (std::size_t w = 0; w < 3; ++w) col[3 * i + w] -= mean;
        }
    }
    orthonormalize(noise, 3.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t w = 0; w < 3; ++w) {
            people[i].weeks[w].performance = noise[0][3 * i + w];
            for (std::size_t k = 0; k < kComponents; ++k) people[i].weeks[w].component[k] = noise[k + 1][3 * i + w];
        }
    }
}

double latent_shift(const CohortConfig& c, Gender g, AgeGroup group, Condition cond) {
    double s = g == Gender::female ? c.gender_shift : 0.0;
    if (cond == Condition::supervised) s += c.supervision_shift[static_cast<std::size_t>(group)];
    return s;
}

// ICC(2,1) of weekly SPACE error for one cohort at a given stability.
double cohort_icc(const CohortConfig& c, double stability, const std::vector<Person>& people) {
    const std::size_t n = people.size();
    std::vector<MetricRecord> records;
    records.reserve(n * 3);
    for (std::size_t i = 0; i < n; ++i) {
        for (int week = 1; week <= 3; ++week) {
            const WeekValues v = week_values(c, people[i], week, stability);
            MetricRecord r;
            r.participant_id = std::to_string(i);
            r.week = week;
            r.rotation_time_s = v.rotation_time_s;
            r.movement_time_s = v.movement_time_s;
            r.total_training_time_s = v.rotation_time_s + v.movement_time_s;
            r.perspective_error_deg = v.perspective_error_deg;
            records.push_back(std::move(r));
        }
    }
    const auto z = composite_space_error(records);
    std::vector<std::vector<double>> rows(n, std::vector<double>(3));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t w = 0; w < 3; ++w) rows[i][w] = *z[i * 3 + w].space_error_z;
    }
    return stats::icc_two_way(rows).icc_single;
}

// Expected ICC over replicate cohorts of the configured size. Averaging at
// the real sample size absorbs the small-sample bias of the estimator.
double pilot_icc(const CohortConfig& c, double stability, const std::vector<std::vector<Person>>& cohorts) {
    double sum = 0.0;
    for (const auto& people : cohorts) sum += cohort_icc(c, stability, people);
    return sum / static_cast<double>(cohorts.size());
}

std::string calibration_key(const CohortConfig& c) {
    auto doc = c.to_json();
    doc.erase("seed");
    doc.erase("name");
    doc.erase("supervised");
    doc.erase("questionnaires");
    doc.erase("moca");
    return doc.dump();
}

// Truncated normal age by rejection, clamped after 1000 attempts.
int draw_age(Rng& rng, double mean, double sd, int lo, int hi) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const int age = static_cast<int>(std::lround(rng.normal(mean, sd)));
        if (age >= lo && age <= hi) return age;
    }
    return std::clamp(static_cast<int>(std::lround(mean)), lo, hi);
}

std::string iso_date(int year, int day_of_year, int hour, int minute) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    int month = 0;
    int day = day_of_year;
    while (true) {
        const int len = kDays[month] + (month == 1 && leap ? 1 : 0);
        if (day < len) break;
        day -= len;
        month = (month + 1) % 12;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:00Z", year, month + 1, day + 1, hour, minute);
    return buf;
}

std::vector<Sample> rotation_samples(double start, double end, double from_heading, double delta) {
    std::vector<Sample> out;
    const double span = end - start;
    for (int k = 0;; ++k) {
        const double t = start + 0.25 * k;
        if (k > 0 && t >= end) break;
        Sample s;
        s.t_s = canon(t);
        const double frac = span > 0.0 ? (t - start) / span : 1.0;
        s.heading_deg = canon_deg(from_heading + delta * frac);
        s.touch = true;
        out.push_back(s);
    }
    return out;
}

std::vector<Sample> forward_samples(double start, double end, double heading, Point2 from, double distance) {
    std::vector<Sample> out;
    const double span = end - start;
    const double rad = heading * std::numbers::pi / 180.0;
    for (int k = 0;; ++k) {
        const double t = start + 0.25 * k;
        if (k > 0 && t >= end) break;
        const double frac = span > 0.0 ? (t - start) / span : 1.0;
        Sample s;
        s.t_s = canon(t);
        s.heading_deg = canon_deg(heading);
        s.x_m = canon(from.x_m + distance * frac * std::sin(rad));
        s.y_m = canon(from.y_m + distance * frac * std::cos(rad));
        s.touch = true;
        out.push_back(s);
    }
    return out;
}

// Split `total` into parts proportional to `weights`, returned as canonical
// cumulative boundaries starting at `start`.
std::vector<double> boundaries(double start, double total, const std::vector<double>& weights) {
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<double> out{canon(start)};
    double acc = 0.0;
    for (double w : weights) {
        acc += w;
        out.push_back(canon(start + total * acc / sum));
    }
    return out;
}

// Per-trial absolute deviations with mean exactly `mean_error`, none above 180.
std::vector<double> trial_deviations(Rng& rng, std::size_t n, double mean_error, double noise_scale) {
    std::vector<double> w(n);
    for (auto& v : w) v = std::max(0.05, 1.0 + noise_scale * 0.6 * rng.normal());
    std::vector<double> d(n, 0.0);
    std::vector<bool> capped(n, false);
    double budget = mean_error * static_cast<double>(n);
    for (int pass = 0; pass < 64; ++pass) {
        double wsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!capped[i]) wsum += w[i];
        }
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (capped[i]) continue;
            d[i] = budget * w[i] / wsum;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!capped[i] && d[i] > 180.0) {
                capped[i] = true;
                d[i] = 180.0;
                budget -= 180.0;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return d;
}

int clamp_round(double v, int lo, int hi, int step = 1) {
    const double r = std::round(v / step) * step;
    return static_cast<int>(std::clamp(r, static_cast<double>(lo), static_cast<double>(hi)));
}

struct QuestionnaireLatent {
    std::array<double, 5> person{};
};

QuestionnaireResponses make_questionnaires(const CohortConfig& c, const Participant& p, int week, Rng& rng,
                                           const QuestionnaireLatent& latent) {
    const auto& qm = c.questionnaires;
    const std::array<const QuestionnaireMeasure*, 5> measures{&qm.sus, &qm.nasa_tlx, &qm.ueq_attractiveness,
                                                              &qm.ueq_pragmatic, &qm.ueq_hedonic};
    std::array<double, 5> target{};
    const double stable = std::sqrt(qm.person_share);
    const double varying = std::sqrt(1.0 - qm.person_share);
    for (std::size_t m = 0; m < measures.size(); ++m) {
        const MeanSd t = c.target(measures[m]->targets, p.age_group, week);
        double shift = 0.0;
        if (p.gender == Gender::female) shift += measures[m]->gender_shift;
        if (p.condition == Condition::supervised) shift += measures[m]->supervised_shift;
        const double z = stable * latent.person[m] + varying * rng.normal();
        target[m] = t.mean + t.sd * (c.noise_scale * z + shift);
    }
    const double item_noise = c.noise_scale;
    QuestionnaireResponses q;
    // SUS: each item contributes 0-4; odd items are scored raw - 1, even items 5 - raw.
    const double contribution = std::clamp(target[0], 0.0, 100.0) / 25.0;
    for (int i = 0; i < 10; ++i) {
        const int cval = clamp_round(contribution + item_noise * 0.6 * rng.normal(), 0, 4);
        q.sus.push_back(i % 2 == 0 ? cval + 1 : 5 - cval);
    }
    for (int i = 0; i < 6; ++i) q.nasa_tlx.push_back(clamp_round(target[1] + item_noise * 8.0 * rng.normal(), 0, 100, 5));
    const UeqKey& key = UeqKey::standard();
    for (const auto& item : key.items) {
        double t = target[2];
        switch (item.scale) {
            case UeqScale::attractiveness: t = target[2]; break;
            case UeqScale::perspicuity:
            case UeqScale::efficiency:
            case UeqScale::dependability: t = target[3]; break;
            case UeqScale::stimulation:
            case UeqScale::novelty: t = target[4]; break;
        }
        const int v = clamp_round(t + item_noise * 0.7 * rng.normal(), -3, 3);
        q.ueq.push_back(item.polarity > 0 ? v + 4 : 4 - v);
    }
    return q;
}

const std::array<const char*, 3> kDevices{"iPad (9th generation)", "iPad Pro 11-inch", "iPad (8th generation)"};

SessionLog build_log(const CohortConfig& c, const Participant& p, std::size_t index, int week, const WeekValues& v,
                     Rng& rng) {
    const std::uint64_t plan_seed = Rng::derive(c.seed, kPlanStream + index * 4 + static_cast<std::uint64_t>(week)).next_u64();
    const TaskPlan plan = generate_plan(week, plan_seed);
    SessionLog log;
    log.participant_id = p.id;
    log.week = week;
    const bool supervised = p.condition == Condition::supervised;
    const int year = supervised ? 2021 : 2024;
    const int day = 40 + static_cast<int>(index % 60) + 7 * (week - 1);
    log.started_at = iso_date(year, day, 9 + static_cast<int>(rng.below(10)), static_cast<int>(rng.below(60)));
    log.device = supervised ? "lab iPad" : kDevices[rng.below(kDevices.size())];
    log.plan_seed = plan_seed;
    log.map = plan.map;

    double heading = 0.0;
    // Rotation phase: durations proportional to turn size, with jitter.
    std::vector<double> weights;
    for (const auto& step : plan.rotation_steps) {
        weights.push_back((1.0 + step.magnitude_deg / 90.0) * std::max(0.2, 1.0 + c.noise_scale * 0.15 * rng.normal()));
    }
    auto bounds = boundaries(0.0, v.rotation_time_s, weights);
    for (std::size_t i = 0; i < plan.rotation_steps.size(); ++i) {
        const auto& step = plan.rotation_steps[i];
        TrialEvent e;
        e.index = static_cast<int>(i);
        e.start_t_s = bounds[i];
        e.end_t_s = bounds[i + 1];
        e.payload = RotationPayload{static_cast<double>(step.signed_deg())};
        e.samples = rotation_samples(e.start_t_s, e.end_t_s, heading, step.signed_deg());
        heading = wrap_degrees(heading + step.signed_deg());
        log.rotation_trials.push_back(std::move(e));
    }

    // Movement phase: forward moves weighted by distance, then the repeats.
    struct Piece {
        bool forward;
        double distance;
        RotationStep step;
    };
    std::vector<Piece> pieces;
    weights.clear();
    for (const auto& seg : plan.movement_segments) {
        pieces.push_back({true, seg.forward_distance_m, {}});
        weights.push_back((seg.forward_distance_m / 2.5) * std::max(0.2, 1.0 + c.noise_scale * 0.15 * rng.normal()));
        for (const auto& step : seg.rotation_repeat) {
            pieces.push_back({false, 0.0, step});
            weights.push_back((0.5 + step.magnitude_deg / 90.0) * std::max(0.2, 1.0 + c.noise_scale * 0.15 * rng.normal()));
        }
    }
    bounds = boundaries(log.rotation_trials.empty() ? 0.0 : log.rotation_trials.back().end_t_s, v.movement_time_s, weights);
    Point2 position{0.0, 0.0};
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        TrialEvent e;
        e.index = static_cast<int>(i);
        e.start_t_s = bounds[i];
        e.end_t_s = bounds[i + 1];
        if (pieces[i].forward) {
            e.payload = ForwardPayload{pieces[i].distance};
            e.samples = forward_samples(e.start_t_s, e.end_t_s, heading, position, pieces[i].distance);
            const double rad = heading * std::numbers::pi / 180.0;
            position.x_m += pieces[i].distance * std::sin(rad);
            position.y_m += pieces[i].distance * std::cos(rad);
        } else {
            const int delta = pieces[i].step.signed_deg();
            e.payload = RotationPayload{static_cast<double>(delta)};
            e.samples = rotation_samples(e.start_t_s, e.end_t_s, heading, delta);
            heading = wrap_degrees(heading + delta);
        }
        log.movement_trials.push_back(std::move(e));
    }

    // Perspective taking: deviations averaging exactly the drawn error.
    const auto dev = trial_deviations(rng, plan.perspective_trials.size(), v.perspective_error_deg, c.noise_scale);
    double t = bounds.back();
    for (std::size_t i = 0; i < plan.perspective_trials.size(); ++i) {
        const auto& spec = plan.perspective_trials[i];
        const double truth = perspective_truth(log.map, spec.stand_at, spec.face, spec.point_to);
        const double sign = rng.coin() ? 1.0 : -1.0;
        const double rt = canon(std::exp(std::log(6.0) + c.noise_scale * 0.35 * rng.normal()));
        TrialEvent e;
        e.index = static_cast<int>(i);
        e.start_t_s = canon(t);
        e.end_t_s = canon(t + rt);
        e.payload = PerspectivePayload{spec.stand_at, spec.face, spec.point_to, canon_deg(truth + sign * dev[i]), rt};
        t = e.end_t_s;
        log.perspective_trials.push_back(std::move(e));
    }
    return log;
}

}  // namespace

double calibrated_stability(const CohortConfig& c) {
    static std::mutex mutex;
    static std::map<std::string, double> cache;
    const std::string key = calibration_key(c);
    {
        std::lock_guard lock(mutex);
        if (const auto it = cache.find(key); it != cache.end()) return it->second;
    }
    // Replicate cohorts of the unsupervised cells with fixed random numbers.
    constexpr int kReplicates = 150;
    Rng rng(kCalibrationSeed);
    std::vector<std::vector<Person>> people(kReplicates);
    for (auto& cohort : people) {
        for (const auto& cell : c.cells) {
            const auto n = static_cast<std::size_t>(c.cell_size(cell));
            const auto traits = draw_traits(rng, n);
            for (std::size_t i = 0; i < n; ++i) {
                Person p;
                p.group = cell.age_group;
                p.shift = latent_shift(c, cell.gender, cell.age_group, Condition::unsupervised);
                p.traits = traits[i];
                draw_week_noise(rng, p);
                cohort.push_back(p);
            }
        }
        if (c.balanced) balance_cohort(c, cohort);
    }
    double result;
    double lo = 0.0, hi = 1.0;
    if (pilot_icc(c, hi, people) <= c.between_person_share) {
        result = hi;
    } else if (pilot_icc(c, lo, people) >= c.between_person_share) {
        result = lo;
    } else {
        for (int i = 0; i < 40; ++i) {
            const double mid = 0.5 * (lo + hi);
            (pilot_icc(c, mid, people) < c.between_person_share ? lo : hi) = mid;
        }
        result = 0.5 * (lo + hi);
    }
    std::lock_guard lock(mutex);
    cache.emplace(key, result);
    return result;
}

StudyDataset simulate_cohort(const CohortConfig& c) {
    c.validate();
    const double stability = c.noise_scale > 0.0 ? calibrated_stability(c) : 0.0;
    Rng cohort_rng = Rng::derive(c.seed, kCohortStream);

    std::vector<Participant> participants;
    std::vector<Person> people;
    std::vector<std::uint64_t> block_of;  // trait block per participant

    // Unsupervised cohort: fixed cells.
    std::size_t unsupervised_total = 0;
    for (const auto& cell : c.cells) unsupervised_total += static_cast<std::size_t>(c.cell_size(cell));
    const int width = unsupervised_total >= 1000 ? 4 : 3;
    std::size_t block = 0;
    for (const auto& cell : c.cells) {
        const auto n = static_cast<std::size_t>(c.cell_size(cell));
        Rng trait_rng = Rng::derive(c.seed, kTraitStream + block);
        const auto traits = draw_traits(trait_rng, n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t index = participants.size();
            Rng rng = Rng::derive(c.seed, kPersonStream + index);
            Participant p;
            char id[16];
            std::snprintf(id, sizeof id, "U%0*zu", width, index + 1);
            p.id = id;
            p.study = c.name;
            p.condition = Condition::unsupervised;
            p.age = draw_age(rng, cell.age_mean, cell.age_sd, cell.age_min, cell.age_max);
            p.age_group = cell.age_group;
            p.gender = cell.gender;
            Person person;
            person.group = cell.age_group;
            person.shift = latent_shift(c, p.gender, p.age_group, p.condition);
            person.traits = traits[i];
            draw_week_noise(rng, person);
            participants.push_back(p);
            people.push_back(person);
        }
        ++block;
    }
    if (c.balanced) balance_cohort(c, people);
    // Exact education split, assigned at random.
    auto assign_education = [&](std::size_t from, std::size_t to) {
        const std::size_t n = to - from;
        const auto n_uni = static_cast<std::size_t>(std::lround(c.university_share * static_cast<double>(n)));
        std::vector<Education> edu(n, Education::high_school);
        std::fill(edu.begin(), edu.begin() + static_cast<std::ptrdiff_t>(n_uni), Education::university);
        cohort_rng.shuffle(std::span<Education>(edu));
        for (std::size_t i = 0; i < n; ++i) participants[from + i].education = edu[i];
    };
    assign_education(0, participants.size());

    // Supervised proxies: one week-1 session each.
    if (c.supervised_enabled) {
        std::size_t serial = 0;
        for (const auto& study : c.supervised) {
            const std::size_t from = participants.size();
            const auto n = static_cast<std::size_t>(study.n_female + study.n_male);
            std::vector<Gender> genders(n, Gender::male);
            std::fill(genders.begin(), genders.begin() + study.n_female, Gender::female);
            cohort_rng.shuffle(std::span<Gender>(genders));
            Rng trait_rng = Rng::derive(c.seed, kTraitStream + block++);
            const auto traits = draw_traits(trait_rng, n);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t index = participants.size();
                Rng rng = Rng::derive(c.seed, kPersonStream + index);
                Participant p;
                char id[16];
                std::snprintf(id, sizeof id, "S%04zu", ++serial);
                p.id = id;
                p.study = study.name;
                p.condition = Condition::supervised;
                p.age = draw_age(rng, study.age_mean, study.age_sd, study.age_min, study.age_max);
                p.age_group = age_group_for_age(p.age);
                p.gender = genders[i];
                Person person;
                person.group = p.age_group;
                person.shift = latent_shift(c, p.gender, p.age_group, p.condition);
                person.traits = traits[i];
                draw_week_noise(rng, person);
                participants.push_back(p);
                people.push_back(person);
            }
            assign_education(from, participants.size());
        }
    }

    // Session logs and questionnaires.
    std::vector<SessionLog> logs;
    for (std::size_t i = 0; i < participants.size(); ++i) {
        const Participant& p = participants[i];
        Rng rng = Rng::derive(c.seed, kPersonStream + i);
        rng.next_u64();  // keep the log stream distinct from the demographic draws
        bool with_q = p.condition == Condition::unsupervised;
        if (p.condition == Condition::supervised) {
            for (const auto& study : c.supervised) {
                if (study.name == p.study) with_q = study.questionnaires;
            }
        }
        QuestionnaireLatent qlatent;
        Rng qrng = Rng::derive(rng.next_u64(), 7);
        for (auto& v : qlatent.person) v = qrng.normal();
        const int weeks = p.condition == Condition::unsupervised ? 3 : 1;
        for (int week = 1; week <= weeks; ++week) {
            const WeekValues v = week_values(c, people[i], week, stability);
            SessionLog log = build_log(c, p, i, week, v, rng);
            if (with_q) log.questionnaires = make_questionnaires(c, p, week, qrng, qlatent);
            logs.push_back(std::move(log));
        }
    }

    StudyDataset data = assemble_dataset(participants, std::move(logs));

    // MoCA from the observed reference-week SPACE error.
    const auto z = reference_space_error(data, c.moca.reference_week);
    std::map<std::string, double> zmap(z.begin(), z.end());
    for (std::size_t i = 0; i < data.participants.size(); ++i) {
        Participant& p = data.participants[i];
        Rng rng = Rng::derive(c.seed, kMocaStream + i);
        const double zi = zmap.at(p.id);
        const double raw = c.moca.intercept + c.moca.age * p.age + (p.gender == Gender::male ? c.moca.male : 0.0) +
                           (p.education == Education::university ? c.moca.university : 0.0) + c.moca.slope * zi +
                           c.noise_scale * c.moca.noise_sd * rng.normal();
        p.moca_total = clamp_round(raw, 0, 30);
    }
    return data;
}

}  // namespace minispace::sim
