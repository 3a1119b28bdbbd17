#include <doctest.h>

#include <set>
#include <tuple>

#include "minispace/angles.hpp"
#include "minispace/error.hpp"
#include "minispace/taskgen.hpp"

using namespace minispace;

TEST_SUITE("taskgen") {
    TEST_CASE("weeks 1-2 rotation sequence: opposing pairs of 45/90") {
        for (int week : {1, 2}) {
            const auto steps = gen_rotation_sequence(week, 2, 1234);
            REQUIRE(steps.size() == 4);
            for (std::size_t i = 0; i < steps.size(); ++i) {
                CHECK((steps[i].magnitude_deg == 45 || steps[i].magnitude_deg == 90));
                CHECK((steps[i].sign == 1 || steps[i].sign == -1));
            }
            CHECK(steps[0].signed_deg() + steps[1].signed_deg() == 0);
            CHECK(steps[2].signed_deg() + steps[3].signed_deg() == 0);
        }
    }

    TEST_CASE("week 3 covers every magnitude once, each followed by its return") {
        const auto steps = gen_rotation_sequence(3, 5, 77);
        REQUIRE(steps.size() == 14);
        std::set<int> magnitudes;
        for (std::size_t i = 0; i < steps.size(); i += 2) {
            magnitudes.insert(steps[i].magnitude_deg);
            CHECK(steps[i + 1] == steps[i].negated());
        }
        CHECK(magnitudes == std::set<int>{45, 90, 135, 180, 225, 270, 315});
    }

    TEST_CASE("rotation sequence errors") {
        CHECK_THROWS_AS(gen_rotation_sequence(0, 2, 1), DomainError);
        CHECK_THROWS_AS(gen_rotation_sequence(4, 2, 1), DomainError);
        CHECK_THROWS_AS(gen_rotation_sequence(1, 0, 1), DomainError);
    }

    TEST_CASE("determinism") {
        CHECK(gen_rotation_sequence(1, 3, 5) == gen_rotation_sequence(1, 3, 5));
        CHECK(generate_plan(3, 11) == generate_plan(3, 11));
        CHECK(plan_to_json(generate_plan(2, 8)).dump() == plan_to_json(generate_plan(2, 8)).dump());
    }

    TEST_CASE("default maps") {
        const auto& m1 = default_map(1);
        const auto& m2 = default_map(2);
        const auto& m3 = default_map(3);
        CHECK(m1.landmarks.size() == 4);
        CHECK(m3.landmarks.size() == 7);
        CHECK(m1 == m2);
        for (const char* id : {"rocket", "tree", "cave"}) CHECK(m1.contains(id));
        for (const char* id : {"rocket", "tree", "cave", "antenna", "crystal", "crater", "dome"}) CHECK(m3.contains(id));
        std::vector<std::string> failures;
        validate_map(m3, failures);
        CHECK(failures.empty());
        CHECK(eligible_triples(m1).size() == 24);
        CHECK(eligible_triples(m3).size() == 210);
    }

    TEST_CASE("perspective trials: counts, distinctness, floor") {
        for (int week : {1, 2, 3}) {
            const auto& map = default_map(week);
            const auto trials = gen_perspective_trials(week, map, 31337);
            CHECK(trials.size() == static_cast<std::size_t>(week == 3 ? 16 : 6));
            std::set<std::tuple<std::string, std::string, std::string>> seen;
            for (const auto& t : trials) {
                CHECK(t.stand_at != t.face);
                CHECK(t.stand_at != t.point_to);
                CHECK(t.face != t.point_to);
                CHECK(seen.emplace(t.stand_at, t.face, t.point_to).second);
                const double b = egocentric_bearing(map.at(t.stand_at).position(), map.at(t.face).position(),
                                                    map.at(t.point_to).position());
                CHECK(axis_clearance(b) >= kBearingFloorDeg);
            }
        }
    }

    TEST_CASE("map/week mismatch") {
        LandmarkMap small = default_map(1);
        small.landmarks.pop_back();
        CHECK_THROWS_AS(gen_perspective_trials(1, small, 1), DomainError);
        CHECK_THROWS_AS(gen_perspective_trials(3, default_map(1), 1), DomainError);
    }

    TEST_CASE("property sweep over many seeds") {
        int failures = 0;
        for (std::uint64_t seed = 0; seed < 2000; ++seed) {
            const int week = 1 + static_cast<int>(seed % 3);
            const TaskPlan plan = generate_plan(week, seed);
            int cumulative = 0;
            for (std::size_t i = 0; i < plan.rotation_steps.size(); ++i) {
                const int v = plan.rotation_steps[i].signed_deg();
                if (v == 0 || v % 45 != 0 || std::abs(v) > 315) ++failures;
                if (week < 3 && std::abs(v) > 90) ++failures;
                cumulative += v;
                if (i % 2 == 1 && cumulative != 0) ++failures;
            }
            std::set<std::tuple<std::string, std::string, std::string>> seen;
            for (const auto& t : plan.perspective_trials) {
                if (!seen.emplace(t.stand_at, t.face, t.point_to).second) ++failures;
            }
            if (plan.movement_segments.empty()) ++failures;
        }
        CHECK(failures == 0);
    }

    TEST_CASE("map json round trip") {
        const auto& map = default_map(3);
        CHECK(map_from_json(nlohmann::json::parse(map_to_json(map).dump())) == map);
        CHECK_THROWS_AS(map_from_json(nlohmann::json::parse(R"({"map_id": 3})")), DomainError);
    }
}
