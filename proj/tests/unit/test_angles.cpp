#include <doctest.h>

#include <cmath>

#include "minispace/angles.hpp"
#include "minispace/error.hpp"
#include "minispace/rng.hpp"

using namespace minispace;

TEST_SUITE("angles") {
    TEST_CASE("angular deviation examples") {
        CHECK(angular_deviation(10, 10) == 0.0);
        CHECK(angular_deviation(350, 10) == doctest::Approx(20.0));
        CHECK(angular_deviation(180, 0) == 180.0);
        CHECK(angular_deviation(-90, 270) == doctest::Approx(0.0));
        CHECK(angular_deviation(720 + 45, 0) == doctest::Approx(45.0));
    }

    TEST_CASE("non-finite input is rejected") {
        CHECK_THROWS_AS(angular_deviation(NAN, 0), DomainError);
        CHECK_THROWS_AS(angular_deviation(0, INFINITY), DomainError);
    }

    TEST_CASE("wrap_degrees lands in [0, 360)") {
        CHECK(wrap_degrees(360.0) == 0.0);
        CHECK(wrap_degrees(-1e-20) < 360.0);
        CHECK(wrap_degrees(-90.0) == doctest::Approx(270.0));
        CHECK(wrap_degrees(725.0) == doctest::Approx(5.0));
    }

    TEST_CASE("compass and egocentric bearings") {
        CHECK(compass_bearing({0, 0}, {0, 10}) == doctest::Approx(0.0));
        CHECK(compass_bearing({0, 0}, {10, 0}) == doctest::Approx(90.0));
        CHECK(compass_bearing({0, 0}, {0, -3}) == doctest::Approx(180.0));
        CHECK(compass_bearing({0, 0}, {-1, 0}) == doctest::Approx(270.0));
        CHECK(egocentric_bearing({0, 0}, {0, 10}, {10, 0}) == doctest::Approx(90.0));
        CHECK(egocentric_bearing({0, 0}, {0, 10}, {-10, 0}) == doctest::Approx(270.0));
        CHECK(egocentric_bearing({0, 0}, {0, 10}, {0, 20}) == doctest::Approx(0.0));
        CHECK_THROWS_AS(compass_bearing({1, 1}, {1, 1}), GeometryError);
    }

    TEST_CASE("axis clearance") {
        CHECK(axis_clearance(0.0) == 0.0);
        CHECK(axis_clearance(90.0) == 90.0);
        CHECK(axis_clearance(170.0) == doctest::Approx(10.0));
        CHECK(axis_clearance(355.0) == doctest::Approx(5.0));
        CHECK(axis_clearance(200.0) == doctest::Approx(20.0));
    }

    TEST_CASE("randomized symmetry, range and periodicity") {
        Rng rng(99);
        int failures = 0;
        for (int i = 0; i < 20000; ++i) {
            const double a = rng.uniform(-1000, 1000);
            const double b = rng.uniform(-1000, 1000);
            const double k = std::round(rng.uniform(-5, 5));
            const double d = angular_deviation(a, b);
            if (!(d >= 0.0 && d <= 180.0)) ++failures;
            if (std::abs(d - angular_deviation(b, a)) > 1e-9) ++failures;
            if (std::abs(d - angular_deviation(a + 360.0 * k, b)) > 1e-9) ++failures;
        }
        CHECK(failures == 0);
    }
}
