#include <doctest.h>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "minispace/error.hpp"
#include "minispace/stats/distributions.hpp"

using namespace minispace;
using namespace minispace::stats;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

double ref_beta(double a, double b, double x) { return static_cast<double>(boost::math::ibeta(Big(a), Big(b), Big(x))); }
double ref_t_two_sided(double t, double df) {
    const Big d(df);
    return static_cast<double>(boost::math::ibeta(d / 2, Big(0.5), d / (d + Big(t) * Big(t))));
}
double ref_f_sf(double f, double d1, double d2) {
    const Big a(d1), b(d2), x(f);
    return static_cast<double>(boost::math::ibetac(a / 2, b / 2, a * x / (a * x + b)));
}
double ref_chi2_sf(double x, double k) { return static_cast<double>(boost::math::gamma_q(Big(k) / 2, Big(x) / 2)); }
double ref_normal_sf(double z) { return static_cast<double>(boost::math::erfc(Big(z) / sqrt(Big(2))) / 2); }

}  // namespace

TEST_SUITE("distributions") {
    TEST_CASE("incomplete beta against a 50-digit reference") {
        double worst = 0.0;
        for (double a : {0.5, 1.0, 2.5, 7.0, 30.0, 150.0, 600.0}) {
            for (double b : {0.5, 1.0, 3.0, 12.0, 80.0, 535.0}) {
                for (double x : {1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999999}) {
                    worst = std::max(worst, std::abs(regularized_beta(a, b, x) - ref_beta(a, b, x)));
                }
            }
        }
        CHECK(worst < 1e-10);
    }

    TEST_CASE("incomplete gamma against a 50-digit reference") {
        double worst = 0.0;
        for (double a : {0.5, 1.0, 1.5, 4.0, 10.0, 45.0, 200.0}) {
            for (double x : {1e-4, 0.1, 0.9, 2.0, 5.0, 12.0, 50.0, 210.0, 400.0}) {
                const double ref = static_cast<double>(boost::math::gamma_q(Big(a), Big(x)));
                worst = std::max(worst, std::abs(regularized_gamma_q(a, x) - ref));
                worst = std::max(worst, std::abs(regularized_gamma_p(a, x) - (1.0 - ref)));
            }
        }
        CHECK(worst < 1e-10);
    }

    TEST_CASE("t, F, chi-square and normal tails") {
        double worst = 0.0;
        for (double df : {1.0, 2.0, 5.0, 30.0, 87.0, 184.0, 1070.0}) {
            for (double t : {0.0, 0.3, 1.0, 1.96, 3.13, 6.69, 15.0}) {
                worst = std::max(worst, std::abs(t_two_sided_p(t, df) - ref_t_two_sided(t, df)));
                worst = std::max(worst, std::abs(t_two_sided_p(-t, df) - ref_t_two_sided(t, df)));
            }
        }
        for (double d1 : {1.0, 2.0, 3.0, 6.0}) {
            for (double d2 : {4.0, 87.0, 174.0, 1070.0}) {
                for (double f : {0.05, 0.5, 1.0, 2.26, 5.45, 14.01, 131.28}) {
                    worst = std::max(worst, std::abs(f_sf(f, d1, d2) - ref_f_sf(f, d1, d2)));
                    worst = std::max(worst, std::abs(f_cdf(f, d1, d2) - (1.0 - ref_f_sf(f, d1, d2))));
                }
            }
        }
        for (double k : {1.0, 2.0, 3.0, 10.0, 50.0}) {
            for (double x : {0.01, 0.5, 2.0, 7.8, 20.0, 90.0}) {
                worst = std::max(worst, std::abs(chi2_sf(x, k) - ref_chi2_sf(x, k)));
            }
        }
        for (double z : {-4.0, -1.0, 0.0, 0.5, 1.96, 3.3, 8.0}) {
            worst = std::max(worst, std::abs(normal_sf(z) - ref_normal_sf(z)));
            worst = std::max(worst, std::abs(normal_cdf(z) - ref_normal_sf(-z)));
        }
        CHECK(worst < 1e-10);
    }

    TEST_CASE("normal quantile against a 50-digit reference") {
        double worst = 0.0;
        for (double p : {1e-12, 1e-6, 0.001, 0.02, 0.024, 0.025, 0.2, 0.5, 0.7, 0.975, 0.98, 0.999, 1 - 1e-9}) {
            const double ref = static_cast<double>(-sqrt(Big(2)) * boost::math::erfc_inv(Big(2) * Big(p)));
            worst = std::max(worst, std::abs(normal_quantile(p) - ref) / std::max(1.0, std::abs(ref)));
        }
        CHECK(worst < 1e-12);
        CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
    }

    TEST_CASE("F quantile inverts the CDF") {
        for (double p : {0.025, 0.5, 0.975}) {
            for (double d1 : {2.0, 92.0}) {
                for (double d2 : {5.5, 184.0}) {
                    CHECK(f_cdf(f_quantile(p, d1, d2), d1, d2) == doctest::Approx(p).epsilon(1e-10));
                }
            }
        }
    }

    TEST_CASE("edge cases and domain errors") {
        CHECK(regularized_beta(2, 3, 0) == 0.0);
        CHECK(regularized_beta(2, 3, 1) == 1.0);
        CHECK(f_sf(0.0, 2, 10) == 1.0);
        CHECK(chi2_sf(0.0, 3) == 1.0);
        CHECK(t_two_sided_p(0.0, 10) == doctest::Approx(1.0));
        CHECK_THROWS_AS(regularized_beta(-1, 1, 0.5), DomainError);
        CHECK_THROWS_AS(regularized_beta(1, 1, 1.5), DomainError);
        CHECK_THROWS_AS(t_two_sided_p(1.0, 0.0), DomainError);
        CHECK_THROWS_AS(f_quantile(1.0, 2, 3), DomainError);
    }
}
