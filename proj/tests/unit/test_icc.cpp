#include <doctest.h>

#include <cmath>

#include "minispace/error.hpp"
#include "minispace/rng.hpp"
#include "minispace/stats/icc.hpp"

using namespace minispace;
using namespace minispace::stats;

namespace {

struct Ms {
    double rows, cols, error;
};

// Mean squares from raw totals: SS = sum(T_i^2)/k - T^2/N etc.
Ms oracle_ms(const std::vector<std::vector<double>>& m) {
    const double n = static_cast<double>(m.size());
    const double k = static_cast<double>(m[0].size());
    double total = 0, total_sq = 0;
    std::vector<double> col(m[0].size(), 0.0);
    double row_part = 0;
    for (const auto& row : m) {
        double rs = 0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            rs += row[j];
            col[j] += row[j];
            total_sq += row[j] * row[j];
        }
        total += rs;
        row_part += rs * rs;
    }
    const double cf = total * total / (n * k);
    double col_part = 0;
    for (double c : col) col_part += c * c;
    const double ss_rows = row_part / k - cf;
    const double ss_cols = col_part / n - cf;
    const double ss_err = total_sq - cf - ss_rows - ss_cols;
    return {ss_rows / (n - 1), ss_cols / (k - 1), ss_err / ((n - 1) * (k - 1))};
}

std::vector<std::vector<double>> simulate(Rng& rng, std::size_t n, std::size_t k, double icc) {
    std::vector<std::vector<double>> m(n, std::vector<double>(k));
    std::vector<double> session(k);
    for (auto& s : session) s = rng.normal(0, 0.2);
    for (auto& row : m) {
        const double p = rng.normal() * std::sqrt(icc);
        for (std::size_t j = 0; j < k; ++j) row[j] = p + session[j] + rng.normal() * std::sqrt(1 - icc - 0.04);
    }
    return m;
}

}  // namespace

TEST_SUITE("icc") {
    TEST_CASE("mean squares and coefficients against the oracle") {
        Rng rng(8);
        for (int trial = 0; trial < 50; ++trial) {
            const auto m = simulate(rng, 5 + rng.below(40), 2 + rng.below(4), 0.6);
            const auto r = icc_two_way(m);
            const auto o = oracle_ms(m);
            const double n = static_cast<double>(m.size()), k = static_cast<double>(m[0].size());
            CHECK(r.ms_rows == doctest::Approx(o.rows).epsilon(1e-10));
            CHECK(r.ms_cols == doctest::Approx(o.cols).epsilon(1e-10));
            CHECK(r.ms_error == doctest::Approx(o.error).epsilon(1e-10));
            const double single = (o.rows - o.error) / (o.rows + (k - 1) * o.error + k * (o.cols - o.error) / n);
            const double average = (o.rows - o.error) / (o.rows + (o.cols - o.error) / n);
            CHECK(std::abs(r.icc_single - single) < 1e-10);
            CHECK(std::abs(r.icc_average - average) < 1e-10);
            CHECK(std::abs(r.icc_average - spearman_brown(r.icc_single, k)) < 1e-10);
            CHECK(r.ci_single.lower <= r.icc_single);
            CHECK(r.ci_single.upper >= r.icc_single);
            CHECK(r.ci_average.lower <= r.icc_average);
            CHECK(r.ci_average.upper >= r.icc_average);
        }
    }

    TEST_CASE("identical sessions give perfect agreement") {
        const std::vector<std::vector<double>> m{{1, 1, 1}, {3, 3, 3}, {2, 2, 2}, {7, 7, 7}};
        const auto r = icc_two_way(m);
        CHECK(r.icc_single == doctest::Approx(1.0));
        CHECK(r.icc_average == doctest::Approx(1.0));
    }

    TEST_CASE("a constant session shift lowers absolute agreement") {
        const std::vector<std::vector<double>> m{{1, 3}, {2, 4}, {3, 5}, {4, 6}, {5, 7}};
        const auto r = icc_two_way(m);
        CHECK(r.ms_error == doctest::Approx(0.0));
        // var_subject = 2.5, var_session = 2: 2.5 / 4.5
        CHECK(r.icc_single == doctest::Approx(2.5 / 4.5));
        CHECK(r.between_person_share == doctest::Approx(2.5 / 4.5));
        CHECK(r.between_person_share_excl_session == doctest::Approx(1.0));
    }

    TEST_CASE("spearman-brown") {
        CHECK(spearman_brown(0.67, 3) == doctest::Approx(3 * 0.67 / (1 + 2 * 0.67)));
        CHECK(std::abs(spearman_brown(0.67, 3) - 0.859) < 0.0005);
        CHECK(spearman_brown(1.0, 5) == 1.0);
        CHECK_THROWS_AS(spearman_brown(0.5, 0), DomainError);
    }

    TEST_CASE("variance components and truncation") {
        Rng rng(12);
        const auto m = simulate(rng, 60, 3, 0.6);
        const auto r = icc_two_way(m);
        const double total = r.var_subject + r.var_session + r.var_residual;
        CHECK(r.between_person_share == doctest::Approx(r.var_subject / total));
        // negative subject variance: rows anti-agree
        const std::vector<std::vector<double>> anti{{1, 5}, {5, 1}, {2, 4}, {4, 2}};
        const auto a = icc_two_way(anti);
        CHECK(a.subject_truncated);
        CHECK(a.var_subject == 0.0);
        CHECK(a.icc_single < 0);
    }

    TEST_CASE("confidence interval coverage") {
        Rng rng(2024);
        int covered = 0;
        const int reps = 400;
        for (int i = 0; i < reps; ++i) {
            std::vector<std::vector<double>> m(40, std::vector<double>(3));
            for (auto& row : m) {
                const double p = rng.normal() * std::sqrt(0.67);
                for (double& v : row) v = p + rng.normal() * std::sqrt(0.33);
            }
            const auto r = icc_two_way(m);
            if (r.ci_single.lower <= 0.67 && 0.67 <= r.ci_single.upper) ++covered;
        }
        const double rate = static_cast<double>(covered) / reps;
        CHECK(rate > 0.91);
        CHECK(rate < 0.99);
    }

    TEST_CASE("input errors") {
        CHECK_THROWS_AS(icc_two_way(std::vector<std::vector<double>>{{1, 2}}), DomainError);
        CHECK_THROWS_AS(icc_two_way(std::vector<std::vector<double>>{{1}, {2}}), DomainError);
        CHECK_THROWS_AS(icc_two_way(std::vector<std::vector<double>>{{1, 2}, {3}}), DomainError);
        CHECK_THROWS_AS(icc_two_way(std::vector<std::vector<double>>{{2, 2}, {2, 2}}), DegenerateError);
        CHECK_THROWS_AS(icc_two_way(std::vector<std::vector<double>>{{1, 2}, {3, 4}}, 1.5), DomainError);
    }
}
