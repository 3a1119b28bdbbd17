#include <doctest.h>

#include <cmath>
#include <numeric>

#include "minispace/error.hpp"
#include "minispace/rng.hpp"
#include "minispace/stats/art.hpp"
#include "minispace/stats/distributions.hpp"
#include "minispace/stats/ranks.hpp"

using namespace minispace;
using namespace minispace::stats;

namespace {

std::vector<ArtObservation> mixed_design(Rng& rng, std::size_t per_group, double between_shift, double within_shift,
                                         double interaction) {
    std::vector<ArtObservation> obs;
    const std::vector<std::string> groups{"g1", "g2"}, weeks{"1", "2", "3"};
    int id = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t s = 0; s < per_group; ++s) {
            const std::string subject = "p" + std::to_string(id++);
            const double person = rng.normal();
            for (std::size_t w = 0; w < weeks.size(); ++w) {
                const double y = person + between_shift * static_cast<double>(g) + within_shift * static_cast<double>(w) +
                                 interaction * static_cast<double>(g * w) + rng.normal();
                obs.push_back({subject, {groups[g], weeks[w]}, y});
            }
        }
    }
    return obs;
}

const std::vector<ArtFactor> kMixed{{"Group", {"g1", "g2"}, false}, {"Week", {"1", "2", "3"}, true}};

}  // namespace

TEST_SUITE("art") {
    TEST_CASE("one between factor reduces to ANOVA on ranks") {
        Rng rng(1);
        const std::vector<ArtFactor> f{{"G", {"a", "b", "c"}, false}};
        std::vector<ArtObservation> obs;
        std::vector<double> y;
        std::vector<std::size_t> g;
        for (std::size_t i = 0; i < 18; ++i) {
            const std::size_t grp = i % 3;
            const double v = rng.normal() + 0.7 * static_cast<double>(grp);
            obs.push_back({"s" + std::to_string(i), {f[0].levels[grp]}, v});
            y.push_back(v);
            g.push_back(grp);
        }
        const auto r = art_anova(f, obs);
        const auto ranks = midranks(y);
        const double grand = mean(ranks);
        std::vector<double> sum(3, 0.0), cnt(3, 0.0);
        for (std::size_t i = 0; i < ranks.size(); ++i) {
            sum[g[i]] += ranks[i];
            cnt[g[i]] += 1;
        }
        double ssb = 0, ssw = 0;
        for (int k = 0; k < 3; ++k) ssb += cnt[static_cast<std::size_t>(k)] * std::pow(sum[static_cast<std::size_t>(k)] / cnt[static_cast<std::size_t>(k)] - grand, 2);
        for (std::size_t i = 0; i < ranks.size(); ++i) ssw += std::pow(ranks[i] - sum[g[i]] / cnt[g[i]], 2);
        const double f_oracle = (ssb / 2) / (ssw / 15);
        const auto& e = r.effect("G");
        CHECK(e.result.statistic == doctest::Approx(f_oracle).epsilon(1e-10));
        CHECK(e.result.df == std::vector<double>{2, 15});
        CHECK(e.result.p_value == doctest::Approx(f_sf(f_oracle, 2, 15)).epsilon(1e-10));
        CHECK(e.result.effect.kind == EffectKind::epsilon_sq);
        CHECK(e.posthoc.size() == 3);
    }

    TEST_CASE("one within factor reduces to repeated-measures ANOVA on ranks") {
        Rng rng(2);
        const std::vector<ArtFactor> f{{"W", {"1", "2", "3"}, true}};
        const std::size_t n = 8;
        std::vector<ArtObservation> obs;
        std::vector<std::vector<double>> m(n, std::vector<double>(3));
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t w = 0; w < 3; ++w) {
                m[s][w] = rng.normal() + 0.5 * static_cast<double>(w);
                obs.push_back({"s" + std::to_string(s), {f[0].levels[w]}, m[s][w]});
            }
        }
        const auto r = art_anova(f, obs);
        std::vector<double> flat;
        for (const auto& row : m) flat.insert(flat.end(), row.begin(), row.end());
        const auto ranks = midranks(flat);
        const double grand = mean(ranks);
        std::vector<double> cm(3, 0.0), sm(n, 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t w = 0; w < 3; ++w) {
                cm[w] += ranks[s * 3 + w] / static_cast<double>(n);
                sm[s] += ranks[s * 3 + w] / 3.0;
            }
        }
        double ss_c = 0, ss_e = 0;
        for (double c : cm) ss_c += static_cast<double>(n) * (c - grand) * (c - grand);
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t w = 0; w < 3; ++w) ss_e += std::pow(ranks[s * 3 + w] - cm[w] - sm[s] + grand, 2);
        }
        const double f_oracle = (ss_c / 2) / (ss_e / 14);
        const auto& e = r.effect("W");
        CHECK(e.result.statistic == doctest::Approx(f_oracle).epsilon(1e-10));
        CHECK(e.result.df == std::vector<double>{2, 14});
        CHECK(e.result.effect.kind == EffectKind::kendalls_w);
    }

    TEST_CASE("mixed design degrees of freedom and effect kinds") {
        Rng rng(3);
        const auto obs = mixed_design(rng, 10, 0.5, 0.5, 0.0);
        const auto r = art_anova(kMixed, obs);
        CHECK(r.n_subjects == 20);
        CHECK(r.effects.size() == 3);
        CHECK(r.effect("Group").result.df == std::vector<double>{1, 18});
        CHECK(r.effect("Week").result.df == std::vector<double>{2, 36});
        CHECK(r.effect("Group:Week").result.df == std::vector<double>{2, 36});
        CHECK(r.effect("Group").result.effect.kind == EffectKind::cliffs_delta);
        CHECK(r.effect("Week").result.effect.kind == EffectKind::kendalls_w);
        CHECK(r.effect("Group:Week").result.effect.kind == EffectKind::none);
        CHECK(r.effect("Group:Week").within);
        CHECK_FALSE(r.effect("Group").within);
        CHECK_THROWS_AS(r.effect("Nope"), DomainError);
    }

    TEST_CASE("aligned responses sum to zero") {
        Rng rng(4);
        const auto obs = mixed_design(rng, 7, 1.0, 0.3, 0.4);
        const auto r = art_anova(kMixed, obs);
        for (const auto& e : r.effects) {
            const double s = std::accumulate(e.aligned.begin(), e.aligned.end(), 0.0);
            CHECK(std::abs(s) < 1e-9);
        }
    }

    TEST_CASE("separated groups are detected") {
        Rng rng(5);
        const auto obs = mixed_design(rng, 10, 6.0, 0.0, 0.0);
        const auto r = art_anova(kMixed, obs);
        CHECK(r.effect("Group").result.p_value < 1e-6);
        CHECK(r.effect("Group").result.effect.value == doctest::Approx(1.0));  // g2 over the g1 reference
        const auto& ph = r.effect("Group").posthoc;
        REQUIRE(ph.size() == 1);
        CHECK(ph[0].p_holm < 1e-6);
    }

    TEST_CASE("additive data rarely shows an interaction") {
        int quiet = 0;
        for (std::uint64_t s = 0; s < 200; ++s) {
            Rng rng = Rng::derive(900, s);
            const auto obs = mixed_design(rng, 8, 1.5, 1.0, 0.0);
            if (art_anova(kMixed, obs).effect("Group:Week").result.p_value >= 0.05) ++quiet;
        }
        CHECK(quiet >= 180);
    }

    TEST_CASE("a true interaction is detected") {
        Rng rng(6);
        const auto obs = mixed_design(rng, 15, 0.0, 0.0, 2.0);
        CHECK(art_anova(kMixed, obs).effect("Group:Week").result.p_value < 0.001);
    }

    TEST_CASE("affine transforms leave results unchanged") {
        Rng rng(7);
        auto obs = mixed_design(rng, 6, 0.8, 0.6, 0.3);
        const auto a = art_anova(kMixed, obs);
        for (auto& o : obs) o.response = 4.0 * o.response + 11.0;
        const auto c = art_anova(kMixed, obs);
        for (std::size_t i = 0; i < a.effects.size(); ++i) {
            CHECK(c.effects[i].result.statistic == doctest::Approx(a.effects[i].result.statistic).epsilon(1e-9));
        }
    }

    TEST_CASE("single-factor results are invariant under monotone transforms") {
        Rng rng(70);
        const std::vector<ArtFactor> f{{"W", {"1", "2", "3", "4"}, true}};
        std::vector<ArtObservation> obs;
        for (int s = 0; s < 9; ++s) {
            for (std::size_t w = 0; w < 4; ++w) obs.push_back({"s" + std::to_string(s), {f[0].levels[w]}, rng.normal() + 0.3 * static_cast<double>(w)});
        }
        const auto a = art_anova(f, obs);
        for (auto& o : obs) o.response = std::exp(3 * o.response);
        const auto b = art_anova(f, obs);
        CHECK(b.effects[0].result.statistic == doctest::Approx(a.effects[0].result.statistic).epsilon(1e-10));
        CHECK(b.effects[0].result.effect.value == doctest::Approx(a.effects[0].result.effect.value).epsilon(1e-10));
    }

    TEST_CASE("design errors") {
        Rng rng(8);
        auto obs = mixed_design(rng, 4, 0, 0, 0);
        auto missing = obs;
        missing.pop_back();
        CHECK_THROWS_AS(art_anova(kMixed, missing), UnbalancedDesignError);
        auto dup = obs;
        dup.push_back(dup.front());
        CHECK_THROWS_AS(art_anova(kMixed, dup), UnbalancedDesignError);
        auto empty_cell = obs;
        std::erase_if(empty_cell, [](const ArtObservation& o) { return o.levels[0] == "g2"; });
        CHECK_THROWS_AS(art_anova(kMixed, empty_cell), UnbalancedDesignError);
        auto switching = obs;
        switching[1].levels[0] = "g2";
        CHECK_THROWS_AS(art_anova(kMixed, switching), DomainError);
        auto constant = obs;
        for (auto& o : constant) o.response = 1.0;
        CHECK_THROWS_AS(art_anova(kMixed, constant), DegenerateError);
        auto unknown = obs;
        unknown[0].levels[1] = "9";
        CHECK_THROWS(art_anova(kMixed, unknown));
    }
}
