#include <cmath>
#include <numbers>
#include <vector>

#include "diqkd/clickdist.hpp"
#include "diqkd/fock_oracle.hpp"
#include "doctest.h"

using namespace diqkd;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_diff(const CondDistribution& a, const CondDistribution& b) {
    double worst = 0.0;
    for (const auto& [p, v] : a.entries) worst = std::max(worst, std::fabs(v - b.probability(p)));
    for (const auto& [p, v] : b.entries) worst = std::max(worst, std::fabs(v - a.probability(p)));
    return worst;
}

void compare_with_oracle(Architecture arch, const std::vector<int>& counts,
                         const CircuitParams& params, double ta, double tb) {
    oracle::OracleOptions opts;
    opts.prune = false;
    CondDistribution closed = cond_distribution(arch, counts, params, ta, tb);
    CondDistribution brute = oracle::oracle_cond_distribution(arch, counts, params, ta, tb, opts);
    INFO(to_string(arch));
    CHECK(max_abs_diff(closed, brute) < 1e-12);
    CHECK(closed.total() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(closed.clipped == 0);
}

}  // namespace

TEST_CASE("esr closed form agrees with the Fock oracle") {
    const std::vector<std::vector<int>> tuples{{1, 1}, {0, 1}, {1, 0}, {2, 1}, {1, 2}, {2, 2}};
    for (const auto& c : tuples) {
        compare_with_oracle(Architecture::esr, c, {0.8, 0.35, 0.5}, 0.3, -0.7);
        compare_with_oracle(Architecture::esr, c, {1.0, 1.0, 0.5}, kPi / 4, kPi / 8);
    }
    compare_with_oracle(Architecture::esr, {3, 1}, {0.9, 0.2, 0.5}, 0.11, 1.3);
}

TEST_CASE("pqa closed form agrees with the Fock oracle") {
    const std::vector<std::vector<int>> tuples{{1, 1, 1}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0},
                                               {2, 1, 1}, {1, 2, 1}, {1, 1, 2}, {2, 2, 0}};
    for (const auto& c : tuples) {
        compare_with_oracle(Architecture::pqa, c, {0.85, 0.4, 0.3}, 0.2, -0.45);
        compare_with_oracle(Architecture::pqa, c, {1.0, 1.0, 0.5}, 0.0, kPi / 8);
    }
}

TEST_CASE("two-esr closed form agrees with the Fock oracle") {
    const std::vector<std::vector<int>> tuples{{1, 1, 1}, {0, 1, 1}, {1, 0, 1}, {2, 1, 1}};
    for (const auto& c : tuples) {
        compare_with_oracle(Architecture::two_esr, c, {0.9, 0.6, 0.5}, 0.4, -0.2);
    }
}

TEST_CASE("unassisted closed form agrees with the Fock oracle") {
    for (int n = 0; n <= 3; ++n) {
        compare_with_oracle(Architecture::unassisted, {n}, {1.0, 0.45, 0.5}, 0.3, 1.1);
        compare_with_oracle(Architecture::unassisted, {n}, {1.0, 1.0, 0.5}, kPi / 4, -kPi / 8);
    }
}

TEST_CASE("zero efficiencies and axis-aligned angles are handled") {
    compare_with_oracle(Architecture::esr, {1, 1}, {0.0, 1.0, 0.5}, 0.0, kPi / 2);
    compare_with_oracle(Architecture::esr, {1, 1}, {1.0, 0.0, 0.5}, kPi / 2, 0.0);
    compare_with_oracle(Architecture::pqa, {1, 1, 1}, {1.0, 1.0, 1.0}, 0.0, 0.0);
    compare_with_oracle(Architecture::pqa, {1, 1, 1}, {1.0, 1.0, 0.0}, 0.0, 0.0);
    compare_with_oracle(Architecture::unassisted, {2}, {1.0, 0.0, 0.5}, 0.0, 0.0);
}

TEST_CASE("dark counts preserve normalization and the herald table matches") {
    CircuitParams params{0.9, 0.5, 0.5};
    const double ta = 0.3, tb = -0.4, p_d = 1e-3;
    CondDistribution d = cond_distribution(Architecture::esr, {1, 1}, params, ta, tb);
    CondDistribution noisy = apply_dark_counts(d, p_d, 8);
    CHECK(noisy.total() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(noisy.noise_applied);

    BinaryOutcomeDistribution post = postprocess(noisy, true);
    HeraldTable table = herald_table(Architecture::esr, {1, 1}, params, ta, tb);
    auto fast = table.noisy(p_d, 8);
    const auto omega = canonical_herald(Architecture::esr);
    for (int aa = 0; aa < 2; ++aa) {
        for (int ab = 0; ab < 2; ++ab) {
            CHECK(fast[2 * aa + ab] == doctest::Approx(post.probability(aa, ab, omega)).epsilon(1e-12));
        }
    }
}

TEST_CASE("herald table matches the full pipeline for every architecture") {
    struct Case {
        Architecture arch;
        std::vector<int> counts;
    };
    const std::vector<Case> cases{{Architecture::pqa, {1, 1, 1}},
                                  {Architecture::two_esr, {1, 1, 1}},
                                  {Architecture::unassisted, {2}}};
    CircuitParams params{0.85, 0.6, 0.4};
    for (const auto& c : cases) {
        const int D = detector_count(c.arch);
        CondDistribution noisy =
            apply_dark_counts(cond_distribution(c.arch, c.counts, params, 0.2, 0.9), 2e-3, D);
        BinaryOutcomeDistribution post = postprocess(noisy, flips_alice(c.arch));
        auto fast = herald_table(c.arch, c.counts, params, 0.2, 0.9).noisy(2e-3, D);
        const auto omega = canonical_herald(c.arch);
        for (int k = 0; k < 4; ++k) {
            CHECK(fast[k] == doctest::Approx(post.probability(k / 2, k % 2, omega)).epsilon(1e-12));
        }
    }
}

TEST_CASE("herald cache returns identical tables and counts hits") {
    HeraldCache cache(16);
    CircuitParams params{0.9, 0.5, 0.5};
    HeraldTable a = cache.get(Architecture::esr, {1, 1}, params, 0.1, 0.2);
    HeraldTable b = cache.get(Architecture::esr, {1, 1}, params, 0.1, 0.2);
    CHECK(cache.misses() == 1);
    CHECK(cache.hits() == 1);
    for (int k = 0; k < 4; ++k) CHECK(a.base[k] == b.base[k]);
}

TEST_CASE("support violations and malformed tuples") {
    ClickPattern p(std::vector<int>{2, 0, 0, 0, 1, 1, 0, 0});
    CHECK_FALSE(within_support(Architecture::esr, {1, 1}, p));
    CHECK(pattern_probability(Architecture::esr, {1, 1}, p, {}, 0.0, 0.0) == 0.0);
    CHECK_THROWS_AS(cond_distribution(Architecture::esr, {1}, {}, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(cond_distribution(Architecture::esr, {1, 1}, {1.2, 1.0, 0.5}, 0.0, 0.0),
                    std::invalid_argument);
}
