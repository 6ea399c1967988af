#include <cmath>
#include <stdexcept>

#include "diqkd/sources.hpp"
#include "doctest.h"

using namespace diqkd;

TEST_CASE("pdc statistics follow the thermal pair distribution") {
    const double lambda = 0.1;
    PhotonStatistics s = pdc_statistics(lambda, 4);
    REQUIRE(s.n_max() == 4);
    for (int n = 0; n < 4; ++n) {
        const double expected = (n + 1) * std::pow(lambda, n) / std::pow(1.0 + lambda, n + 2);
        CHECK(s.p(n) == doctest::Approx(expected).epsilon(1e-14));
    }
    CHECK(s.total() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.p(4) > 0.0);
    CHECK(s.p(5) == 0.0);
    CHECK(s.p(-1) == 0.0);
}

TEST_CASE("pdc with zero intensity is pure vacuum") {
    PhotonStatistics s = pdc_statistics(0.0);
    CHECK(s.p(0) == 1.0);
    CHECK(s.total() == 1.0);
    CHECK(s.half_mean() == 0.0);
}

TEST_CASE("ideal statistics emit exactly one pair") {
    PhotonStatistics s = ideal_statistics();
    CHECK(s.p(1) == 1.0);
    CHECK(s.half_mean() == 0.5);
}

TEST_CASE("generic statistics honour p0 and the ratio q") {
    PhotonStatistics s = generic_statistics(0.2, 0.25);
    CHECK(s.p(0) == doctest::Approx(0.2));
    CHECK(s.p(2) / s.p(1) == doctest::Approx(0.25));
    CHECK(s.total() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(generic_statistics(1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(generic_statistics(0.1, -0.1), std::invalid_argument);
}

TEST_CASE("q_pdc matches a three-bin truncated pdc source") {
    for (double p0 : {0.99, 0.9, 0.5, 0.1}) {
        const double lambda = lambda_from_p0(p0);
        PhotonStatistics s = pdc_statistics(lambda, 2);
        CHECK(s.p(0) == doctest::Approx(p0).epsilon(1e-13));
        CHECK(q_pdc(p0) == doctest::Approx(s.p(2) / s.p(1)).epsilon(1e-12));
    }
}

TEST_CASE("custom statistics are validated and renormalized") {
    PhotonStatistics s = custom_statistics({0.5, 0.5 - 1e-12, 1e-12});
    CHECK(s.total() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(custom_statistics({0.5, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(custom_statistics({1.2, -0.2}), std::invalid_argument);
    CHECK_THROWS_AS(custom_statistics({1.0}), std::invalid_argument);
}

TEST_CASE("triggered source conditional statistics") {
    const double mu = 0.3, z = 0.8, pd = 1e-4;
    TriggeredSource t = triggered_source(mu, z, pd, 5);
    const double mz = mu * z;
    CHECK(t.p_trigger == doctest::Approx((pd + mz) / ((1 + mz) * (1 + mz))).epsilon(1e-14));
    CHECK(t.r.total() == doctest::Approx(1.0).epsilon(1e-14));
    // Vacuum only survives through a dark count.
    const double p0 = 1.0 / (1.0 + mu);
    CHECK(t.r.p(0) == doctest::Approx(p0 * pd / t.p_trigger).epsilon(1e-12));
    const double p1 = mu / ((1.0 + mu) * (1.0 + mu));
    CHECK(t.r.p(1) ==
          doctest::Approx(p1 * ((1 - pd) * z + pd * (1 - z)) / t.p_trigger).epsilon(1e-12));
}

TEST_CASE("triggered source edge cases") {
    TriggeredSource limit = triggered_source(0.0, 0.9, 0.0);
    CHECK(limit.p_trigger == 0.0);
    CHECK(limit.r.p(1) == 1.0);
    CHECK_THROWS_AS(triggered_source(0.1, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(triggered_source(-0.1, 0.5, 0.0), std::invalid_argument);
    TriggeredSource perfect = triggered_source(0.1, 1.0, 0.0);
    CHECK(perfect.r.p(0) == 0.0);
}

TEST_CASE("source specs dispatch by family") {
    SourceSpec spec;
    spec.family = SourceFamily::pdc;
    spec.intensity = 0.05;
    CHECK(pair_statistics(spec).p(0) == doctest::Approx(1.0 / (1.05 * 1.05)));
    spec.family = SourceFamily::triggered;
    CHECK_THROWS_AS(pair_statistics(spec), std::invalid_argument);
    CHECK(single_photon_source(spec, 0.9, 0.0).p_trigger < 1.0);
    spec.family = SourceFamily::pdc;
    CHECK_THROWS_AS(single_photon_source(spec, 0.9, 0.0), std::invalid_argument);
    CHECK(source_family_from_string("generic") == SourceFamily::generic);
    CHECK_THROWS_AS(source_family_from_string("laser"), std::invalid_argument);
}
