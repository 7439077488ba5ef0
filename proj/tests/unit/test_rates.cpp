#include "../fixtures.hpp"
#include "hetnoma/errors.hpp"
#include "hetnoma/montecarlo.hpp"
#include "hetnoma/rates.hpp"

#include <doctest.h>

#include <cmath>

using namespace hetnoma;

namespace {

double near_mass_oracle(const NetworkConfig& cfg, std::size_t k) {
    const double a = association_prob_small(cfg, k);
    return specfun::integrate([&](double x) { return serving_distance_pdf_small(cfg, k, x, a); }, 0.0,
                              cfg.small(k).pair_distance_m, {1e-12, 0.0, 2000});
}

}  // namespace

TEST_CASE("CCDF masses at z = 0 recover the near and far association split") {
    for (double b : {1.0, 10.0}) {
        const auto cfg = fixtures::rate_scenario(b);
        const double to_probability = 2.0 * std::numbers::pi * cfg.small(0).density / association_prob_small(cfg, 0);
        const double near = near_mass_oracle(cfg, 0);
        CHECK(to_probability * ccdf_typical_near(cfg, 0, 0.0) == doctest::Approx(near).epsilon(1e-6));
        CHECK(to_probability * ccdf_connected_far(cfg, 0, 0.0) == doctest::Approx(near).epsilon(1e-6));
        CHECK(to_probability * ccdf_typical_far(cfg, 0, 0.0) == doctest::Approx(1.0 - near).epsilon(1e-6));
        CHECK(to_probability * ccdf_connected_near(cfg, 0, 0.0) == doctest::Approx(1.0 - near).epsilon(1e-6));
    }
}

TEST_CASE("CCDFs decrease in z and vanish at the power-split ceiling") {
    const auto cfg = fixtures::rate_scenario(5.0);
    const double ceiling = cfg.small(0).far_share / cfg.small(0).near_share;
    double prev_near = ccdf_typical_near(cfg, 0, 0.0);
    double prev_far = ccdf_typical_far(cfg, 0, 0.0);
    for (double z : {0.1, 0.5, 1.0, 1.4}) {
        const double near = ccdf_typical_near(cfg, 0, z);
        const double far = ccdf_typical_far(cfg, 0, z);
        CHECK(near <= prev_near);
        CHECK(far <= prev_far);
        prev_near = near;
        prev_far = far;
    }
    CHECK(ccdf_typical_far(cfg, 0, ceiling) == 0.0);
    CHECK(ccdf_connected_far(cfg, 0, ceiling + 0.1) == 0.0);
    CHECK(ccdf_typical_near(cfg, 0, 1e12) < 1e-6 * ccdf_typical_near(cfg, 0, 0.0));
}

TEST_CASE("small-tier sum rate falls with the bias factor") {
    for (double p2 : {20.0, 30.0}) {
        double previous = 1e300;
        for (double b : {1.0, 2.0, 5.0, 10.0, 20.0, 40.0}) {
            const auto r = ergodic_rate_small(fixtures::rate_scenario(b, p2), 0);
            CHECK(r.total == doctest::Approx(r.near + r.far).epsilon(1e-15));
            CHECK(r.total > 0.0);
            CHECK(r.total <= previous);
            previous = r.total;
        }
    }
}

TEST_CASE("small-tier sum rate agrees with Monte Carlo" * doctest::timeout(600)) {
    const auto cfg = fixtures::rate_scenario(5.0);
    const double analytic = ergodic_rate_small(cfg, 0).total;
    const auto est = mc::estimate(cfg, Targets(1.0, 1.0), mc::Metric::parse("ergodic_rate[0]"), 30000, 99);
    const double sigma = est.ci_halfwidth_99 / 2.5758293035489004;
    INFO("analytic " << analytic << " mc " << est.mean << " sigma " << sigma);
    CHECK(std::abs(analytic - est.mean) <= 2.0 * sigma);
}

TEST_CASE("macro rate bound: closed form and quadrature agree for equal exponents") {
    for (double b : {1.0, 5.0, 20.0}) {
        const auto cfg = fixtures::equal_exponent(fixtures::macro_rate_scenario(b, 40.0));
        CHECK(fixtures::relative_error(macro_rate_lower_bound_closed(cfg), macro_rate_lower_bound(cfg)) < 1e-6);
    }
    CHECK_THROWS_AS(macro_rate_lower_bound_closed(fixtures::macro_rate_scenario(1.0, 40.0)), PreconditionError);
}

TEST_CASE("macro rate bound lies below the simulated macro rate" * doctest::timeout(600)) {
    const auto cfg = fixtures::macro_rate_scenario(5.0, 40.0);
    const double bound = macro_rate_lower_bound(cfg);
    const auto est = mc::estimate(cfg, Targets(1.0, 1.0), mc::Metric::parse("macro_rate"), 5000, 5);
    INFO("bound " << bound << " mc " << est.mean);
    CHECK(bound <= est.mean + est.ci_halfwidth_99);
    CHECK(bound > 0.0);
}

TEST_CASE("spectrum efficiency combines association-weighted rates") {
    const auto cfg = fixtures::rate_scenario(5.0);
    const auto r = spectrum_efficiency(cfg);
    const double expected = r.association_macro * cfg.macro.streams * r.macro_rate_lower_bound +
                            r.association_small[0] * r.small_tier_rates[0].total;
    CHECK(r.spectrum_efficiency_lower_bound == doctest::Approx(expected).epsilon(1e-14));
    CHECK(r.association_macro + r.association_small[0] == doctest::Approx(1.0).epsilon(1e-6));
}
