#include "../fixtures.hpp"
#include "hetnoma/coverage.hpp"
#include "hetnoma/errors.hpp"
#include "hetnoma/montecarlo.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <doctest.h>

#include <cmath>

using namespace hetnoma;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// -ln of the probability generating functional of each interfering tier,
// integrated directly from the exclusion radius outwards.
double small_exponent_oracle(const NetworkConfig& cfg, std::size_t k, double s, double x0) {
    boost::math::quadrature::exp_sinh<double> es;
    double total = 0.0;
    for (std::size_t i = 0; i < cfg.small_tiers.size(); ++i) {
        const auto& t = cfg.small(i);
        const double w = exclusion_radius_small(cfg, k, i, x0);
        const double c = s * t.power_w * cfg.eta;
        const auto f = [&](double u) {
            const double v = w + u;
            const double g = c * std::pow(v, -t.path_loss_exponent);
            return g / (1.0 + g) * v;
        };
        total += 2.0 * std::numbers::pi * t.density * es.integrate(f, 0.0, kInf);
    }
    return total;
}

double macro_exponent_oracle(const NetworkConfig& cfg, std::size_t k, double s, double x0) {
    boost::math::quadrature::exp_sinh<double> es;
    const double w = exclusion_radius_macro(cfg, k, x0);
    const double n = cfg.macro.streams;
    const double c = s * cfg.macro.power_w * cfg.eta / n;
    const auto f = [&](double u) {
        const double v = w + u;
        return -std::expm1(-n * std::log1p(c * std::pow(v, -cfg.macro.path_loss_exponent))) * v;
    };
    return 2.0 * std::numbers::pi * cfg.macro.density * es.integrate(f, 0.0, kInf);
}

}  // namespace

TEST_CASE("decoding thresholds") {
    const auto t = fixtures::small(20.0, 20.0, 10.0);
    const auto th = decoding_thresholds(t, Targets(1.0, 1.0));
    CHECK(th.near_feasible);
    CHECK(th.far_feasible);
    CHECK(th.near == doctest::Approx(5.0));
    CHECK(th.far == doctest::Approx(5.0));
    const auto th2 = decoding_thresholds(fixtures::small(20.0, 20.0, 10.0, 0.9), Targets(1.0, 1.0));
    CHECK(th2.near == doctest::Approx(10.0));  // tau_t / a_n dominates
    CHECK(th2.far == doctest::Approx(1.0 / 0.8));
    const auto th3 = decoding_thresholds(t, Targets(2.0, 2.0));
    CHECK_FALSE(th3.near_feasible);
    CHECK_FALSE(th3.far_feasible);
}

TEST_CASE("Laplace transforms match their direct interference integrals") {
    for (double bias : {1.0, 20.0}) {
        const auto cfg = fixtures::association_scenario(200, bias);
        for (std::size_t k = 0; k < 2; ++k) {
            for (double x0 : {2.0, 15.0, 60.0}) {
                const double s_scale = std::pow(x0, cfg.small(k).path_loss_exponent) /
                                       (cfg.small(k).power_w * cfg.eta);
                for (double eps : {1e-2, 1.0, 30.0}) {
                    const double s = eps * s_scale;
                    const double ls = std::log(laplace_small_interference(cfg, k, s, x0));
                    const double lm = std::log(laplace_macro_interference(cfg, k, s, x0));
                    CHECK(fixtures::relative_error(-ls, small_exponent_oracle(cfg, k, s, x0)) < 1e-8);
                    CHECK(fixtures::relative_error(-lm, macro_exponent_oracle(cfg, k, s, x0)) < 1e-8);
                }
            }
        }
    }
    const auto cfg = fixtures::coverage_scenario();
    CHECK(laplace_small_interference(cfg, 0, 0.0, 10.0) == 1.0);
    CHECK(laplace_macro_interference(cfg, 0, 0.0, 10.0) == 1.0);
}

TEST_CASE("conditional coverage equals noise term times both Laplace transforms") {
    const auto cfg = fixtures::coverage_scenario(5.0);
    const Targets targets(1.0, 1.0);
    const auto th = decoding_thresholds(cfg.small(0), targets);
    const auto& t = cfg.small(0);
    for (double x0 : {1.0, 5.0, 9.5}) {
        const double s = th.near * std::pow(x0, t.path_loss_exponent) / (t.power_w * cfg.eta);
        const double expected = std::exp(-s * cfg.noise_power_w) * laplace_small_interference(cfg, 0, s, x0) *
                                laplace_macro_interference(cfg, 0, s, x0);
        CHECK(fixtures::relative_error(conditional_coverage_near(cfg, 0, targets, x0), expected) < 1e-9);
    }
    for (double x0 : {10.5, 20.0, 80.0}) {
        const double s = th.far * std::pow(x0, t.path_loss_exponent) / (t.power_w * cfg.eta);
        const double expected = std::exp(-s * cfg.noise_power_w) * laplace_small_interference(cfg, 0, s, x0) *
                                laplace_macro_interference(cfg, 0, s, x0);
        CHECK(fixtures::relative_error(conditional_coverage_far(cfg, 0, targets, x0), expected) < 1e-9);
    }
}

TEST_CASE("coverage is exactly zero when neither power split can decode") {
    for (double far : {0.55, 0.6, 0.7}) {
        const auto cfg = fixtures::coverage_scenario(5.0, far);
        const Targets targets(2.0, 2.0);  // tau = 3
        const auto c = coverage_probability(cfg, 0, targets);
        CHECK(c.total == 0.0);
        CHECK(c.zero_by_power_split);
        CHECK(conditional_coverage_near(cfg, 0, targets, 3.0) == 0.0);
        CHECK(conditional_coverage_far(cfg, 0, targets, 30.0) == 0.0);
    }
}

TEST_CASE("coverage is a probability and falls with the bias factor") {
    for (double far : {0.6, 0.9}) {
        double previous = 1.0;
        for (double b : {1.0, 2.0, 5.0, 10.0, 20.0, 40.0}) {
            const auto c = coverage_probability(fixtures::coverage_scenario(b, far), 0, Targets(1.0, 1.0));
            CHECK(c.total >= 0.0);
            CHECK(c.total <= 1.0);
            CHECK(c.total == doctest::Approx(c.near_component + c.far_component).epsilon(1e-15));
            CHECK(c.total <= previous);
            previous = c.total;
        }
    }
}

TEST_CASE("interference-limited closed form matches the quadrature pipeline") {
    for (double b : {1.0, 5.0, 40.0}) {
        for (double far : {0.6, 0.9}) {
            const auto cfg = fixtures::equal_exponent(fixtures::coverage_scenario(b, far));
            const Targets targets(1.0, 1.0);
            CHECK(fixtures::relative_error(coverage_probability_closed(cfg, 0, targets),
                                           coverage_probability(cfg, 0, targets).total) < 1e-5);
        }
    }
    CHECK_THROWS_AS(coverage_probability_closed(fixtures::coverage_scenario(), 0, Targets(1.0, 1.0)),
                    PreconditionError);
}

TEST_CASE("conditional coverage agrees with conditioned Monte Carlo" * doctest::timeout(600)) {
    const auto cfg = fixtures::coverage_scenario(5.0);
    const Targets targets(1.0, 1.0);
    for (double x0 : {5.0, 20.0}) {
        const double analytic = x0 <= cfg.small(0).pair_distance_m ? conditional_coverage_near(cfg, 0, targets, x0)
                                                                    : conditional_coverage_far(cfg, 0, targets, x0);
        const auto est = mc::estimate_conditional_coverage(cfg, 0, targets, x0, 100000, 2024);
        const double sigma = est.ci_halfwidth_99 / 2.5758293035489004;
        INFO("x0 = " << x0 << " analytic " << analytic << " mc " << est.mean << " sigma " << sigma);
        CHECK(std::abs(analytic - est.mean) <= 2.0 * sigma);
    }
}
