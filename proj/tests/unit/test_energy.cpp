#include "../fixtures.hpp"
#include "hetnoma/energy.hpp"
#include "hetnoma/errors.hpp"

#include <doctest.h>

using namespace hetnoma;

TEST_CASE("macro power at the reference constants") {
    auto cfg = fixtures::base(200, 15, 30.0);
    const double n = 15.0;
    const double m = 200.0;
    const double direct = 4.0 + (n * 4.8 + m * 1.0) + (n * n * 0.0 + n * m * 9.5e-8) +
                          (n * n * n * 2.08e-8 + n * n * m * 6.25e-8) + 1.0 / 0.4;
    CHECK(std::abs(macro_power_total(PowerModel{}, cfg.macro) - direct) <= 1e-9 * direct);
    CHECK(std::abs(macro_power_total(PowerModel{}, cfg.macro) - 278.50317) <= 5e-6);
}

TEST_CASE("small-cell power") {
    const auto t = fixtures::small(20.0, 20.0, 10.0);
    CHECK(small_cell_power_total(PowerModel{}, t) == doctest::Approx(2.25).epsilon(1e-15));
}

TEST_CASE("macro power grows with the antenna count") {
    auto a = fixtures::base(100, 15, 30.0);
    auto b = fixtures::base(200, 15, 30.0);
    CHECK(macro_power_total(PowerModel{}, b.macro) > macro_power_total(PowerModel{}, a.macro));
}

TEST_CASE("energy efficiency report is consistent") {
    auto cfg = fixtures::base(200, 15, 30.0);
    cfg.small_tiers = {fixtures::small(20.0, 20.0, 10.0)};
    cfg.small_tiers[0].bias = 5.0;
    const PowerModel model;
    const auto e = energy_efficiency(cfg, model);
    CHECK(e.ee_macro == doctest::Approx(15.0 * e.rates.macro_rate_lower_bound / macro_power_total(model, cfg.macro)));
    CHECK(e.ee_small[0] ==
          doctest::Approx(e.rates.small_tier_rates[0].total / small_cell_power_total(model, cfg.small(0))));
    CHECK(e.ee_network == doctest::Approx(e.rates.association_macro * e.ee_macro +
                                          e.rates.association_small[0] * e.ee_small[0]));
    CHECK(e.ee_small[0] > e.ee_macro);
    CHECK(ee_macro(cfg, model) == doctest::Approx(e.ee_macro).epsilon(1e-12));
}

TEST_CASE("power model validation") {
    PowerModel p;
    CHECK_NOTHROW(p.validate());
    p.efficiency_macro = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = PowerModel{};
    p.baseband_streams[1] = -1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}
