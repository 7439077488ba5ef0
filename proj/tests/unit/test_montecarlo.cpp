#include "../fixtures.hpp"
#include "hetnoma/coverage.hpp"
#include "hetnoma/errors.hpp"
#include "hetnoma/montecarlo.hpp"

#include <doctest.h>

#include <cmath>

using namespace hetnoma;
using namespace hetnoma::mc;

namespace {

constexpr double kZ99 = 2.5758293035489004;

// Two sparse tiers so that a realization costs little.
NetworkConfig sparse() {
    auto cfg = fixtures::base(64, 4, 40.0);
    cfg.small_tiers = {fixtures::small(2.0, 20.0, 10.0)};
    cfg.small_tiers[0].bias = 5.0;
    return cfg;
}

// A lone tier-1 small BS at distance x with serving fading g.
Realization lone_small_bs(double x, double g) {
    Realization r;
    r.radius_m = 1e4;
    r.small.resize(1);
    r.small[0].distance_sq = {x * x};
    r.small[0].fading = {1.0};
    r.serving_small_fading = g;
    return r;
}

}  // namespace

TEST_CASE("realizations are deterministic in seed and trial index") {
    const auto cfg = fixtures::coverage_scenario();
    const auto a = sample_realization(cfg, 7, 123);
    const auto b = sample_realization(cfg, 7, 123);
    CHECK(a.macro.distance_sq == b.macro.distance_sq);
    CHECK(a.macro.fading == b.macro.fading);
    CHECK(a.small[0].distance_sq == b.small[0].distance_sq);
    CHECK(a.serving_small_fading == b.serving_small_fading);
    CHECK(a.serving_macro_fading == b.serving_macro_fading);
    const auto c = sample_realization(cfg, 7, 124);
    CHECK(a.small[0].distance_sq != c.small[0].distance_sq);
}

TEST_CASE("an empty tier draws no base stations") {
    auto cfg = sparse();
    cfg.small_tiers.push_back(fixtures::small(0.0, 20.0, 10.0));
    const auto r = sample_realization(cfg, 1, 0);
    CHECK(r.small[1].distance_sq.empty());
    CHECK_FALSE(r.macro.distance_sq.empty());
}

TEST_CASE("macro BS count has mean lambda pi R^2") {
    auto cfg = sparse();
    cfg.small_tiers[0].density = 0.0;
    const int draws = 10000;
    double sum = 0.0;
    for (int t = 0; t < draws; ++t) sum += static_cast<double>(sample_realization(cfg, 3, t).macro.distance_sq.size());
    const double mean = sum / draws;
    const double sigma = std::sqrt(400.0 / draws);
    CHECK(std::abs(mean - 400.0) <= 2.0 * sigma);
    for (double d2 : sample_realization(cfg, 3, 0).macro.distance_sq) CHECK(d2 <= 1e8);
}

TEST_CASE("association with a single macro BS") {
    auto cfg = sparse();
    Realization r;
    r.radius_m = 1e4;
    r.macro.distance_sq = {250.0 * 250.0};
    r.macro.fading = {1.0};
    r.small.resize(1);
    const auto a = associate(cfg, r);
    CHECK(a.valid);
    CHECK(a.macro);
    CHECK(a.distance == doctest::Approx(250.0));
    CHECK(a.role == Role::none);
    CHECK_FALSE(associate(cfg, lone_small_bs(10.0, 1.0)).macro);
    Realization empty;
    empty.small.resize(1);
    CHECK_FALSE(associate(cfg, empty).valid);
}

TEST_CASE("association maximises biased received power") {
    const auto cfg = fixtures::association_scenario(200, 5.0);
    for (std::uint64_t t = 0; t < 50; ++t) {
        const auto r = sample_realization(cfg, 11, t);
        const auto a = associate(cfg, r);
        REQUIRE(a.valid);
        const double chosen = a.macro ? biased_power_macro(cfg.macro, cfg.eta, a.distance)
                                      : biased_power_small(cfg.small(a.small_tier), cfg.eta, a.distance);
        for (double d2 : r.macro.distance_sq) CHECK(biased_power_macro(cfg.macro, cfg.eta, std::sqrt(d2)) <= chosen);
        for (std::size_t i = 0; i < 2; ++i) {
            for (double d2 : r.small[i].distance_sq) {
                CHECK(biased_power_small(cfg.small(i), cfg.eta, std::sqrt(d2)) <= chosen);
            }
        }
        if (!a.macro) CHECK((a.role == Role::near) == (a.distance <= cfg.small(a.small_tier).pair_distance_m));
    }
}

TEST_CASE("raising the near share draws more users to small cells" * doctest::timeout(300)) {
    auto low = sparse();
    auto high = low;
    high.small_tiers[0].near_share = 0.45;
    high.small_tiers[0].far_share = 0.55;
    const auto runs = simulate_batch({low, high}, {Targets(1.0, 1.0), Targets(1.0, 1.0)}, 20000, 4);
    const auto m = Metric::parse("association_small[0]");
    CHECK(runs[1].estimate(m).mean > runs[0].estimate(m).mean);
}

TEST_CASE("noise-limited trial reproduces hand-computed SINRs") {
    auto cfg = sparse();
    const auto& t = cfg.small(0);
    const double g = 0.7;
    const Targets targets(1.0, 1.0);

    // Near user at 5 m.
    {
        const auto r = lone_small_bs(5.0, g);
        const double rho = t.power_w * cfg.eta * g * std::pow(5.0, -4.0) / cfg.noise_power_w;
        const double rho_pair = t.power_w * cfg.eta * g * std::pow(10.0, -4.0) / cfg.noise_power_w;
        const auto out = evaluate_noma_trial(cfg, r, targets);
        const double to_partner = 0.6 * rho / (0.4 * rho + 1.0);
        CHECK(out.covered == (to_partner > 1.0 && 0.4 * rho > 1.0));
        CHECK(out.typical_rate == doctest::Approx(std::log2(1.0 + 0.4 * rho)).epsilon(1e-14));
        CHECK(out.paired_rate == doctest::Approx(std::log2(1.0 + 0.6 * rho_pair / (0.4 * rho_pair + 1.0))).epsilon(1e-14));
        CHECK(out.sic_order_holds);
        const auto oma = evaluate_oma_trial(cfg, r, targets);
        CHECK(oma.sum_rate ==
              doctest::Approx(0.5 * std::log2(1.0 + rho) + 0.5 * std::log2(1.0 + rho_pair)).epsilon(1e-14));
        CHECK(oma.covered == (rho > 3.0));
    }
    // Far user at 40 m.
    {
        const auto r = lone_small_bs(40.0, g);
        const double rho = t.power_w * cfg.eta * g * std::pow(40.0, -4.0) / cfg.noise_power_w;
        const double rho_pair = t.power_w * cfg.eta * g * std::pow(10.0, -4.0) / cfg.noise_power_w;
        const auto out = evaluate_noma_trial(cfg, r, targets);
        const double own = 0.6 * rho / (0.4 * rho + 1.0);
        CHECK(out.covered == (own > 1.0));
        CHECK(out.typical_rate == doctest::Approx(std::log2(1.0 + own)).epsilon(1e-14));
        CHECK(out.paired_rate == doctest::Approx(std::log2(1.0 + 0.4 * rho_pair)).epsilon(1e-14));
    }
    // Interference-free and noiseless: the far message saturates at a_m / a_n.
    {
        cfg.noise_power_w = 0.0;
        const auto out = evaluate_noma_trial(cfg, lone_small_bs(40.0, g), targets);
        CHECK(out.typical_rate == doctest::Approx(std::log2(1.0 + 1.5)).epsilon(1e-14));
    }
}

TEST_CASE("macro trial without interference") {
    auto cfg = sparse();
    Realization r;
    r.radius_m = 1e4;
    r.macro.distance_sq = {300.0 * 300.0};
    r.macro.fading = {1.0};
    r.small.resize(1);
    r.serving_macro_fading = 61.0;
    const double snr = cfg.macro.power_w * cfg.eta * 61.0 * std::pow(300.0, -3.5) / 4.0 / cfg.noise_power_w;
    CHECK(evaluate_macro_trial(cfg, r) == doctest::Approx(std::log2(1.0 + snr)).epsilon(1e-14));
    CHECK_THROWS_AS(evaluate_macro_trial(cfg, lone_small_bs(5.0, 1.0)), PreconditionError);
}

TEST_CASE("interference excludes the serving BS") {
    const auto cfg = fixtures::coverage_scenario();
    const auto r = sample_realization(cfg, 21, 0);
    const auto a = associate(cfg, r);
    double manual = 0.0;
    for (std::size_t j = 0; j < r.macro.distance_sq.size(); ++j) {
        if (a.macro && j == a.index) continue;
        manual += cfg.macro.power_w * cfg.eta / cfg.macro.streams * r.macro.fading[j] *
                  std::pow(r.macro.distance_sq[j], -cfg.macro.path_loss_exponent / 2.0);
    }
    for (std::size_t j = 0; j < r.small[0].distance_sq.size(); ++j) {
        if (!a.macro && j == a.index) continue;
        manual += cfg.small(0).power_w * cfg.eta * r.small[0].fading[j] * std::pow(r.small[0].distance_sq[j], -2.0);
    }
    CHECK(interference(cfg, r, a) == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("serving macro fading concentrates around the array gain") {
    auto cfg = sparse();
    cfg.small_tiers[0].density = 0.0;
    cfg.macro.density = 1e-9;
    double previous = 1e9;
    for (int m : {8, 64, 512}) {
        cfg.macro.antennas = m;
        double sum = 0.0;
        double sq = 0.0;
        const int draws = 2000;
        for (int t = 0; t < draws; ++t) {
            const double v = sample_realization(cfg, 5, t).serving_macro_fading / cfg.macro.array_gain();
            sum += v;
            sq += (v - 1.0) * (v - 1.0);
        }
        CHECK(sum / draws == doctest::Approx(1.0).epsilon(0.05));
        const double spread = std::sqrt(sq / draws);
        CHECK(spread < previous);
        previous = spread;
    }
}

TEST_CASE("estimates are independent of the thread count" * doctest::timeout(300)) {
    const auto cfg = sparse();
    const Targets targets(1.0, 1.0);
    SimulationOptions one;
    SimulationOptions four;
    four.threads = 4;
    SimulationOptions seven;
    seven.threads = 7;
    for (const char* name : {"coverage[0]", "ergodic_rate[0]", "macro_rate", "association_macro"}) {
        const auto m = Metric::parse(name);
        const auto a = estimate(cfg, targets, m, 2000, 42, one);
        const auto b = estimate(cfg, targets, m, 2000, 42, four);
        const auto c = estimate(cfg, targets, m, 2000, 42, seven);
        CHECK(a.mean == b.mean);
        CHECK(a.mean == c.mean);
        CHECK(a.ci_halfwidth_99 == b.ci_halfwidth_99);
        CHECK(a.seed == 42);
        CHECK(a.trials == 2000);
    }
}

TEST_CASE("batched runs equal separate runs") {
    auto a = sparse();
    auto b = a;
    b.small_tiers[0].bias = 20.0;
    auto c = a;
    c.macro.antennas = 200;
    auto d = a;
    d.small_tiers[0].density *= 2.0;
    const std::vector<Targets> targets(4, Targets(1.0, 1.0));
    SimulationOptions opts;
    opts.threads = 3;
    const auto runs = simulate_batch({a, b, c, d}, targets, 500, 9, opts);
    const NetworkConfig cfgs[] = {a, b, c, d};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto single = simulate(cfgs[i], targets[i], 500, 9);
        REQUIRE(single.records().size() == runs[i].records().size());
        for (std::size_t t = 0; t < 500; ++t) {
            const auto& x = single.records()[t];
            const auto& y = runs[i].records()[t];
            CHECK(x.tier == y.tier);
            CHECK(x.noma_covered == y.noma_covered);
            CHECK(x.noma_rate == y.noma_rate);
            CHECK(x.oma_rate == y.oma_rate);
            CHECK(x.macro_rate == y.macro_rate);
        }
    }
}

TEST_CASE("fewer than 100 trials are rejected") {
    const auto cfg = sparse();
    CHECK_THROWS_AS(estimate(cfg, Targets(1.0, 1.0), Metric::parse("coverage[0]"), 0, 1), DomainError);
    CHECK_THROWS_AS(simulate(cfg, Targets(1.0, 1.0), 99, 1), DomainError);
}

TEST_CASE("metric names round-trip") {
    for (const char* name : {"association_macro", "association_small[2]", "coverage[0]", "ergodic_rate[1]",
                             "macro_rate", "oma_coverage[0]", "oma_rate[3]"}) {
        CHECK(Metric::parse(name).name() == name);
    }
    CHECK_THROWS_AS(Metric::parse("coverage"), DomainError);
    CHECK_THROWS_AS(Metric::parse("macro_rate[0]"), DomainError);
    CHECK_THROWS_AS(Metric::parse("throughput"), DomainError);
}

TEST_CASE("undecodable power split gives zero coverage in every trial") {
    const auto cfg = sparse();
    const auto run = simulate(cfg, Targets(2.0, 2.0), 3000, 8);
    const auto e = run.estimate(Metric::parse("coverage[0]"));
    CHECK(e.samples > 0);
    CHECK(e.mean == 0.0);
}

TEST_CASE("SIC ordering holds sample-wise on a shared interference field") {
    const auto run = simulate(fixtures::coverage_scenario(), Targets(1.0, 1.0), 2000, 13);
    CHECK(run.sic_order_violations() == 0);
}

TEST_CASE("independent paired field keeps positions and redraws marks") {
    const auto cfg = fixtures::coverage_scenario();
    SimulationOptions opts;
    opts.paired_field = PairedField::independent;
    const auto shared = sample_realization(cfg, 4, 0);
    const auto indep = sample_realization(cfg, 4, 0, opts);
    CHECK(shared.small[0].distance_sq == indep.small[0].distance_sq);
    CHECK(shared.small[0].fading == indep.small[0].fading);
    CHECK(shared.small[0].paired_fading.empty());
    CHECK(indep.small[0].paired_fading.size() == indep.small[0].fading.size());
    CHECK(indep.small[0].paired_fading != indep.small[0].fading);
    const auto run = simulate(cfg, Targets(1.0, 1.0), 500, 4, opts);
    CHECK(run.estimate(Metric::parse("coverage[0]")).samples > 0);
}

TEST_CASE("confidence interval shrinks as trials^-1/2" * doctest::timeout(300)) {
    const auto cfg = sparse();
    const auto run = simulate(cfg, Targets(1.0, 1.0), 100000, 17);
    const auto m = Metric::parse("association_macro");
    // Sub-runs over trial prefixes share the estimator; rebuild them from the records.
    const auto ci = [&](std::size_t n) {
        std::vector<TrialRecord> head(run.records().begin(), run.records().begin() + static_cast<long>(n));
        return SimulationRun(std::move(head), 17).estimate(m).ci_halfwidth_99;
    };
    const double c1 = ci(1000);
    const double c10 = ci(10000);
    const double c100 = ci(100000);
    CHECK(c1 / c10 == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
    CHECK(c1 / c100 == doctest::Approx(10.0).epsilon(0.2));
}

TEST_CASE("coverage agrees with the analytical value" * doctest::timeout(600)) {
    const auto cfg = fixtures::coverage_scenario(5.0);
    const Targets targets(1.0, 1.0);
    const double analytic = coverage_probability(cfg, 0, targets).total;
    const auto e = estimate(cfg, targets, Metric::parse("coverage[0]"), 20000, 31);
    INFO("analytic " << analytic << " mc " << e.mean);
    CHECK(std::abs(e.mean - analytic) <= 0.015);
}

TEST_CASE("tier frequencies match association probabilities" * doctest::timeout(600)) {
    const auto cfg = fixtures::association_scenario(200, 5.0);
    const auto run = simulate(cfg, Targets(1.0, 1.0), 20000, 77);
    const auto check = [&](const char* metric, double analytic) {
        const auto e = run.estimate(Metric::parse(metric));
        INFO(metric << " analytic " << analytic << " mc " << e.mean);
        CHECK(std::abs(e.mean - analytic) <= 2.0 * e.ci_halfwidth_99 / kZ99);
    };
    check("association_macro", association_prob_macro(cfg));
    check("association_small[0]", association_prob_small(cfg, 0));
    check("association_small[1]", association_prob_small(cfg, 1));
}

TEST_CASE("doubling the disc radius leaves coverage inside the interval" * doctest::timeout(600)) {
    const auto cfg = fixtures::coverage_scenario(5.0);
    const Targets targets(1.0, 1.0);
    SimulationOptions wide;
    wide.radius_m = 2e4;
    const auto m = Metric::parse("coverage[0]");
    const auto base = estimate(cfg, targets, m, 10000, 55);
    const auto doubled = estimate(cfg, targets, m, 10000, 55, wide);
    CHECK(std::abs(base.mean - doubled.mean) < base.ci_halfwidth_99);
}
