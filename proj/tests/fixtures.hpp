#pragma once

#include "hetnoma/model.hpp"

#include <cmath>
#include <numbers>

namespace fixtures {

inline double macro_density() { return 1.0 / (std::numbers::pi * 500.0 * 500.0); }

inline hetnoma::SmallTier small(double multiplier, double power_dbm, double pair_m, double far = 0.6) {
    hetnoma::SmallTier t;
    t.density = multiplier * macro_density();
    t.power_w = hetnoma::dbm_to_watts(power_dbm);
    t.path_loss_exponent = 4.0;
    t.bias = 1.0;
    t.pair_distance_m = pair_m;
    t.far_share = far;
    t.near_share = 1.0 - far;
    return t;
}

inline hetnoma::NetworkConfig base(int antennas, int streams, double macro_dbm) {
    hetnoma::NetworkConfig cfg;
    cfg.macro.density = macro_density();
    cfg.macro.power_w = hetnoma::dbm_to_watts(macro_dbm);
    cfg.macro.path_loss_exponent = 3.5;
    cfg.macro.antennas = antennas;
    cfg.macro.streams = streams;
    cfg.eta = hetnoma::free_space_eta(1e9);
    cfg.noise_power_w = hetnoma::thermal_noise_watts(1e7, 10.0);
    return cfg;
}

/// K=2, M=200, N=15, P1=40 dBm, P2=20 dBm, lambda2=20 lambda1, r=10 m.
inline hetnoma::NetworkConfig coverage_scenario(double bias = 5.0, double far = 0.6) {
    auto cfg = base(200, 15, 40.0);
    cfg.small_tiers = {small(20.0, 20.0, 10.0, far)};
    cfg.small_tiers[0].bias = bias;
    return cfg;
}

/// K=3, N=15, P1=40, P2=30, P3=20 dBm, lambda2=lambda3=20 lambda1, B3=20 B2.
inline hetnoma::NetworkConfig association_scenario(int antennas, double b2) {
    auto cfg = base(antennas, 15, 40.0);
    cfg.small_tiers = {small(20.0, 30.0, 10.0), small(20.0, 20.0, 10.0)};
    cfg.small_tiers[0].bias = b2;
    cfg.small_tiers[1].bias = 20.0 * b2;
    return cfg;
}

/// Same as coverage_scenario with a 50 m pair radius.
inline hetnoma::NetworkConfig rate_scenario(double bias = 5.0, double p2_dbm = 20.0) {
    auto cfg = base(200, 15, 40.0);
    cfg.small_tiers = {small(20.0, p2_dbm, 50.0)};
    cfg.small_tiers[0].bias = bias;
    return cfg;
}

/// K=2, M=50, N=5, P2=20 dBm, lambda2=100 lambda1, r=50 m.
inline hetnoma::NetworkConfig macro_rate_scenario(double bias, double p1_dbm) {
    auto cfg = base(50, 5, p1_dbm);
    cfg.small_tiers = {small(100.0, 20.0, 50.0)};
    cfg.small_tiers[0].bias = bias;
    return cfg;
}

/// Every tier at alpha = 4 and no noise, where the closed forms apply.
inline hetnoma::NetworkConfig equal_exponent(hetnoma::NetworkConfig cfg) {
    cfg.macro.path_loss_exponent = 4.0;
    for (auto& t : cfg.small_tiers) t.path_loss_exponent = 4.0;
    cfg.noise_power_w = 0.0;
    return cfg;
}

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fixtures
