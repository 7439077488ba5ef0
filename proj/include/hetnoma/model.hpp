#pragma once

#include "hetnoma/specfun.hpp"

#include <cstddef>
#include <vector>

namespace hetnoma {

/// Massive-MIMO macro tier (tier 1). Each BS serves `streams` users with
/// zero-forcing over `antennas` antennas at equal per-stream power.
struct MacroTier {
    double density = 0.0;             // BS / m^2
    double power_w = 0.0;             // total transmit power
    double path_loss_exponent = 3.5;  // > 2
    int antennas = 1;                 // M
    int streams = 1;                  // N

    double array_gain() const { return static_cast<double>(antennas - streams + 1); }
    double delta() const { return 2.0 / path_loss_exponent; }

    bool operator==(const MacroTier&) const = default;
};

/// NOMA small-cell tier. Every BS already serves one paired user at
/// `pair_distance_m`; the typical user is superposed on it with the
/// near/far power shares.
struct SmallTier {
    double density = 0.0;             // BS / m^2
    double power_w = 0.0;
    double path_loss_exponent = 4.0;  // > 2
    double bias = 1.0;                // > 0
    double pair_distance_m = 10.0;    // > 0
    double far_share = 0.6;           // a_m
    double near_share = 0.4;          // a_n, a_m + a_n = 1, a_m > a_n

    double delta() const { return 2.0 / path_loss_exponent; }

    bool operator==(const SmallTier&) const = default;
};

struct NetworkConfig {
    MacroTier macro;
    std::vector<SmallTier> small_tiers;  // tiers 2..K, in order
    double eta = 0.0;                    // frequency-dependent path-loss factor
    double noise_power_w = 0.0;
    double carrier_frequency_hz = 1e9;
    double bandwidth_hz = 1e7;
    double noise_figure_db = 10.0;

    /// K, counting the macro tier.
    std::size_t tier_count() const { return small_tiers.size() + 1; }

    const SmallTier& small(std::size_t k) const;

    /// Throws ValidationError naming the first violated invariant.
    void validate() const;

    /// True when every tier shares the macro path-loss exponent.
    bool equal_path_loss() const;

    /// True when all small tiers use the same near-user share.
    bool common_near_share() const;

    bool operator==(const NetworkConfig&) const = default;
};

/// Target rates and the SINR thresholds they imply.
class Targets {
public:
    Targets() = default;
    Targets(double rate_typical_bpcu, double rate_connected_bpcu);

    double rate_typical() const { return rate_typical_; }
    double rate_connected() const { return rate_connected_; }
    double tau_typical() const { return tau_typical_; }
    double tau_connected() const { return tau_connected_; }

    bool operator==(const Targets&) const = default;

private:
    double rate_typical_ = 1.0;
    double rate_connected_ = 1.0;
    double tau_typical_ = 1.0;
    double tau_connected_ = 1.0;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// (c / (4 pi f))^2, the free-space reference factor at carrier f.
double free_space_eta(double carrier_frequency_hz);

/// -170 + 10 log10(bandwidth) + noise_figure dBm, in watts.
double thermal_noise_watts(double bandwidth_hz, double noise_figure_db);

/// a_n * P * eta * d^-alpha * B: the biased received power used for
/// association towards a small-cell BS at distance d.
double biased_power_small(const SmallTier& tier, double eta, double distance);

/// G_M * P1 * eta * d^-alpha1 / N: per-user received power from a macro BS.
double biased_power_macro(const MacroTier& macro, double eta, double distance);

// Exclusion radii. Indices k and i address cfg.small_tiers (0-based).

/// Closest admissible distance of a tier-i small BS when the user is served
/// by tier k at distance x.
double exclusion_radius_small(const NetworkConfig& cfg, std::size_t k, std::size_t i, double x);

/// Closest admissible macro BS distance when the user is served by tier k at x.
double exclusion_radius_macro(const NetworkConfig& cfg, std::size_t k, double x);

/// Closest admissible tier-i small BS distance for a macro user at distance x.
double exclusion_radius_small_for_macro_user(const NetworkConfig& cfg, std::size_t i, double x);

/// Log-probability that no BS beats a tier-k BS at distance x (the bracket
/// in the association integrand; always <= 0).
double association_exponent_small(const NetworkConfig& cfg, std::size_t k, double x);
double association_exponent_macro(const NetworkConfig& cfg, double x);

/// Characteristic serving distance 1 / sqrt(pi * sum(lambda)), used to scale
/// semi-infinite quadratures over distance.
double distance_scale(const NetworkConfig& cfg);

double association_prob_small(const NetworkConfig& cfg, std::size_t k,
                              const specfun::QuadratureSettings& q = {});
double association_prob_macro(const NetworkConfig& cfg, const specfun::QuadratureSettings& q = {});

/// Closed forms valid when every tier has the same path-loss exponent.
/// Throw PreconditionError otherwise.

/// b_k: with equal exponents the tier-k association exponent is -pi * b_k * x^2.
double effective_density_small(const NetworkConfig& cfg, std::size_t k);
/// b_1, the macro counterpart.
double effective_density_macro(const NetworkConfig& cfg);

double association_prob_closed_small(const NetworkConfig& cfg, std::size_t k);
double association_prob_closed_macro(const NetworkConfig& cfg);

/// Serving-distance densities conditioned on the association outcome.
/// Pass a precomputed association probability to skip its quadrature.
double serving_distance_pdf_small(const NetworkConfig& cfg, std::size_t k, double x, double association = -1.0);
double serving_distance_pdf_macro(const NetworkConfig& cfg, double x, double association = -1.0);

}  // namespace hetnoma
