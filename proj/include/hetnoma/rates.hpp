#pragma once

#include "hetnoma/model.hpp"
#include "hetnoma/specfun.hpp"

#include <cstddef>
#include <vector>

namespace hetnoma {

/// Ergodic sum rate of one NOMA small tier, split by the typical user's side
/// of the pair radius.
struct SmallTierRate {
    double near = 0.0;
    double far = 0.0;
    double total = 0.0;
};

struct RateReport {
    std::vector<SmallTierRate> small_tier_rates;
    double macro_rate_lower_bound = 0.0;  // per stream
    std::vector<double> association_small;
    double association_macro = 0.0;
    /// A_1 * N * tau_1L + sum_k A_k * tau_k
    double spectrum_efficiency_lower_bound = 0.0;
};

/// Tolerances for the nested rate integrals.
struct RateQuadrature {
    specfun::QuadratureSettings outer{1e-6, 1e-12, 2000};
    specfun::QuadratureSettings inner = specfun::QuadratureSettings::inner();
};

/// Combined macro and small-cell Laplace exponent for a user served by tier k
/// at distance x: exp(-theta) is the Laplace transform of the total
/// interference at s.
double interference_exponent_theta(const NetworkConfig& cfg, std::size_t k, double s, double x);

// Unnormalised CCDF masses. Multiplying by 2 pi lambda_k / A_k turns each
// into a joint probability over the serving distance and the SINR event.

/// Paired far user's SINR while the typical user is near (x <= r_k).
/// Zero for z >= a_m / a_n.
double ccdf_connected_far(const NetworkConfig& cfg, std::size_t k, double z, const RateQuadrature& q = {});
/// Typical near user's SINR after SIC.
double ccdf_typical_near(const NetworkConfig& cfg, std::size_t k, double z, const RateQuadrature& q = {});
/// Typical far user's SINR (x > r_k). Zero for z >= a_m / a_n.
double ccdf_typical_far(const NetworkConfig& cfg, std::size_t k, double z, const RateQuadrature& q = {});
/// Paired near user's SINR after SIC while the typical user is far.
double ccdf_connected_near(const NetworkConfig& cfg, std::size_t k, double z, const RateQuadrature& q = {});

double ergodic_rate_near(const NetworkConfig& cfg, std::size_t k, const RateQuadrature& q = {});
double ergodic_rate_far(const NetworkConfig& cfg, std::size_t k, const RateQuadrature& q = {});
SmallTierRate ergodic_rate_small(const NetworkConfig& cfg, std::size_t k, const RateQuadrature& q = {});

/// Jensen lower bound on the per-stream ergodic rate of a macro user.
double macro_rate_lower_bound(const NetworkConfig& cfg, const specfun::QuadratureSettings& q = {});
/// Closed form of the bound for equal path-loss exponents.
double macro_rate_lower_bound_closed(const NetworkConfig& cfg);

RateReport spectrum_efficiency(const NetworkConfig& cfg, const RateQuadrature& q = {});

}  // namespace hetnoma
