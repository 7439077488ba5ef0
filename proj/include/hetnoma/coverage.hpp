#pragma once

#include "hetnoma/model.hpp"
#include "hetnoma/specfun.hpp"

#include <cstddef>
#include <vector>

namespace hetnoma {

/// Coverage of a typical user served by a NOMA small tier, split by whether
/// it lands inside (near) or outside (far) the paired user's radius.
struct CoverageBreakdown {
    double total = 0.0;
    double near_component = 0.0;
    double far_component = 0.0;
    /// Both power-split guards failed, so coverage is identically zero.
    bool zero_by_power_split = false;
    /// Components pulled back into [0, 1] after quadrature round-off.
    int clamp_events = 0;
};

/// SIC decoding thresholds on the normalised serving-link SNR.
struct DecodingThresholds {
    /// max(tau_c / (a_m - tau_c a_n), tau_t / a_n); valid when near_feasible.
    double near = 0.0;
    /// tau_t / (a_m - tau_t a_n); valid when far_feasible.
    double far = 0.0;
    bool near_feasible = false;  // a_m - tau_c a_n > 0
    bool far_feasible = false;   // a_m - tau_t a_n > 0
};

DecodingThresholds decoding_thresholds(const SmallTier& tier, const Targets& targets);

/// Laplace transform of the small-cell interference seen by a user served by
/// tier k at distance x0, evaluated at s (1/W).
double laplace_small_interference(const NetworkConfig& cfg, std::size_t k, double s, double x0);

/// Laplace transform of the macro interference for the same user.
double laplace_macro_interference(const NetworkConfig& cfg, std::size_t k, double s, double x0);

/// Exponent of the conditional coverage at threshold `epsilon` split into
/// its power-law pieces, so that
///   -ln P(cov | x0) = noise * x0^alpha_k + macro * x0^macro_power
///                     + sum_i small[i] * x0^small_power[i].
/// The special-function terms depend only on epsilon, so building this once
/// makes every x0 evaluation cheap.
class CoverageExponent {
public:
    CoverageExponent(const NetworkConfig& cfg, std::size_t k, double epsilon);

    double operator()(double x0) const;

    double noise_coefficient() const { return noise_; }
    double macro_coefficient() const { return macro_; }
    const std::vector<double>& small_coefficients() const { return small_; }

private:
    double serving_exponent_;
    double noise_;
    double macro_;
    double macro_power_;
    std::vector<double> small_;
    std::vector<double> small_power_;
};

/// P(typical user decodes partner then itself | served by tier k at x0 <= r_k).
/// Exactly 0 when a_m - tau_c a_n <= 0.
double conditional_coverage_near(const NetworkConfig& cfg, std::size_t k, const Targets& targets, double x0);

/// P(typical user decodes itself | served by tier k at x0 > r_k).
/// Exactly 0 when a_m - tau_t a_n <= 0.
double conditional_coverage_far(const NetworkConfig& cfg, std::size_t k, const Targets& targets, double x0);

/// Coverage of a user associated with tier k, averaged over the serving
/// distance with the integral split at the pair radius.
CoverageBreakdown coverage_probability(const NetworkConfig& cfg, std::size_t k, const Targets& targets,
                                       const specfun::QuadratureSettings& q = {});

/// Interference-limited closed form for equal path-loss exponents.
/// Throws PreconditionError unless every exponent matches and noise is zero.
double coverage_probability_closed(const NetworkConfig& cfg, std::size_t k, const Targets& targets);

}  // namespace hetnoma
