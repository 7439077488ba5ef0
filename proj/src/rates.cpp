#include "hetnoma/rates.hpp"

#include "hetnoma/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace hetnoma {
namespace {

constexpr double kPi = std::numbers::pi;

void check_z(double z) {
    if (!(z >= 0.0) || std::isnan(z)) throw DomainError("SINR threshold z must be >= 0");
}

// int x exp(Lambda(x) - sigma^2 s(x) - Theta(s(x), x)) dx over [lo, hi) with
// s(x) = scale_s * d(x)^alpha_k, where d is x itself or the pair distance.
double ccdf_mass(const NetworkConfig& cfg, std::size_t k, double scale_s, bool serving_at_pair, bool near_side,
                 const specfun::QuadratureSettings& q) {
    const auto& tier = cfg.small(k);
    const double r = tier.pair_distance_m;
    const double alpha = tier.path_loss_exponent;
    const double pair_s = scale_s * std::pow(r, alpha);
    const auto integrand = [&](double x) {
        const double s = serving_at_pair ? pair_s : scale_s * std::pow(x, alpha);
        if (!std::isfinite(s)) return 0.0;
        const double exponent =
            association_exponent_small(cfg, k, x) - cfg.noise_power_w * s - interference_exponent_theta(cfg, k, s, x);
        return x * std::exp(exponent);
    };
    if (near_side) return specfun::integrate(integrand, 0.0, r, q);
    return specfun::integrate_to_infinity(integrand, r, q, distance_scale(cfg));
}

// int_0^upper F(z) / (1 + z) dz in y = ln(1 + z); upper may be +inf.
double rate_integral(const std::function<double(double)>& ccdf, double upper, const specfun::QuadratureSettings& q) {
    const auto integrand = [&](double y) {
        const double z = std::expm1(y);
        return std::isfinite(z) ? ccdf(z) : 0.0;
    };
    if (std::isinf(upper)) return specfun::integrate_to_infinity(integrand, 0.0, q, 1.0);
    return specfun::integrate(integrand, 0.0, std::log1p(upper), q);
}

double tier_prefactor(const NetworkConfig& cfg, std::size_t k) {
    const auto& tier = cfg.small(k);
    if (tier.density == 0.0) throw DomainError("rate of an empty tier is undefined");
    return 2.0 * kPi * tier.density / (association_prob_small(cfg, k) * std::numbers::ln2);
}

void check_exponents(const NetworkConfig& cfg) {
    if (!(cfg.macro.path_loss_exponent > 2.0)) throw DivergenceError("mean macro interference diverges for alpha <= 2");
    for (const auto& t : cfg.small_tiers) {
        if (!(t.path_loss_exponent > 2.0)) throw DivergenceError("mean small-cell interference diverges for alpha <= 2");
    }
}

}  // namespace

double interference_exponent_theta(const NetworkConfig& cfg, std::size_t k, double s, double x) {
    if (!(s >= 0.0) || std::isnan(s)) throw DomainError("Laplace argument s must be >= 0");
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("serving distance must be finite and > 0");
    if (s == 0.0) return 0.0;
    const auto& m = cfg.macro;
    double theta = 0.0;
    if (m.density > 0.0) {
        const double c = s * m.power_w * cfg.eta / m.streams;
        theta += m.density * kPi * m.delta() *
                 specfun::macro_laplace_sum(c, exclusion_radius_macro(cfg, k, x), m.delta(), m.streams);
    }
    for (std::size_t i = 0; i < cfg.small_tiers.size(); ++i) {
        const auto& t = cfg.small_tiers[i];
        if (t.density == 0.0) continue;
        const double omega = exclusion_radius_small(cfg, k, i, x);
        const double ps = s * t.power_w * cfg.eta;
        theta += ps * t.density * 2.0 * kPi * std::pow(omega, 2.0 - t.path_loss_exponent) /
                 (t.path_loss_exponent * (1.0 - t.delta())) *
                 specfun::hyp2f1_coverage(t.delta(), ps * std::pow(omega, -t.path_loss_exponent));
    }
    return theta;
}

double ccdf_connected_far(const NetworkConfig& cfg, std::size_t k, double z, const RateQuadrature& q) {
    check_z(z);
    const auto& t = cfg.small(k);
    const double gap = t.far_share - t.near_share * z;
    if (gap <= 0.0) return 0.0;
    return ccdf_mass(cfg, k, z / (gap * t.power_w * cfg.eta), true, true, q.inner);
}

double ccdf_typical_near(const NetworkConfig& cfg, std::size_t k, double z, const RateQuadrature& q) {
    check_z(z);
    const auto& t = cfg.small(k);
    return ccdf_mass(cfg, k, z / (t.near_share * t.power_w * cfg.eta), false, true, q.inner);
}

double ccdf_typical_far(const NetworkConfig& cfg, std::size_t k, double z, const RateQuadrature& q) {
    check_z(z);
    const auto& t = cfg.small(k);
    const double gap = t.far_share - t.near_share * z;
    if (gap <= 0.0) return 0.0;
    return ccdf_mass(cfg, k, z / (gap * t.power_w * cfg.eta), false, false, q.inner);
}

double ccdf_connected_near(const NetworkConfig& cfg, std::size_t k, double z, const RateQuadrature& q) {
    check_z(z);
    const auto& t = cfg.small(k);
    return ccdf_mass(cfg, k, z / (t.near_share * t.power_w * cfg.eta), true, false, q.inner);
}

double ergodic_rate_near(const NetworkConfig& cfg, std::size_t k, const RateQuadrature& q) {
    const auto& t = cfg.small(k);
    const double prefactor = tier_prefactor(cfg, k);
    const double connected =
        rate_integral([&](double z) { return ccdf_connected_far(cfg, k, z, q); }, t.far_share / t.near_share, q.outer);
    const double typical = rate_integral([&](double z) { return ccdf_typical_near(cfg, k, z, q); },
                                         std::numeric_limits<double>::infinity(), q.outer);
    return prefactor * (connected + typical);
}

double ergodic_rate_far(const NetworkConfig& cfg, std::size_t k, const RateQuadrature& q) {
    const auto& t = cfg.small(k);
    const double prefactor = tier_prefactor(cfg, k);
    const double connected = rate_integral([&](double z) { return ccdf_connected_near(cfg, k, z, q); },
                                           std::numeric_limits<double>::infinity(), q.outer);
    const double typical =
        rate_integral([&](double z) { return ccdf_typical_far(cfg, k, z, q); }, t.far_share / t.near_share, q.outer);
    return prefactor * (connected + typical);
}

SmallTierRate ergodic_rate_small(const NetworkConfig& cfg, std::size_t k, const RateQuadrature& q) {
    SmallTierRate out;
    out.near = ergodic_rate_near(cfg, k, q);
    out.far = ergodic_rate_far(cfg, k, q);
    out.total = out.near + out.far;
    return out;
}

double macro_rate_lower_bound(const NetworkConfig& cfg, const specfun::QuadratureSettings& q) {
    check_exponents(cfg);
    const auto& m = cfg.macro;
    if (m.density == 0.0) throw DomainError("macro rate of an empty macro tier is undefined");
    const double a1 = m.path_loss_exponent;
    const double association = association_prob_macro(cfg, q);
    const auto mean_interference = [&](double x) {
        double value = 2.0 * m.power_w * cfg.eta * kPi * m.density / (a1 - 2.0) * std::pow(x, 2.0 - a1);
        for (std::size_t i = 0; i < cfg.small_tiers.size(); ++i) {
            const auto& t = cfg.small_tiers[i];
            if (t.density == 0.0) continue;
            value += 2.0 * kPi * t.density * t.power_w * cfg.eta / (t.path_loss_exponent - 2.0) *
                     std::pow(exclusion_radius_small_for_macro_user(cfg, i, x), 2.0 - t.path_loss_exponent);
        }
        return value;
    };
    const auto integrand = [&](double x) {
        const double pdf = 2.0 * kPi * m.density * x / association * std::exp(association_exponent_macro(cfg, x));
        if (pdf == 0.0) return 0.0;
        return (mean_interference(x) + cfg.noise_power_w) * std::pow(x, a1) * pdf;
    };
    const double denominator = specfun::integrate_to_infinity(integrand, 0.0, q, distance_scale(cfg));
    return std::log2(1.0 + m.power_w * m.array_gain() * cfg.eta / (m.streams * denominator));
}

double macro_rate_lower_bound_closed(const NetworkConfig& cfg) {
    check_exponents(cfg);
    if (!cfg.equal_path_loss()) throw PreconditionError("closed-form macro bound needs equal path-loss exponents");
    const auto& m = cfg.macro;
    if (m.density == 0.0) throw DomainError("macro rate of an empty macro tier is undefined");
    const double alpha = m.path_loss_exponent;
    const double delta = m.delta();
    double psi = 2.0 * m.power_w * cfg.eta * kPi * m.density / (alpha - 2.0);
    for (const auto& t : cfg.small_tiers) {
        const double ratio = t.near_share * (t.power_w / m.power_w) * t.bias * m.streams / m.array_gain();
        psi += 2.0 * kPi * t.density * t.power_w * cfg.eta / (alpha - 2.0) * std::pow(ratio, delta - 1.0);
    }
    const double pib = kPi * effective_density_macro(cfg);
    const double denominator = psi / pib + cfg.noise_power_w * std::tgamma(alpha / 2.0 + 1.0) * std::pow(pib, -alpha / 2.0);
    return std::log2(1.0 + m.power_w * m.array_gain() * cfg.eta / m.streams / denominator);
}

RateReport spectrum_efficiency(const NetworkConfig& cfg, const RateQuadrature& q) {
    RateReport out;
    out.association_macro = association_prob_macro(cfg, q.outer);
    if (cfg.macro.density > 0.0) out.macro_rate_lower_bound = macro_rate_lower_bound(cfg, q.outer);
    double se = out.association_macro * cfg.macro.streams * out.macro_rate_lower_bound;
    for (std::size_t k = 0; k < cfg.small_tiers.size(); ++k) {
        const double a = association_prob_small(cfg, k, q.outer);
        out.association_small.push_back(a);
        SmallTierRate rate;
        if (cfg.small_tiers[k].density > 0.0) rate = ergodic_rate_small(cfg, k, q);
        out.small_tier_rates.push_back(rate);
        se += a * rate.total;
    }
    out.spectrum_efficiency_lower_bound = se;
    return out;
}

}  // namespace hetnoma
