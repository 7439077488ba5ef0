#include "hetnoma/coverage.hpp"

#include "hetnoma/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hetnoma {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kConsistencySlack = 1e-6;

void check_laplace_args(double s, double x0) {
    if (!(s >= 0.0) || std::isnan(s)) throw DomainError("Laplace argument s must be >= 0");
    if (!(x0 > 0.0) || !std::isfinite(x0)) throw DomainError("serving distance x0 must be finite and > 0");
}

// sum_p C(N, p) int_0^u v^(p - delta - 1) (1 + v)^-N dv
double macro_binomial_sum(double u, double delta, int N) {
    double sum = 0.0;
    for (int p = 1; p <= N; ++p) {
        sum += specfun::binomial(N, p) * specfun::real_branch_beta(u, p, delta, N);
    }
    if (!std::isfinite(sum)) throw OverflowError("macro interference sum overflowed");
    return sum;
}

void check_probability(double value) {
    if (!(value >= -kConsistencySlack && value <= 1.0 + kConsistencySlack)) {
        throw NumericalError("coverage component " + std::to_string(value) + " is outside [0, 1]");
    }
}

double clamp_probability(double value, int& clamp_events) {
    if (value < 0.0) {
        ++clamp_events;
        return 0.0;
    }
    if (value > 1.0) {
        ++clamp_events;
        return 1.0;
    }
    return value;
}

}  // namespace

DecodingThresholds decoding_thresholds(const SmallTier& tier, const Targets& targets) {
    const double am = tier.far_share;
    const double an = tier.near_share;
    const double tc = targets.tau_connected();
    const double tt = targets.tau_typical();
    DecodingThresholds out;
    out.near_feasible = am - tc * an > 0.0;
    out.far_feasible = am - tt * an > 0.0;
    if (out.near_feasible) out.near = std::max(tc / (am - tc * an), tt / an);
    if (out.far_feasible) out.far = tt / (am - tt * an);
    return out;
}

double laplace_small_interference(const NetworkConfig& cfg, std::size_t k, double s, double x0) {
    check_laplace_args(s, x0);
    cfg.small(k);
    if (s == 0.0) return 1.0;
    double exponent = 0.0;
    for (std::size_t i = 0; i < cfg.small_tiers.size(); ++i) {
        const auto& t = cfg.small_tiers[i];
        if (t.density == 0.0) continue;
        const double alpha = t.path_loss_exponent;
        const double delta = t.delta();
        const double omega = exclusion_radius_small(cfg, k, i, x0);
        const double ps = s * t.power_w * cfg.eta;
        exponent += ps * t.density * 2.0 * kPi * std::pow(omega, 2.0 - alpha) / (alpha * (1.0 - delta)) *
                    specfun::hyp2f1_coverage(delta, ps * std::pow(omega, -alpha));
    }
    return std::exp(-exponent);
}

double laplace_macro_interference(const NetworkConfig& cfg, std::size_t k, double s, double x0) {
    check_laplace_args(s, x0);
    cfg.small(k);
    const auto& m = cfg.macro;
    if (s == 0.0 || m.density == 0.0) return 1.0;
    const double delta = m.delta();
    const double omega = exclusion_radius_macro(cfg, k, x0);
    const double c = s * m.power_w * cfg.eta / m.streams;
    return std::exp(-m.density * kPi * delta * specfun::macro_laplace_sum(c, omega, delta, m.streams));
}

CoverageExponent::CoverageExponent(const NetworkConfig& cfg, std::size_t k, double epsilon) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("coverage threshold must be finite and >= 0");
    const auto& serving = cfg.small(k);
    const auto& m = cfg.macro;
    serving_exponent_ = serving.path_loss_exponent;
    noise_ = epsilon * cfg.noise_power_w / (serving.power_w * cfg.eta);

    const double d1 = m.delta();
    macro_power_ = 2.0 * serving.path_loss_exponent / m.path_loss_exponent;
    macro_ = 0.0;
    if (m.density > 0.0 && epsilon > 0.0) {
        const double u = epsilon * serving.near_share * serving.bias / m.array_gain();
        macro_ = m.density * d1 * kPi * std::pow(m.power_w / serving.power_w * epsilon / m.streams, d1) *
                 macro_binomial_sum(u, d1, m.streams);
    }

    small_.reserve(cfg.small_tiers.size());
    small_power_.reserve(cfg.small_tiers.size());
    for (const auto& t : cfg.small_tiers) {
        const double di = t.delta();
        const double b_ratio = t.bias / serving.bias;
        const double p_ratio = t.power_w / serving.power_w;
        double coefficient = 0.0;
        if (t.density > 0.0 && epsilon > 0.0) {
            const double q = epsilon * specfun::hyp2f1_coverage(di, epsilon / b_ratio);
            coefficient =
                t.density * di * kPi * std::pow(b_ratio, di - 1.0) * std::pow(p_ratio, di) * q / (1.0 - di);
        }
        small_.push_back(coefficient);
        small_power_.push_back(2.0 * serving.path_loss_exponent / t.path_loss_exponent);
    }
}

double CoverageExponent::operator()(double x0) const {
    const double log_x = std::log(x0);
    double value = noise_ * std::exp(serving_exponent_ * log_x);
    if (macro_ != 0.0) value += macro_ * std::exp(macro_power_ * log_x);
    for (std::size_t i = 0; i < small_.size(); ++i) {
        if (small_[i] != 0.0) value += small_[i] * std::exp(small_power_[i] * log_x);
    }
    return value;
}

double conditional_coverage_near(const NetworkConfig& cfg, std::size_t k, const Targets& targets, double x0) {
    const auto& tier = cfg.small(k);
    if (!(x0 > 0.0 && x0 <= tier.pair_distance_m)) throw DomainError("near case needs 0 < x0 <= pair distance");
    const auto th = decoding_thresholds(tier, targets);
    if (!th.near_feasible) return 0.0;
    return std::exp(-CoverageExponent(cfg, k, th.near)(x0));
}

double conditional_coverage_far(const NetworkConfig& cfg, std::size_t k, const Targets& targets, double x0) {
    const auto& tier = cfg.small(k);
    if (!(x0 > tier.pair_distance_m) || !std::isfinite(x0)) throw DomainError("far case needs x0 > pair distance");
    const auto th = decoding_thresholds(tier, targets);
    if (!th.far_feasible) return 0.0;
    return std::exp(-CoverageExponent(cfg, k, th.far)(x0));
}

CoverageBreakdown coverage_probability(const NetworkConfig& cfg, std::size_t k, const Targets& targets,
                                       const specfun::QuadratureSettings& q) {
    const auto& tier = cfg.small(k);
    CoverageBreakdown out;
    const auto th = decoding_thresholds(tier, targets);
    if (!th.near_feasible && !th.far_feasible) {
        out.zero_by_power_split = true;
        return out;
    }
    if (tier.density == 0.0) throw DomainError("coverage of an empty tier is undefined");

    const double association = association_prob_small(cfg, k, q);
    const double prefactor = 2.0 * kPi * tier.density / association;
    const double r = tier.pair_distance_m;

    double near = 0.0;
    if (th.near_feasible) {
        const CoverageExponent exponent(cfg, k, th.near);
        const auto integrand = [&](double x) {
            return x * std::exp(association_exponent_small(cfg, k, x) - exponent(x));
        };
        near = prefactor * specfun::integrate(integrand, 0.0, r, q);
    }
    double far = 0.0;
    if (th.far_feasible) {
        const CoverageExponent exponent(cfg, k, th.far);
        const auto integrand = [&](double x) {
            return x * std::exp(association_exponent_small(cfg, k, x) - exponent(x));
        };
        far = prefactor * specfun::integrate_to_infinity(integrand, r, q, distance_scale(cfg));
    }

    check_probability(near);
    check_probability(far);
    check_probability(near + far);
    out.near_component = clamp_probability(near, out.clamp_events);
    out.far_component = clamp_probability(far, out.clamp_events);
    out.total = std::min(1.0, out.near_component + out.far_component);
    return out;
}

double coverage_probability_closed(const NetworkConfig& cfg, std::size_t k, const Targets& targets) {
    if (!cfg.equal_path_loss()) throw PreconditionError("closed-form coverage needs equal path-loss exponents");
    if (cfg.noise_power_w != 0.0) throw PreconditionError("closed-form coverage needs zero noise power");
    const auto& serving = cfg.small(k);
    const auto& m = cfg.macro;
    const auto th = decoding_thresholds(serving, targets);
    if (!th.near_feasible && !th.far_feasible) return 0.0;

    const double delta = m.delta();
    const double b = effective_density_small(cfg, k);
    const auto c1 = [&](double eps) {
        const double u = eps * serving.near_share * serving.bias / m.array_gain();
        return m.density * delta * std::pow(m.power_w / serving.power_w * eps / m.streams, delta) *
               macro_binomial_sum(u, delta, m.streams);
    };
    const auto c2 = [&](double eps) {
        double sum = 0.0;
        for (const auto& t : cfg.small_tiers) {
            const double b_ratio = t.bias / serving.bias;
            sum += t.density * delta * std::pow(b_ratio, delta - 1.0) * std::pow(t.power_w / serving.power_w, delta) *
                   eps * specfun::hyp2f1_coverage(delta, eps / b_ratio) / (1.0 - delta);
        }
        return sum;
    };
    const double r2 = serving.pair_distance_m * serving.pair_distance_m;

    double total = 0.0;
    if (th.near_feasible) {
        const double rate = b + c1(th.near) + c2(th.near);
        total += b * -std::expm1(-kPi * rate * r2) / rate;
    }
    if (th.far_feasible) {
        const double rate = b + c1(th.far) + c2(th.far);
        total += b * std::exp(-kPi * rate * r2) / rate;
    }
    return total;
}

}  // namespace hetnoma
