#include "hetnoma/model.hpp"

#include "hetnoma/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hetnoma {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSpeedOfLight = 299792458.0;

std::string tier_field(std::size_t k, const char* name) {
    return "small_tiers[" + std::to_string(k) + "]." + name;
}

void require(bool ok, const std::string& field, const char* rule) {
    if (!ok) throw ValidationError(field, rule);
}

void check_distance(double d) {
    if (!(d > 0.0)) throw DomainError("distance must be > 0");
}

}  // namespace

const SmallTier& NetworkConfig::small(std::size_t k) const {
    if (k >= small_tiers.size()) {
        throw DomainError("small tier index " + std::to_string(k) + " out of range");
    }
    return small_tiers[k];
}

void NetworkConfig::validate() const {
    require(std::isfinite(macro.density) && macro.density >= 0.0, "macro.density", "must be finite and >= 0");
    require(std::isfinite(macro.power_w) && macro.power_w > 0.0, "macro.power", "must be > 0 W");
    require(macro.path_loss_exponent > 2.0 && std::isfinite(macro.path_loss_exponent), "macro.path_loss_exponent",
            "must be > 2");
    require(macro.streams >= 1, "macro.streams", "N must be >= 1");
    require(macro.antennas >= macro.streams, "macro.antennas", "M must be >= N");
    require(!small_tiers.empty(), "small_tiers", "at least one small tier is required (K >= 2)");

    double total_density = macro.density;
    for (std::size_t k = 0; k < small_tiers.size(); ++k) {
        const auto& t = small_tiers[k];
        require(std::isfinite(t.density) && t.density >= 0.0, tier_field(k, "density"), "must be finite and >= 0");
        require(std::isfinite(t.power_w) && t.power_w > 0.0, tier_field(k, "power"), "must be > 0 W");
        require(t.path_loss_exponent > 2.0 && std::isfinite(t.path_loss_exponent),
                tier_field(k, "path_loss_exponent"), "must be > 2");
        require(std::isfinite(t.bias) && t.bias > 0.0, tier_field(k, "bias"), "must be > 0");
        require(std::isfinite(t.pair_distance_m) && t.pair_distance_m > 0.0, tier_field(k, "pair_distance_m"),
                "must be > 0");
        require(t.near_share > 0.0, tier_field(k, "near_share"), "a_n must be > 0");
        require(t.far_share > t.near_share, tier_field(k, "far_share"), "a_m must exceed a_n");
        require(std::abs(t.far_share + t.near_share - 1.0) <= 1e-12, tier_field(k, "far_share"),
                "a_m + a_n must equal 1");
        total_density += t.density;
    }
    require(total_density > 0.0, "density", "at least one tier must have positive density");
    require(std::isfinite(eta) && eta > 0.0, "eta", "must be > 0");
    require(std::isfinite(noise_power_w) && noise_power_w >= 0.0, "noise_power", "must be >= 0 W");
}

bool NetworkConfig::equal_path_loss() const {
    for (const auto& t : small_tiers) {
        if (t.path_loss_exponent != macro.path_loss_exponent) return false;
    }
    return true;
}

bool NetworkConfig::common_near_share() const {
    for (const auto& t : small_tiers) {
        if (t.near_share != small_tiers.front().near_share) return false;
    }
    return true;
}

Targets::Targets(double rate_typical_bpcu, double rate_connected_bpcu)
    : rate_typical_(rate_typical_bpcu),
      rate_connected_(rate_connected_bpcu),
      tau_typical_(std::exp2(rate_typical_bpcu) - 1.0),
      tau_connected_(std::exp2(rate_connected_bpcu) - 1.0) {
    if (!(rate_typical_bpcu >= 0.0) || !std::isfinite(rate_typical_bpcu)) {
        throw ValidationError("targets.rate_typical", "must be finite and >= 0");
    }
    if (!(rate_connected_bpcu >= 0.0) || !std::isfinite(rate_connected_bpcu)) {
        throw ValidationError("targets.rate_connected", "must be finite and >= 0");
    }
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double free_space_eta(double carrier_frequency_hz) {
    if (!(carrier_frequency_hz > 0.0)) throw DomainError("carrier frequency must be > 0");
    const double ratio = kSpeedOfLight / (4.0 * kPi * carrier_frequency_hz);
    return ratio * ratio;
}

double thermal_noise_watts(double bandwidth_hz, double noise_figure_db) {
    if (!(bandwidth_hz > 0.0)) throw DomainError("bandwidth must be > 0");
    return dbm_to_watts(-170.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
}

double biased_power_small(const SmallTier& tier, double eta, double distance) {
    check_distance(distance);
    return tier.near_share * tier.power_w * eta * std::pow(distance, -tier.path_loss_exponent) * tier.bias;
}

double biased_power_macro(const MacroTier& macro, double eta, double distance) {
    check_distance(distance);
    return macro.array_gain() * macro.power_w * eta * std::pow(distance, -macro.path_loss_exponent) /
           macro.streams;
}

double exclusion_radius_small(const NetworkConfig& cfg, std::size_t k, std::size_t i, double x) {
    const auto& serving = cfg.small(k);
    const auto& other = cfg.small(i);
    const double ratio = (other.bias / serving.bias) * (other.power_w / serving.power_w);
    return std::pow(ratio, other.delta() / 2.0) * std::pow(x, serving.path_loss_exponent / other.path_loss_exponent);
}

double exclusion_radius_macro(const NetworkConfig& cfg, std::size_t k, double x) {
    const auto& serving = cfg.small(k);
    const auto& m = cfg.macro;
    const double ratio =
        (m.power_w / serving.power_w) * m.array_gain() / (serving.near_share * serving.bias * m.streams);
    return std::pow(ratio, m.delta() / 2.0) * std::pow(x, serving.path_loss_exponent / m.path_loss_exponent);
}

double exclusion_radius_small_for_macro_user(const NetworkConfig& cfg, std::size_t i, double x) {
    const auto& other = cfg.small(i);
    const auto& m = cfg.macro;
    const double ratio = other.near_share * (other.power_w / m.power_w) * other.bias * m.streams / m.array_gain();
    return std::pow(ratio, other.delta() / 2.0) * std::pow(x, m.path_loss_exponent / other.path_loss_exponent);
}

double association_exponent_small(const NetworkConfig& cfg, std::size_t k, double x) {
    double sum = 0.0;
    for (std::size_t i = 0; i < cfg.small_tiers.size(); ++i) {
        const double w = exclusion_radius_small(cfg, k, i, x);
        sum += cfg.small_tiers[i].density * w * w;
    }
    const double wm = exclusion_radius_macro(cfg, k, x);
    sum += cfg.macro.density * wm * wm;
    return -kPi * sum;
}

double association_exponent_macro(const NetworkConfig& cfg, double x) {
    double sum = cfg.macro.density * x * x;
    for (std::size_t i = 0; i < cfg.small_tiers.size(); ++i) {
        const double w = exclusion_radius_small_for_macro_user(cfg, i, x);
        sum += cfg.small_tiers[i].density * w * w;
    }
    return -kPi * sum;
}

double distance_scale(const NetworkConfig& cfg) {
    double total = cfg.macro.density;
    for (const auto& t : cfg.small_tiers) total += t.density;
    return 1.0 / std::sqrt(kPi * total);
}

double association_prob_small(const NetworkConfig& cfg, std::size_t k, const specfun::QuadratureSettings& q) {
    const double density = cfg.small(k).density;
    if (density == 0.0) return 0.0;
    const auto integrand = [&](double r) { return r * std::exp(association_exponent_small(cfg, k, r)); };
    return 2.0 * kPi * density * specfun::integrate_to_infinity(integrand, 0.0, q, distance_scale(cfg));
}

double association_prob_macro(const NetworkConfig& cfg, const specfun::QuadratureSettings& q) {
    if (cfg.macro.density == 0.0) return 0.0;
    const auto integrand = [&](double r) { return r * std::exp(association_exponent_macro(cfg, r)); };
    return 2.0 * kPi * cfg.macro.density * specfun::integrate_to_infinity(integrand, 0.0, q, distance_scale(cfg));
}

double effective_density_small(const NetworkConfig& cfg, std::size_t k) {
    if (!cfg.equal_path_loss()) {
        throw PreconditionError("closed-form association needs equal path-loss exponents");
    }
    const auto& serving = cfg.small(k);
    const auto& m = cfg.macro;
    const double delta = m.delta();
    double b = 0.0;
    for (const auto& t : cfg.small_tiers) {
        b += t.density * std::pow((t.power_w / serving.power_w) * (t.bias / serving.bias), delta);
    }
    b += m.density *
         std::pow((m.power_w / serving.power_w) * m.array_gain() / (m.streams * serving.near_share * serving.bias), delta);
    return b;
}

double effective_density_macro(const NetworkConfig& cfg) {
    if (!cfg.equal_path_loss()) {
        throw PreconditionError("closed-form association needs equal path-loss exponents");
    }
    const auto& m = cfg.macro;
    const double delta = m.delta();
    double b = m.density;
    for (const auto& t : cfg.small_tiers) {
        b += t.density * std::pow(t.near_share * (t.power_w / m.power_w) * t.bias * m.streams / m.array_gain(), delta);
    }
    return b;
}

double association_prob_closed_small(const NetworkConfig& cfg, std::size_t k) {
    return cfg.small(k).density / effective_density_small(cfg, k);
}

double association_prob_closed_macro(const NetworkConfig& cfg) {
    return cfg.macro.density / effective_density_macro(cfg);
}

double serving_distance_pdf_small(const NetworkConfig& cfg, std::size_t k, double x, double association) {
    if (!(x >= 0.0)) throw DomainError("serving distance must be >= 0");
    if (association < 0.0) association = association_prob_small(cfg, k);
    if (association == 0.0 || x == 0.0) return 0.0;
    return 2.0 * kPi * cfg.small(k).density * x / association * std::exp(association_exponent_small(cfg, k, x));
}

double serving_distance_pdf_macro(const NetworkConfig& cfg, double x, double association) {
    if (!(x >= 0.0)) throw DomainError("serving distance must be >= 0");
    if (association < 0.0) association = association_prob_macro(cfg);
    if (association == 0.0 || x == 0.0) return 0.0;
    return 2.0 * kPi * cfg.macro.density * x / association * std::exp(association_exponent_macro(cfg, x));
}

}  // namespace hetnoma
