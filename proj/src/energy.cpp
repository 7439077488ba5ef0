#include "hetnoma/energy.hpp"

#include "hetnoma/errors.hpp"

#include <cmath>
#include <string>

namespace hetnoma {
namespace {

void require_nonnegative(double v, const std::string& field) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("power_model." + field, "must be finite and >= 0");
}

void require_efficiency(double v, const std::string& field) {
    if (!(v > 0.0 && v <= 1.0)) throw ValidationError("power_model." + field, "must lie in (0, 1]");
}

}  // namespace

void PowerModel::validate() const {
    require_nonnegative(static_macro_w, "static_macro_w");
    require_nonnegative(static_small_w, "static_small_w");
    require_efficiency(efficiency_macro, "efficiency_macro");
    require_efficiency(efficiency_small, "efficiency_small");
    for (std::size_t a = 0; a < 3; ++a) {
        require_nonnegative(baseband_streams[a], "baseband_streams[" + std::to_string(a) + "]");
        require_nonnegative(baseband_antennas[a], "baseband_antennas[" + std::to_string(a) + "]");
    }
}

double small_cell_power_total(const PowerModel& model, const SmallTier& tier) {
    model.validate();
    return model.static_small_w + tier.power_w / model.efficiency_small;
}

double macro_power_total(const PowerModel& model, const MacroTier& macro) {
    model.validate();
    const double n = macro.streams;
    const double m = macro.antennas;
    double baseband = 0.0;
    double n_power = 1.0;  // N^(a-1)
    for (std::size_t a = 0; a < 3; ++a) {
        baseband += n_power * n * model.baseband_streams[a] + n_power * m * model.baseband_antennas[a];
        n_power *= n;
    }
    return model.static_macro_w + baseband + macro.power_w / model.efficiency_macro;
}

EnergyReport energy_efficiency(const NetworkConfig& cfg, const PowerModel& model, const RateReport& rates) {
    EnergyReport out;
    out.rates = rates;
    double network = 0.0;
    if (cfg.macro.density > 0.0) {
        out.ee_macro = cfg.macro.streams * rates.macro_rate_lower_bound / macro_power_total(model, cfg.macro);
        network += rates.association_macro * out.ee_macro;
    }
    for (std::size_t k = 0; k < cfg.small_tiers.size(); ++k) {
        const double ee = rates.small_tier_rates.at(k).total / small_cell_power_total(model, cfg.small_tiers[k]);
        out.ee_small.push_back(ee);
        network += rates.association_small.at(k) * ee;
    }
    out.ee_network = network;
    return out;
}

EnergyReport energy_efficiency(const NetworkConfig& cfg, const PowerModel& model, const RateQuadrature& q) {
    model.validate();
    return energy_efficiency(cfg, model, spectrum_efficiency(cfg, q));
}

double ee_small(const NetworkConfig& cfg, const PowerModel& model, std::size_t k, const RateQuadrature& q) {
    return ergodic_rate_small(cfg, k, q).total / small_cell_power_total(model, cfg.small(k));
}

double ee_macro(const NetworkConfig& cfg, const PowerModel& model, const specfun::QuadratureSettings& q) {
    return cfg.macro.streams * macro_rate_lower_bound(cfg, q) / macro_power_total(model, cfg.macro);
}

double ee_network(const NetworkConfig& cfg, const PowerModel& model, const RateQuadrature& q) {
    return energy_efficiency(cfg, model, q).ee_network;
}

}  // namespace hetnoma
