#pragma once

#include "hetnoma/model.hpp"
#include "hetnoma/rates.hpp"

#include <array>
#include <cstddef>

namespace hetnoma {

/// Base-station power consumption model. The defaults are the reference
/// hardware constants; baseband coefficients are in watts per monomial.
struct PowerModel {
    double static_macro_w = 4.0;
    double static_small_w = 2.0;
    double efficiency_macro = 0.4;
    double efficiency_small = 0.4;
    /// delta_{a,0} for a = 1..3, multiplying N^a.
    std::array<double, 3> baseband_streams{4.8, 0.0, 2.08e-8};
    /// delta_{a,1} for a = 1..3, multiplying N^(a-1) M.
    std::array<double, 3> baseband_antennas{1.0, 9.5e-8, 6.25e-8};

    /// Throws ValidationError on negative terms or efficiencies outside (0, 1].
    void validate() const;

    bool operator==(const PowerModel&) const = default;
};

double small_cell_power_total(const PowerModel& model, const SmallTier& tier);
double macro_power_total(const PowerModel& model, const MacroTier& macro);

struct EnergyReport {
    std::vector<double> ee_small;  // bit/s/Hz per W, per small tier
    double ee_macro = 0.0;
    double ee_network = 0.0;
    RateReport rates;
};

/// tau_k / P_k,total
double ee_small(const NetworkConfig& cfg, const PowerModel& model, std::size_t k, const RateQuadrature& q = {});
/// N tau_1L / P_1,total
double ee_macro(const NetworkConfig& cfg, const PowerModel& model, const specfun::QuadratureSettings& q = {});
/// A_1 EE_macro + sum_k A_k EE_k
double ee_network(const NetworkConfig& cfg, const PowerModel& model, const RateQuadrature& q = {});

/// All energy-efficiency figures from one set of rate evaluations.
EnergyReport energy_efficiency(const NetworkConfig& cfg, const PowerModel& model, const RateQuadrature& q = {});

/// EE combination from precomputed rates.
EnergyReport energy_efficiency(const NetworkConfig& cfg, const PowerModel& model, const RateReport& rates);

}  // namespace hetnoma
