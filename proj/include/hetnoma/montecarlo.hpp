#pragma once

#include "hetnoma/model.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace hetnoma::mc {

/// BSs of one tier inside the simulation disc. The typical user sits at the
/// origin and only distances matter, so positions are kept as squared
/// distances.
struct TierSample {
    std::vector<double> distance_sq;  // m^2
    std::vector<double> fading;       // interference power gain per BS
    /// Independent marks for the paired user when it does not share the
    /// typical user's interference; empty otherwise.
    std::vector<double> paired_fading;
};

struct Realization {
    double radius_m = 0.0;
    TierSample macro;
    std::vector<TierSample> small;
    double serving_small_fading = 1.0;  // Exp(1), shared by the SIC chain and the paired user
    double serving_macro_fading = 1.0;  // Gamma(M - N + 1, 1)
};

enum class PairedField { shared, independent };

struct SimulationOptions {
    double radius_m = 1e4;
    unsigned threads = 1;
    PairedField paired_field = PairedField::shared;

    void validate() const;

    bool operator==(const SimulationOptions&) const = default;
};

enum class Role { none, near, far };

struct Association {
    bool valid = false;  // false when the disc holds no BS at all
    bool macro = false;
    std::size_t small_tier = 0;
    std::size_t index = 0;  // BS index inside its tier sample
    double distance = 0.0;
    Role role = Role::none;
};

struct NomaOutcome {
    bool covered = false;
    double typical_rate = 0.0;
    double paired_rate = 0.0;
    double sum_rate = 0.0;
    /// Near case only: the typical user's SINR for the partner's message is
    /// at least the partner's own SINR.
    bool sic_order_holds = true;
};

struct OmaOutcome {
    bool covered = false;
    double sum_rate = 0.0;
};

/// Deterministic in (seed, trial_index) alone.
Realization sample_realization(const NetworkConfig& cfg, std::uint64_t seed, std::uint64_t trial_index,
                               const SimulationOptions& options = {});

/// Same as sample_realization, but with a tier-k BS pinned at distance x0
/// and every other BS drawn beyond the radius at which it would win the
/// association. The pinned BS is index 0 of small[k].
Realization sample_conditioned_realization(const NetworkConfig& cfg, std::size_t k, double x0, std::uint64_t seed,
                                           std::uint64_t trial_index, const SimulationOptions& options = {});

Association associate(const NetworkConfig& cfg, const Realization& realization);

/// Aggregate interference at the origin from every BS except the serving one.
double interference(const NetworkConfig& cfg, const Realization& realization, const Association& serving,
                    bool paired_marks = false);

NomaOutcome evaluate_noma_trial(const NetworkConfig& cfg, const Realization& realization, const Association& serving,
                                const Targets& targets);
NomaOutcome evaluate_noma_trial(const NetworkConfig& cfg, const Realization& realization, const Targets& targets);

/// log2(1 + SINR) of a macro user under zero-forcing.
double evaluate_macro_trial(const NetworkConfig& cfg, const Realization& realization, const Association& serving);
double evaluate_macro_trial(const NetworkConfig& cfg, const Realization& realization);

/// Two half slots at full power, one per user of the pair.
OmaOutcome evaluate_oma_trial(const NetworkConfig& cfg, const Realization& realization, const Association& serving,
                              const Targets& targets);
OmaOutcome evaluate_oma_trial(const NetworkConfig& cfg, const Realization& realization, const Targets& targets);

enum class MetricKind {
    association_macro,
    association_small,
    coverage,
    ergodic_rate,
    macro_rate,
    oma_coverage,
    oma_rate,
};

/// `tier` is the 0-based small-tier index and is ignored by macro metrics.
struct Metric {
    MetricKind kind = MetricKind::coverage;
    std::size_t tier = 0;

    /// e.g. "coverage[0]", "macro_rate".
    std::string name() const;
    static Metric parse(const std::string& text);

    bool operator==(const Metric&) const = default;
};

struct Estimate {
    double mean = 0.0;
    double ci_halfwidth_99 = 0.0;
    std::uint64_t trials = 0;   // trials run
    std::uint64_t samples = 0;  // trials that contributed (e.g. associated with the tier)
    std::uint64_t seed = 0;
};

/// Compact per-trial summary kept by a simulation run.
struct TrialRecord {
    std::int32_t tier = -1;  // -1 no BS, 0 macro, i + 1 small tier i
    Role role = Role::none;
    bool noma_covered = false;
    bool oma_covered = false;
    bool sic_order_holds = true;
    double noma_rate = 0.0;
    double oma_rate = 0.0;
    double macro_rate = 0.0;
};

/// Per-trial records of one run, in trial order.
class SimulationRun {
public:
    SimulationRun(std::vector<TrialRecord> records, std::uint64_t seed);

    Estimate estimate(const Metric& metric) const;
    const std::vector<TrialRecord>& records() const { return records_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t sic_order_violations() const;

private:
    std::vector<TrialRecord> records_;
    std::uint64_t seed_;
};

inline constexpr std::uint64_t kMinTrials = 100;

/// Runs every evaluator on each trial. Throws DomainError for trials < 100.
SimulationRun simulate(const NetworkConfig& cfg, const Targets& targets, std::uint64_t trials, std::uint64_t seed,
                       const SimulationOptions& options = {});

/// Runs several configurations on common random numbers. Configurations
/// whose sampling parameters match (densities, N) share each trial's
/// realization, so results equal those of separate simulate() calls.
std::vector<SimulationRun> simulate_batch(const std::vector<NetworkConfig>& cfgs, const std::vector<Targets>& targets,
                                          std::uint64_t trials, std::uint64_t seed,
                                          const SimulationOptions& options = {});

Estimate estimate(const NetworkConfig& cfg, const Targets& targets, const Metric& metric, std::uint64_t trials,
                  std::uint64_t seed, const SimulationOptions& options = {});

/// NOMA coverage conditioned on a tier-k serving BS at distance x0.
Estimate estimate_conditional_coverage(const NetworkConfig& cfg, std::size_t k, const Targets& targets, double x0,
                                       std::uint64_t trials, std::uint64_t seed,
                                       const SimulationOptions& options = {});

/// Mean and 99% half-width of a sample, summed in a fixed order.
Estimate summarize(const std::vector<double>& values, std::uint64_t trials, std::uint64_t seed);

}  // namespace hetnoma::mc
