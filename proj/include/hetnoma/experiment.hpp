#pragma once

#include "hetnoma/energy.hpp"
#include "hetnoma/errors.hpp"
#include "hetnoma/model.hpp"
#include "hetnoma/montecarlo.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace hetnoma {

/// Malformed config text. Carries the 1-based line and column of the fault.
class ParseError : public ValidationError {
public:
    ParseError(std::string source, std::size_t line, std::size_t column, const std::string& what);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

enum class Engine { analytical, montecarlo };

std::string to_string(Engine engine);

/// Parameter path into the scenario, e.g. "small_tiers[0].bias",
/// "small_tiers[*].far_share", "macro.antennas", "targets.rate_typical_bpcu".
struct Sweep {
    std::string parameter;
    std::vector<double> values;

    bool operator==(const Sweep&) const = default;
};

/// A named set of overrides applied before the sweep value.
struct Curve {
    std::string label;
    std::vector<std::pair<std::string, double>> overrides;

    bool operator==(const Curve&) const = default;
};

struct Experiment {
    std::string name;
    NetworkConfig config;
    Targets targets;
    PowerModel power_model;
    Sweep sweep;
    std::vector<Curve> curves;  // empty means one curve, "base"
    std::vector<std::string> metrics;
    std::vector<Engine> engines{Engine::analytical, Engine::montecarlo};
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    mc::SimulationOptions simulation;

    /// Checks every invariant, including each curve and sweep point.
    /// Throws ValidationError.
    void validate() const;

    /// Curves as they will be run, with the implicit "base" curve filled in.
    std::vector<Curve> effective_curves() const;

    bool operator==(const Experiment&) const = default;
};

/// Metric names accepted in an experiment:
///   association_macro, association_small[k], coverage[k], ergodic_rate[k],
///   macro_rate, macro_se, network_se, ee_small[k], ee_macro, ee_network,
///   and the Monte Carlo only oma_coverage[k], oma_rate[k], ee_oma_small[k].
/// For the analytical engine macro_rate is the Jensen lower bound.
bool metric_supported(const std::string& metric, Engine engine);

/// Sets one parameter on a scenario. Throws ValidationError for an unknown
/// path or a value of the wrong kind.
void apply_parameter(NetworkConfig& cfg, Targets& targets, const std::string& path, double value);

Experiment parse_experiment(const std::string& json_text, const std::string& source = "<string>");
Experiment load_config(const std::filesystem::path& path);
std::string serialize(const Experiment& experiment);

struct ResultRow {
    std::string curve;
    double sweep_value = 0.0;
    std::string metric;
    Engine engine = Engine::analytical;
    double value = 0.0;
    double ci_halfwidth = 0.0;  // unused for analytical rows
    std::string error;          // empty on success
    bool numerical_failure = false;
    double runtime_ms = 0.0;
};

struct ResultTable {
    std::string name;
    std::string sweep_parameter;
    std::vector<ResultRow> rows;

    bool has_errors() const;
    bool has_numerical_failure() const;

    /// curve,sweep_value,metric,engine,value,ci_halfwidth,error at 17
    /// significant digits.
    void write_csv(std::ostream& out) const;
    /// Same row keys with runtime_ms, kept apart so the main CSV is
    /// reproducible byte for byte.
    void write_timing_csv(std::ostream& out) const;
    /// One whitespace-separated file per curve; returns the paths written.
    std::vector<std::filesystem::path> write_plot_data(const std::filesystem::path& dir) const;
    /// CSV, timing CSV and plot data under dir.
    std::vector<std::filesystem::path> write_all(const std::filesystem::path& dir) const;
};

/// Runs every curve, sweep point, metric and engine. Failures are recorded
/// per row. Rows are ordered by curve, sweep index, metric and engine.
ResultTable run(const Experiment& experiment);

std::vector<std::string> figure_names();
/// Predefined experiment for fig2 ... fig7. Throws DomainError otherwise.
Experiment figure_experiment(const std::string& name);
ResultTable reproduce_figure(const std::string& name, const std::filesystem::path& out_dir);

}  // namespace hetnoma
