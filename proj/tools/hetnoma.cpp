#include "hetnoma/errors.hpp"
#include "hetnoma/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

void apply(hetnoma::Experiment& e, const Overrides& o) {
    if (o.trials) e.trials = *o.trials;
    if (o.seed) e.seed = *o.seed;
    if (o.threads) e.simulation.threads = *o.threads;
    e.validate();
}

int finish(const hetnoma::ResultTable& table, const std::filesystem::path& out) {
    const auto files = table.write_all(out);
    std::size_t failed = 0;
    for (const auto& row : table.rows) {
        if (!row.error.empty()) {
            ++failed;
            std::cerr << "error: " << row.curve << " " << row.sweep_value << " " << row.metric << " "
                      << hetnoma::to_string(row.engine) << ": " << row.error << "\n";
        }
    }
    std::cout << table.rows.size() << " rows, " << failed << " failed\n";
    for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
    if (table.has_numerical_failure()) return kExitNumerical;
    return failed == 0 ? kExitOk : kExitFailure;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--trials", o.trials, "Monte Carlo trials (>= 100)");
    cmd->add_option("--seed", o.seed, "64-bit seed");
    cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NOMA small cells with a massive-MIMO macro tier: analytical and Monte Carlo evaluation"};
    app.require_subcommand(1);

    std::string config;
    std::filesystem::path out = ".";
    Overrides overrides;

    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("--config", config, "experiment JSON")->required();
    run->add_option("--out", out, "output directory");
    add_overrides(run, overrides);

    std::string figure;
    bool print_config = false;
    auto* fig = app.add_subcommand("figure", "reproduce a predefined figure (fig2 ... fig7)");
    fig->add_option("name", figure, "figure name")->required();
    fig->add_option("--out", out, "output directory");
    fig->add_flag("--print-config", print_config, "print the figure's experiment JSON and exit");
    add_overrides(fig, overrides);

    auto* validate = app.add_subcommand("validate", "check a config file without running it");
    validate->add_option("--config", config, "experiment JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*validate) {
            const auto e = hetnoma::load_config(config);
            std::cout << "ok: " << e.name << "\n";
            return kExitOk;
        }
        if (*run) {
            auto e = hetnoma::load_config(config);
            apply(e, overrides);
            return finish(hetnoma::run(e), out);
        }
        auto e = hetnoma::figure_experiment(figure);
        apply(e, overrides);
        if (print_config) {
            std::cout << hetnoma::serialize(e);
            return kExitOk;
        }
        return finish(hetnoma::run(e), out);
    } catch (const hetnoma::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const hetnoma::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const hetnoma::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
