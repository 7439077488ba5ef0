#include "hetnoma/coverage.hpp"
#include "hetnoma/energy.hpp"
#include "hetnoma/errors.hpp"
#include "hetnoma/experiment.hpp"
#include "hetnoma/model.hpp"
#include "hetnoma/montecarlo.hpp"
#include "hetnoma/rates.hpp"
#include "hetnoma/specfun.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace hetnoma;

namespace {

py::dict row_dict(const ResultRow& r) {
    py::dict d;
    d["curve"] = r.curve;
    d["sweep_value"] = r.sweep_value;
    d["metric"] = r.metric;
    d["engine"] = to_string(r.engine);
    d["value"] = r.error.empty() ? py::object(py::float_(r.value)) : py::object(py::none());
    d["ci_halfwidth"] = r.error.empty() && r.engine == Engine::montecarlo ? py::object(py::float_(r.ci_halfwidth))
                                                                          : py::object(py::none());
    d["error"] = r.error;
    d["runtime_ms"] = r.runtime_ms;
    return d;
}

void export_model(py::module_& m) {
    py::class_<MacroTier>(m, "MacroTier")
        .def(py::init<>())
        .def_readwrite("density", &MacroTier::density)
        .def_readwrite("power_w", &MacroTier::power_w)
        .def_readwrite("path_loss_exponent", &MacroTier::path_loss_exponent)
        .def_readwrite("antennas", &MacroTier::antennas)
        .def_readwrite("streams", &MacroTier::streams)
        .def_property_readonly("array_gain", &MacroTier::array_gain);

    py::class_<SmallTier>(m, "SmallTier")
        .def(py::init<>())
        .def_readwrite("density", &SmallTier::density)
        .def_readwrite("power_w", &SmallTier::power_w)
        .def_readwrite("path_loss_exponent", &SmallTier::path_loss_exponent)
        .def_readwrite("bias", &SmallTier::bias)
        .def_readwrite("pair_distance_m", &SmallTier::pair_distance_m)
        .def_readwrite("far_share", &SmallTier::far_share)
        .def_readwrite("near_share", &SmallTier::near_share);

    py::class_<NetworkConfig>(m, "NetworkConfig")
        .def(py::init<>())
        .def_readwrite("macro", &NetworkConfig::macro)
        .def_readwrite("small_tiers", &NetworkConfig::small_tiers)
        .def_readwrite("eta", &NetworkConfig::eta)
        .def_readwrite("noise_power_w", &NetworkConfig::noise_power_w)
        .def_readwrite("carrier_frequency_hz", &NetworkConfig::carrier_frequency_hz)
        .def_readwrite("bandwidth_hz", &NetworkConfig::bandwidth_hz)
        .def_readwrite("noise_figure_db", &NetworkConfig::noise_figure_db)
        .def("validate", &NetworkConfig::validate)
        .def("set", [](NetworkConfig& cfg, const std::string& path, double value) {
            Targets unused;
            apply_parameter(cfg, unused, path, value);
        });

    py::class_<Targets>(m, "Targets")
        .def(py::init<>())
        .def(py::init<double, double>(), py::arg("rate_typical_bpcu"), py::arg("rate_connected_bpcu"))
        .def_property_readonly("rate_typical", &Targets::rate_typical)
        .def_property_readonly("rate_connected", &Targets::rate_connected)
        .def_property_readonly("tau_typical", &Targets::tau_typical)
        .def_property_readonly("tau_connected", &Targets::tau_connected);

    py::class_<PowerModel>(m, "PowerModel")
        .def(py::init<>())
        .def_readwrite("static_macro_w", &PowerModel::static_macro_w)
        .def_readwrite("static_small_w", &PowerModel::static_small_w)
        .def_readwrite("efficiency_macro", &PowerModel::efficiency_macro)
        .def_readwrite("efficiency_small", &PowerModel::efficiency_small)
        .def_readwrite("baseband_streams", &PowerModel::baseband_streams)
        .def_readwrite("baseband_antennas", &PowerModel::baseband_antennas);

    m.def("dbm_to_watts", &dbm_to_watts);
    m.def("free_space_eta", &free_space_eta);
    m.def("thermal_noise_watts", &thermal_noise_watts);
    m.def("hyp2f1_coverage", &specfun::hyp2f1_coverage, py::arg("delta"), py::arg("x"));
}

void export_analysis(py::module_& m) {
    m.def("association_prob_small",
          [](const NetworkConfig& cfg, std::size_t k) { return association_prob_small(cfg, k); });
    m.def("association_prob_macro", [](const NetworkConfig& cfg) { return association_prob_macro(cfg); });
    m.def("coverage_probability", [](const NetworkConfig& cfg, std::size_t k, const Targets& t) {
        const auto c = coverage_probability(cfg, k, t);
        return py::dict(py::arg("total") = c.total, py::arg("near") = c.near_component,
                        py::arg("far") = c.far_component);
    });
    m.def("ergodic_rate_small", [](const NetworkConfig& cfg, std::size_t k) {
        const auto r = ergodic_rate_small(cfg, k);
        return py::dict(py::arg("near") = r.near, py::arg("far") = r.far, py::arg("total") = r.total);
    });
    m.def("macro_rate_lower_bound", [](const NetworkConfig& cfg) { return macro_rate_lower_bound(cfg); });
    m.def("macro_power_total", &macro_power_total);
    m.def("small_cell_power_total", &small_cell_power_total);
    m.def("energy_efficiency", [](const NetworkConfig& cfg, const PowerModel& model) {
        const auto e = energy_efficiency(cfg, model);
        return py::dict(py::arg("ee_small") = e.ee_small, py::arg("ee_macro") = e.ee_macro,
                        py::arg("ee_network") = e.ee_network);
    });
    m.def(
        "estimate",
        [](const NetworkConfig& cfg, const Targets& t, const std::string& metric, std::uint64_t trials,
           std::uint64_t seed, unsigned threads) {
            mc::SimulationOptions options;
            options.threads = threads;
            const auto e = mc::estimate(cfg, t, mc::Metric::parse(metric), trials, seed, options);
            return py::dict(py::arg("mean") = e.mean, py::arg("ci_halfwidth_99") = e.ci_halfwidth_99,
                            py::arg("trials") = e.trials, py::arg("samples") = e.samples, py::arg("seed") = e.seed);
        },
        py::arg("cfg"), py::arg("targets"), py::arg("metric"), py::arg("trials"), py::arg("seed"),
        py::arg("threads") = 1u);
}

void export_experiment(py::module_& m) {
    py::class_<Experiment>(m, "Experiment")
        .def_readwrite("name", &Experiment::name)
        .def_readwrite("config", &Experiment::config)
        .def_readwrite("targets", &Experiment::targets)
        .def_readwrite("power_model", &Experiment::power_model)
        .def_readwrite("metrics", &Experiment::metrics)
        .def_readwrite("trials", &Experiment::trials)
        .def_readwrite("seed", &Experiment::seed)
        .def_property(
            "threads", [](const Experiment& e) { return e.simulation.threads; },
            [](Experiment& e, unsigned t) { e.simulation.threads = t; })
        .def_property_readonly("sweep_parameter", [](const Experiment& e) { return e.sweep.parameter; })
        .def_property_readonly("sweep_values", [](const Experiment& e) { return e.sweep.values; })
        .def("validate", &Experiment::validate)
        .def("__eq__", [](const Experiment& a, const Experiment& b) { return a == b; });

    m.def("parse_experiment", &parse_experiment, py::arg("text"), py::arg("source") = "<string>");
    m.def("load_config", &load_config);
    m.def("serialize", &serialize);
    m.def("figure_names", &figure_names);
    m.def("figure_experiment", &figure_experiment);
    m.def("run", [](const Experiment& e) {
        const ResultTable table = [&] {
            py::gil_scoped_release release;
            return run(e);
        }();
        py::list rows;
        for (const auto& r : table.rows) rows.append(row_dict(r));
        std::ostringstream csv;
        table.write_csv(csv);
        return py::dict(py::arg("rows") = rows, py::arg("csv") = csv.str());
    });
}

}  // namespace

PYBIND11_MODULE(_hetnoma, m) {
    m.doc() = "NOMA small cells with a massive-MIMO macro tier";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    export_model(m);
    export_analysis(m);
    export_experiment(m);
}
