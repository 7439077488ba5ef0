#include "hetnoma/experiment.hpp"

#include "hetnoma/coverage.hpp"
#include "hetnoma/errors.hpp"
#include "hetnoma/rates.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace hetnoma {

using Json = nlohmann::ordered_json;

ParseError::ParseError(std::string source, std::size_t line, std::size_t column, const std::string& what)
    : ValidationError(source + ":" + std::to_string(line) + ":" + std::to_string(column), what),
      line_(line),
      column_(column) {}

std::string to_string(Engine engine) {
    return engine == Engine::analytical ? "analytical" : "montecarlo";
}

namespace {

// ---------------------------------------------------------------- parameters

struct PathTarget {
    std::string scope;            // "macro", "small", "targets", "network"
    std::optional<std::size_t> tier;  // small tier; nullopt means every tier
    std::string field;
};

PathTarget split_path(const std::string& path) {
    const auto dot = path.find('.');
    if (dot == std::string::npos) return {"network", std::nullopt, path};
    const std::string head = path.substr(0, dot);
    const std::string field = path.substr(dot + 1);
    if (head == "macro" || head == "targets") return {head, std::nullopt, field};
    const std::string prefix = "small_tiers[";
    if (head.rfind(prefix, 0) == 0 && head.back() == ']') {
        const std::string idx = head.substr(prefix.size(), head.size() - prefix.size() - 1);
        if (idx == "*") return {"small", std::nullopt, field};
        if (!idx.empty() && std::all_of(idx.begin(), idx.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            return {"small", std::stoul(idx), field};
        }
    }
    throw ValidationError(path, "unknown parameter path");
}

int as_count(const std::string& path, double value) {
    if (!(value >= 1.0) || value != std::floor(value) || value > 1e9) {
        throw ValidationError(path, "must be a positive integer");
    }
    return static_cast<int>(value);
}

void set_small_field(SmallTier& t, double macro_density, const std::string& path, const std::string& field,
                     double v) {
    if (field == "density_per_m2") t.density = v;
    else if (field == "density_multiplier") t.density = v * macro_density;
    else if (field == "power_w") t.power_w = v;
    else if (field == "power_dbm") t.power_w = dbm_to_watts(v);
    else if (field == "path_loss_exponent") t.path_loss_exponent = v;
    else if (field == "bias") t.bias = v;
    else if (field == "pair_distance_m") t.pair_distance_m = v;
    else if (field == "far_share") {
        t.far_share = v;
        t.near_share = 1.0 - v;
    } else if (field == "near_share") {
        t.near_share = v;
        t.far_share = 1.0 - v;
    } else {
        throw ValidationError(path, "unknown parameter path");
    }
}

void apply_network_field(NetworkConfig& cfg, const std::string& path, const std::string& field, double v) {
    if (field == "eta") cfg.eta = v;
    else if (field == "noise_power_w") cfg.noise_power_w = v;
    else if (field == "noise_power_dbm") cfg.noise_power_w = dbm_to_watts(v);
    else throw ValidationError(path, "unknown parameter path");
}

void apply_macro_field(MacroTier& m, const std::string& path, const std::string& field, double v) {
    if (field == "density_per_m2") m.density = v;
    else if (field == "cell_radius_m") m.density = 1.0 / (std::numbers::pi * v * v);
    else if (field == "power_w") m.power_w = v;
    else if (field == "power_dbm") m.power_w = dbm_to_watts(v);
    else if (field == "path_loss_exponent") m.path_loss_exponent = v;
    else if (field == "antennas") m.antennas = as_count(path, v);
    else if (field == "streams") m.streams = as_count(path, v);
    else throw ValidationError(path, "unknown parameter path");
}

void apply_target_field(Targets& targets, const std::string& path, const std::string& field, double v) {
    if (field == "rate_typical_bpcu") targets = Targets(v, targets.rate_connected());
    else if (field == "rate_connected_bpcu") targets = Targets(targets.rate_typical(), v);
    else if (field == "rate_bpcu") targets = Targets(v, v);
    else throw ValidationError(path, "unknown parameter path");
}

// ---------------------------------------------------------------- metrics

struct MetricSpec {
    std::string base;
    bool indexed = false;
    std::size_t tier = 0;
};

MetricSpec parse_metric(const std::string& text) {
    MetricSpec m;
    m.base = text;
    const auto open = text.find('[');
    if (open != std::string::npos) {
        const std::string idx = text.substr(open + 1, text.size() - open - 2);
        if (text.back() != ']' || idx.empty() ||
            !std::all_of(idx.begin(), idx.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            throw ValidationError("metrics", "malformed metric '" + text + "'");
        }
        m.base = text.substr(0, open);
        m.indexed = true;
        m.tier = std::stoul(idx);
    }
    return m;
}

const std::set<std::string>& indexed_metrics() {
    static const std::set<std::string> names{"association_small", "coverage",     "ergodic_rate", "ee_small",
                                             "oma_coverage",      "oma_rate",     "ee_oma_small"};
    return names;
}

const std::set<std::string>& plain_metrics() {
    static const std::set<std::string> names{"association_macro", "macro_rate", "macro_se",
                                             "network_se",        "ee_macro",   "ee_network"};
    return names;
}

bool montecarlo_only(const std::string& base) {
    return base == "oma_coverage" || base == "oma_rate" || base == "ee_oma_small";
}

// ---------------------------------------------------------------- JSON reading

class Reader {
public:
    Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_, "must be an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const Json& raw(const std::string& key) {
        if (!has(key)) throw ValidationError(field(key), "is required");
        return j_.at(key);
    }

    double number(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_number()) throw ValidationError(field(key), "must be a number");
        return v.get<double>();
    }

    std::optional<double> optional_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    std::uint64_t unsigned_integer(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_number_unsigned()) throw ValidationError(field(key), "must be a non-negative integer");
        return v.get<std::uint64_t>();
    }

    int count(const std::string& key) {
        const std::uint64_t v = unsigned_integer(key);
        if (v < 1 || v > 1000000000ULL) throw ValidationError(field(key), "must be a positive integer");
        return static_cast<int>(v);
    }

    std::string string(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_string()) throw ValidationError(field(key), "must be a string");
        return v.get<std::string>();
    }

    /// Exactly one of the two alternatives must be present.
    std::string one_of(const std::string& a, const std::string& b) {
        const bool ha = has(a);
        const bool hb = has(b);
        if (ha == hb) throw ValidationError(field(a), "give exactly one of '" + a + "' and '" + b + "'");
        return ha ? a : b;
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key())) throw ValidationError(field(item.key()), "unknown field");
        }
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

MacroTier read_macro(const Json& j) {
    Reader r(j, "network.macro");
    MacroTier m;
    const std::string density = r.one_of("density_per_m2", "cell_radius_m");
    apply_macro_field(m, r.field(density), density, r.number(density));
    const std::string power = r.one_of("power_w", "power_dbm");
    apply_macro_field(m, r.field(power), power, r.number(power));
    m.path_loss_exponent = r.number("path_loss_exponent");
    m.antennas = r.count("antennas");
    m.streams = r.count("streams");
    r.finish();
    return m;
}

SmallTier read_small(const Json& j, std::size_t k, double macro_density) {
    const std::string path = "network.small_tiers[" + std::to_string(k) + "]";
    Reader r(j, path);
    SmallTier t;
    const std::string density = r.one_of("density_per_m2", "density_multiplier");
    set_small_field(t, macro_density, r.field(density), density, r.number(density));
    const std::string power = r.one_of("power_w", "power_dbm");
    set_small_field(t, macro_density, r.field(power), power, r.number(power));
    t.path_loss_exponent = r.number("path_loss_exponent");
    t.bias = r.number("bias");
    t.pair_distance_m = r.number("pair_distance_m");
    t.far_share = r.number("far_share");
    t.near_share = r.number("near_share");
    r.finish();
    return t;
}

NetworkConfig read_network(const Json& j) {
    Reader r(j, "network");
    NetworkConfig cfg;
    cfg.macro = read_macro(r.raw("macro"));
    const Json& tiers = r.raw("small_tiers");
    if (!tiers.is_array()) throw ValidationError("network.small_tiers", "must be an array");
    for (std::size_t k = 0; k < tiers.size(); ++k) cfg.small_tiers.push_back(read_small(tiers[k], k, cfg.macro.density));
    cfg.carrier_frequency_hz = r.number("carrier_frequency_hz");
    cfg.bandwidth_hz = r.number("bandwidth_hz");
    cfg.noise_figure_db = r.number("noise_figure_db");
    if (!(cfg.carrier_frequency_hz > 0.0)) throw ValidationError("network.carrier_frequency_hz", "must be > 0");
    if (!(cfg.bandwidth_hz > 0.0)) throw ValidationError("network.bandwidth_hz", "must be > 0");
    const auto eta = r.optional_number("eta");
    cfg.eta = eta ? *eta : free_space_eta(cfg.carrier_frequency_hz);
    const bool has_w = r.has("noise_power_w");
    const bool has_dbm = r.has("noise_power_dbm");
    if (has_w && has_dbm) throw ValidationError("network.noise_power_w", "give at most one explicit noise power");
    if (has_w) cfg.noise_power_w = r.number("noise_power_w");
    else if (has_dbm) cfg.noise_power_w = dbm_to_watts(r.number("noise_power_dbm"));
    else cfg.noise_power_w = thermal_noise_watts(cfg.bandwidth_hz, cfg.noise_figure_db);
    r.finish();
    return cfg;
}

std::array<double, 3> read_triple(Reader& r, const std::string& key) {
    const Json& v = r.raw(key);
    if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number(); })) {
        throw ValidationError(r.field(key), "must be an array of 3 numbers");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

PowerModel read_power_model(const Json& j) {
    Reader r(j, "power_model");
    PowerModel p;
    if (auto v = r.optional_number("static_macro_w")) p.static_macro_w = *v;
    if (auto v = r.optional_number("static_small_w")) p.static_small_w = *v;
    if (auto v = r.optional_number("efficiency_macro")) p.efficiency_macro = *v;
    if (auto v = r.optional_number("efficiency_small")) p.efficiency_small = *v;
    if (r.has("baseband_streams_w")) p.baseband_streams = read_triple(r, "baseband_streams_w");
    if (r.has("baseband_antennas_w")) p.baseband_antennas = read_triple(r, "baseband_antennas_w");
    r.finish();
    return p;
}

mc::SimulationOptions read_simulation(const Json& j) {
    Reader r(j, "simulation");
    mc::SimulationOptions o;
    if (auto v = r.optional_number("radius_m")) o.radius_m = *v;
    if (r.has("threads")) o.threads = static_cast<unsigned>(r.count("threads"));
    if (r.has("paired_field")) {
        const std::string mode = r.string("paired_field");
        if (mode == "shared") o.paired_field = mc::PairedField::shared;
        else if (mode == "independent") o.paired_field = mc::PairedField::independent;
        else throw ValidationError("simulation.paired_field", "must be 'shared' or 'independent'");
    }
    r.finish();
    return o;
}

std::vector<double> read_values(const Json& v, const std::string& field) {
    if (!v.is_array()) throw ValidationError(field, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ValidationError(field, "must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

Experiment read_experiment(const Json& j) {
    Reader r(j, "");
    Experiment e;
    e.name = r.string("name");
    e.config = read_network(r.raw("network"));
    {
        Reader t(r.raw("targets"), "targets");
        e.targets = Targets(t.number("rate_typical_bpcu"), t.number("rate_connected_bpcu"));
        t.finish();
    }
    if (r.has("power_model")) e.power_model = read_power_model(r.raw("power_model"));
    {
        Reader s(r.raw("sweep"), "sweep");
        e.sweep.parameter = s.string("parameter");
        e.sweep.values = read_values(s.raw("values"), "sweep.values");
        s.finish();
    }
    if (r.has("curves")) {
        const Json& curves = r.raw("curves");
        if (!curves.is_array()) throw ValidationError("curves", "must be an array");
        for (std::size_t i = 0; i < curves.size(); ++i) {
            Reader c(curves[i], "curves[" + std::to_string(i) + "]");
            Curve curve;
            curve.label = c.string("label");
            if (c.has("overrides")) {
                const Json& o = c.raw("overrides");
                if (!o.is_object()) throw ValidationError(c.field("overrides"), "must be an object");
                for (const auto& item : o.items()) {
                    if (!item.value().is_number()) {
                        throw ValidationError(c.field("overrides." + item.key()), "must be a number");
                    }
                    curve.overrides.emplace_back(item.key(), item.value().get<double>());
                }
            }
            c.finish();
            e.curves.push_back(std::move(curve));
        }
    }
    {
        const Json& metrics = r.raw("metrics");
        if (!metrics.is_array()) throw ValidationError("metrics", "must be an array of strings");
        for (const auto& m : metrics) {
            if (!m.is_string()) throw ValidationError("metrics", "must be an array of strings");
            e.metrics.push_back(m.get<std::string>());
        }
    }
    const std::string engines = r.string("engines");
    if (engines == "analytical") e.engines = {Engine::analytical};
    else if (engines == "montecarlo") e.engines = {Engine::montecarlo};
    else if (engines == "both") e.engines = {Engine::analytical, Engine::montecarlo};
    else throw ValidationError("engines", "must be 'analytical', 'montecarlo' or 'both'");
    e.trials = r.unsigned_integer("trials");
    e.seed = r.unsigned_integer("seed");
    if (r.has("simulation")) e.simulation = read_simulation(r.raw("simulation"));
    r.finish();
    e.validate();
    return e;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

bool is_identifier(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
               c == '-' || c == '.';
    });
}

// ---------------------------------------------------------------- running

struct Point {
    std::string curve;
    double sweep_value = 0.0;
    NetworkConfig cfg;
    Targets targets;
};

std::vector<Point> build_points(const Experiment& e) {
    std::vector<Point> points;
    for (const Curve& c : e.effective_curves()) {
        NetworkConfig base = e.config;
        Targets base_targets = e.targets;
        for (const auto& [path, value] : c.overrides) apply_parameter(base, base_targets, path, value);
        for (double v : e.sweep.values) {
            Point p{c.label, v, base, base_targets};
            apply_parameter(p.cfg, p.targets, e.sweep.parameter, v);
            points.push_back(std::move(p));
        }
    }
    return points;
}

template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

/// Lazily computed value that remembers a failure as well as a result.
class Memo {
public:
    template <typename F>
    double get(F&& compute) {
        if (!done_) {
            done_ = true;
            try {
                value_ = compute();
            } catch (...) {
                error_ = std::current_exception();
            }
        }
        if (error_) std::rethrow_exception(error_);
        return value_;
    }

private:
    bool done_ = false;
    double value_ = 0.0;
    std::exception_ptr error_;
};

class AnalyticalPoint {
public:
    AnalyticalPoint(const Point& p, const PowerModel& model)
        : p_(p), model_(model), assoc_small_(p.cfg.small_tiers.size()), rate_small_(p.cfg.small_tiers.size()) {}

    double evaluate(const MetricSpec& m) {
        const auto& cfg = p_.cfg;
        if (m.base == "association_macro") return association_macro();
        if (m.base == "association_small") return association_small(m.tier);
        if (m.base == "coverage") return coverage_probability(cfg, m.tier, p_.targets).total;
        if (m.base == "ergodic_rate") return rate_small(m.tier);
        if (m.base == "macro_rate") return macro_rate();
        if (m.base == "macro_se") return cfg.macro.streams * macro_rate();
        if (m.base == "ee_small") return rate_small(m.tier) / small_cell_power_total(model_, cfg.small_tiers[m.tier]);
        if (m.base == "ee_macro") return ee_macro();
        if (m.base == "network_se" || m.base == "ee_network") {
            const bool ee = m.base == "ee_network";
            double total = 0.0;
            if (cfg.macro.density > 0.0) {
                total += association_macro() * (ee ? ee_macro() : cfg.macro.streams * macro_rate());
            }
            for (std::size_t k = 0; k < cfg.small_tiers.size(); ++k) {
                const double rate = rate_small(k);
                total += association_small(k) *
                         (ee ? rate / small_cell_power_total(model_, cfg.small_tiers[k]) : rate);
            }
            return total;
        }
        throw PreconditionError("metric '" + m.base + "' has no analytical evaluator");
    }

private:
    double association_macro() {
        return assoc_macro_.get([&] { return association_prob_macro(p_.cfg); });
    }
    double association_small(std::size_t k) {
        return assoc_small_[k].get([&] { return association_prob_small(p_.cfg, k); });
    }
    double rate_small(std::size_t k) {
        return rate_small_[k].get([&] { return ergodic_rate_small(p_.cfg, k).total; });
    }
    double macro_rate() {
        return macro_rate_.get([&] { return macro_rate_lower_bound(p_.cfg); });
    }
    double ee_macro() { return p_.cfg.macro.streams * macro_rate() / macro_power_total(model_, p_.cfg.macro); }

    const Point& p_;
    const PowerModel& model_;
    Memo assoc_macro_;
    Memo macro_rate_;
    std::vector<Memo> assoc_small_;
    std::vector<Memo> rate_small_;
};

mc::Estimate scaled(mc::Estimate e, double factor) {
    e.mean *= factor;
    e.ci_halfwidth_99 *= factor;
    return e;
}

mc::Estimate montecarlo_metric(const Point& p, const PowerModel& model, const mc::SimulationRun& run,
                               const MetricSpec& m) {
    const auto& cfg = p.cfg;
    if (m.base == "macro_se") return scaled(run.estimate(mc::Metric::parse("macro_rate")), cfg.macro.streams);
    if (m.base == "ee_macro") {
        return scaled(run.estimate(mc::Metric::parse("macro_rate")),
                      cfg.macro.streams / macro_power_total(model, cfg.macro));
    }
    if (m.base == "ee_small" || m.base == "ee_oma_small") {
        const std::string rate = (m.base == "ee_small" ? "ergodic_rate[" : "oma_rate[") + std::to_string(m.tier) + "]";
        return scaled(run.estimate(mc::Metric::parse(rate)),
                      1.0 / small_cell_power_total(model, cfg.small_tiers[m.tier]));
    }
    if (m.base == "network_se" || m.base == "ee_network") {
        const bool ee = m.base == "ee_network";
        const double macro_weight =
            cfg.macro.streams / (ee ? macro_power_total(model, cfg.macro) : 1.0);
        std::vector<double> small_weight;
        for (const auto& t : cfg.small_tiers) small_weight.push_back(ee ? 1.0 / small_cell_power_total(model, t) : 1.0);
        std::vector<double> values;
        values.reserve(run.records().size());
        for (const auto& rec : run.records()) {
            if (rec.tier == 0) values.push_back(macro_weight * rec.macro_rate);
            else if (rec.tier > 0) values.push_back(small_weight[static_cast<std::size_t>(rec.tier - 1)] * rec.noma_rate);
            else values.push_back(0.0);
        }
        return mc::summarize(values, values.size(), run.seed());
    }
    const std::string name = m.indexed ? m.base + "[" + std::to_string(m.tier) + "]" : m.base;
    return run.estimate(mc::Metric::parse(name));
}

void record_failure(ResultRow& row, const std::exception& ex, bool numerical) {
    row.error = ex.what();
    row.numerical_failure = numerical;
}

template <typename F>
void guarded(ResultRow& row, F&& body) {
    try {
        body();
    } catch (const NumericalError& ex) {
        record_failure(row, ex, true);
    } catch (const std::exception& ex) {
        record_failure(row, ex, false);
    }
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// ---------------------------------------------------------------- output

std::string format_number(double v) {
    if (std::isnan(v)) return "NaN";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

Json power_model_json(const PowerModel& p) {
    Json j;
    j["static_macro_w"] = p.static_macro_w;
    j["static_small_w"] = p.static_small_w;
    j["efficiency_macro"] = p.efficiency_macro;
    j["efficiency_small"] = p.efficiency_small;
    j["baseband_streams_w"] = p.baseband_streams;
    j["baseband_antennas_w"] = p.baseband_antennas;
    return j;
}

// ---------------------------------------------------------------- figures

double reference_macro_density() { return 1.0 / (std::numbers::pi * 500.0 * 500.0); }

SmallTier small_tier(double multiplier, double power_dbm, double pair_distance_m) {
    SmallTier t;
    t.density = multiplier * reference_macro_density();
    t.power_w = dbm_to_watts(power_dbm);
    t.path_loss_exponent = 4.0;
    t.bias = 1.0;
    t.pair_distance_m = pair_distance_m;
    t.far_share = 0.6;
    t.near_share = 0.4;
    return t;
}

Experiment reference_base(const std::string& name, int antennas, int streams, double macro_dbm) {
    Experiment e;
    e.name = name;
    e.config.macro.density = reference_macro_density();
    e.config.macro.power_w = dbm_to_watts(macro_dbm);
    e.config.macro.path_loss_exponent = 3.5;
    e.config.macro.antennas = antennas;
    e.config.macro.streams = streams;
    e.config.carrier_frequency_hz = 1e9;
    e.config.bandwidth_hz = 1e7;
    e.config.noise_figure_db = 10.0;
    e.config.eta = free_space_eta(e.config.carrier_frequency_hz);
    e.config.noise_power_w = thermal_noise_watts(e.config.bandwidth_hz, e.config.noise_figure_db);
    e.targets = Targets(1.0, 1.0);
    e.trials = 100000;
    e.seed = 1;
    return e;
}

const std::vector<double> kBiasGrid{1.0, 2.0, 5.0, 10.0, 20.0, 40.0};

std::string label_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- public API

bool metric_supported(const std::string& metric, Engine engine) {
    MetricSpec m;
    try {
        m = parse_metric(metric);
    } catch (const ValidationError&) {
        return false;
    }
    const bool known = m.indexed ? indexed_metrics().count(m.base) > 0 : plain_metrics().count(m.base) > 0;
    if (!known) return false;
    return engine == Engine::montecarlo || !montecarlo_only(m.base);
}

void apply_parameter(NetworkConfig& cfg, Targets& targets, const std::string& path, double value) {
    if (!std::isfinite(value)) throw ValidationError(path, "must be finite");
    const PathTarget t = split_path(path);
    if (t.scope == "macro") return apply_macro_field(cfg.macro, path, t.field, value);
    if (t.scope == "targets") return apply_target_field(targets, path, t.field, value);
    if (t.scope == "network") return apply_network_field(cfg, path, t.field, value);
    if (t.tier) {
        if (*t.tier >= cfg.small_tiers.size()) throw ValidationError(path, "small tier index out of range");
        return set_small_field(cfg.small_tiers[*t.tier], cfg.macro.density, path, t.field, value);
    }
    for (auto& tier : cfg.small_tiers) set_small_field(tier, cfg.macro.density, path, t.field, value);
}

std::vector<Curve> Experiment::effective_curves() const {
    if (!curves.empty()) return curves;
    return {Curve{"base", {}}};
}

void Experiment::validate() const {
    if (!is_identifier(name)) throw ValidationError("name", "must be a non-empty identifier ([A-Za-z0-9_.-])");
    config.validate();
    power_model.validate();
    simulation.validate();
    if (sweep.values.empty()) throw ValidationError("sweep.values", "sweep grid must be nonempty");
    {
        NetworkConfig probe = config;
        Targets probe_targets = targets;
        apply_parameter(probe, probe_targets, sweep.parameter, sweep.values.front());
    }
    std::set<std::string> labels;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const std::string field = "curves[" + std::to_string(i) + "]";
        if (!is_identifier(curves[i].label)) throw ValidationError(field + ".label", "must be a non-empty identifier");
        if (!labels.insert(curves[i].label).second) throw ValidationError(field + ".label", "duplicate curve label");
    }
    if (metrics.empty()) throw ValidationError("metrics", "at least one metric is required");
    if (engines.empty()) throw ValidationError("engines", "at least one engine is required");
    for (const auto& metric : metrics) {
        const MetricSpec m = parse_metric(metric);
        const bool any = std::any_of(engines.begin(), engines.end(),
                                     [&](Engine eng) { return metric_supported(metric, eng); });
        if (!any) throw ValidationError("metrics", "'" + metric + "' is not provided by the selected engines");
        if (m.indexed && m.tier >= config.small_tiers.size()) {
            throw ValidationError("metrics", "'" + metric + "' names a small tier that does not exist");
        }
    }
    const bool uses_mc = std::find(engines.begin(), engines.end(), Engine::montecarlo) != engines.end();
    if (uses_mc && trials < mc::kMinTrials) {
        throw ValidationError("trials", "must be >= " + std::to_string(mc::kMinTrials) + " for Monte Carlo");
    }
    for (const Curve& c : effective_curves()) {
        NetworkConfig base = config;
        Targets base_targets = targets;
        for (const auto& [path, value] : c.overrides) apply_parameter(base, base_targets, path, value);
        for (double v : sweep.values) {
            NetworkConfig cfg = base;
            Targets t = base_targets;
            apply_parameter(cfg, t, sweep.parameter, v);
            try {
                cfg.validate();
            } catch (const ValidationError& ex) {
                throw ValidationError(ex.field(), ex.rule() + " (curve '" + c.label + "', " + sweep.parameter + " = " +
                                                      format_number(v) + ")");
            }
        }
    }
}

Experiment parse_experiment(const std::string& json_text, const std::string& source) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const Json::parse_error& ex) {
        const auto [line, column] = line_column(json_text, ex.byte);
        std::string what = ex.what();
        const auto colon = what.find("parse error");
        throw ParseError(source, line, column, colon == std::string::npos ? what : what.substr(colon));
    }
    return read_experiment(j);
}

Experiment load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(path.string(), "cannot open config file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_experiment(text.str(), path.string());
}

std::string serialize(const Experiment& e) {
    Json j;
    j["name"] = e.name;
    Json net;
    Json macro;
    macro["density_per_m2"] = e.config.macro.density;
    macro["power_w"] = e.config.macro.power_w;
    macro["path_loss_exponent"] = e.config.macro.path_loss_exponent;
    macro["antennas"] = e.config.macro.antennas;
    macro["streams"] = e.config.macro.streams;
    net["macro"] = macro;
    net["small_tiers"] = Json::array();
    for (const auto& t : e.config.small_tiers) {
        Json tier;
        tier["density_per_m2"] = t.density;
        tier["power_w"] = t.power_w;
        tier["path_loss_exponent"] = t.path_loss_exponent;
        tier["bias"] = t.bias;
        tier["pair_distance_m"] = t.pair_distance_m;
        tier["far_share"] = t.far_share;
        tier["near_share"] = t.near_share;
        net["small_tiers"].push_back(tier);
    }
    net["carrier_frequency_hz"] = e.config.carrier_frequency_hz;
    net["bandwidth_hz"] = e.config.bandwidth_hz;
    net["noise_figure_db"] = e.config.noise_figure_db;
    net["eta"] = e.config.eta;
    net["noise_power_w"] = e.config.noise_power_w;
    j["network"] = net;
    j["targets"] = {{"rate_typical_bpcu", e.targets.rate_typical()}, {"rate_connected_bpcu", e.targets.rate_connected()}};
    j["power_model"] = power_model_json(e.power_model);
    j["sweep"] = {{"parameter", e.sweep.parameter}, {"values", e.sweep.values}};
    if (!e.curves.empty()) {
        j["curves"] = Json::array();
        for (const auto& c : e.curves) {
            Json overrides = Json::object();
            for (const auto& [path, value] : c.overrides) overrides[path] = value;
            j["curves"].push_back({{"label", c.label}, {"overrides", overrides}});
        }
    }
    j["metrics"] = e.metrics;
    const bool has_a = std::find(e.engines.begin(), e.engines.end(), Engine::analytical) != e.engines.end();
    const bool has_m = std::find(e.engines.begin(), e.engines.end(), Engine::montecarlo) != e.engines.end();
    j["engines"] = has_a && has_m ? "both" : (has_a ? "analytical" : "montecarlo");
    j["trials"] = e.trials;
    j["seed"] = e.seed;
    j["simulation"] = {{"radius_m", e.simulation.radius_m},
                       {"threads", e.simulation.threads},
                       {"paired_field", e.simulation.paired_field == mc::PairedField::shared ? "shared" : "independent"}};
    return j.dump(2) + "\n";
}

bool ResultTable::has_errors() const {
    return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return !r.error.empty(); });
}

bool ResultTable::has_numerical_failure() const {
    return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.numerical_failure; });
}

void ResultTable::write_csv(std::ostream& out) const {
    out << "curve,sweep_value,metric,engine,value,ci_halfwidth,error\n";
    for (const auto& r : rows) {
        out << csv_field(r.curve) << ',' << format_number(r.sweep_value) << ',' << csv_field(r.metric) << ','
            << to_string(r.engine) << ',';
        if (r.error.empty()) out << format_number(r.value);
        out << ',';
        if (r.error.empty() && r.engine == Engine::montecarlo) out << format_number(r.ci_halfwidth);
        out << ',' << csv_field(r.error) << '\n';
    }
}

void ResultTable::write_timing_csv(std::ostream& out) const {
    out << "curve,sweep_value,metric,engine,runtime_ms\n";
    char buf[40];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.3f", r.runtime_ms);
        out << csv_field(r.curve) << ',' << format_number(r.sweep_value) << ',' << csv_field(r.metric) << ','
            << to_string(r.engine) << ',' << buf << '\n';
    }
}

std::vector<std::filesystem::path> ResultTable::write_plot_data(const std::filesystem::path& dir) const {
    std::vector<std::string> curves;
    std::vector<std::pair<std::string, Engine>> columns;
    for (const auto& r : rows) {
        if (std::find(curves.begin(), curves.end(), r.curve) == curves.end()) curves.push_back(r.curve);
        const std::pair<std::string, Engine> key{r.metric, r.engine};
        if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    }
    std::vector<std::filesystem::path> written;
    for (const auto& curve : curves) {
        const auto file = dir / (name + "_" + curve + ".dat");
        std::ofstream out(file, std::ios::binary);
        if (!out) throw ValidationError(file.string(), "cannot write plot data");
        out << "# " << name << " curve " << curve << ", x = " << sweep_parameter << "\n# 1 sweep_value";
        int col = 2;
        for (const auto& [metric, engine] : columns) {
            out << ' ' << col++ << ' ' << metric << ':' << to_string(engine);
            if (engine == Engine::montecarlo) out << ' ' << col++ << ' ' << metric << ":ci99";
        }
        out << '\n';
        std::vector<double> xs;
        for (const auto& r : rows) {
            if (r.curve == curve && std::find(xs.begin(), xs.end(), r.sweep_value) == xs.end()) xs.push_back(r.sweep_value);
        }
        for (double x : xs) {
            out << format_number(x);
            for (const auto& [metric, engine] : columns) {
                const auto it = std::find_if(rows.begin(), rows.end(), [&](const ResultRow& r) {
                    return r.curve == curve && r.sweep_value == x && r.metric == metric && r.engine == engine;
                });
                const bool ok = it != rows.end() && it->error.empty();
                out << ' ' << format_number(ok ? it->value : std::nan(""));
                if (engine == Engine::montecarlo) out << ' ' << format_number(ok ? it->ci_halfwidth : std::nan(""));
            }
            out << '\n';
        }
        written.push_back(file);
    }
    return written;
}

std::vector<std::filesystem::path> ResultTable::write_all(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    const auto csv = dir / (name + ".csv");
    {
        std::ofstream out(csv, std::ios::binary);
        if (!out) throw ValidationError(csv.string(), "cannot write results");
        write_csv(out);
    }
    written.push_back(csv);
    const auto timing = dir / (name + "_timing.csv");
    {
        std::ofstream out(timing, std::ios::binary);
        if (!out) throw ValidationError(timing.string(), "cannot write timings");
        write_timing_csv(out);
    }
    written.push_back(timing);
    for (auto& p : write_plot_data(dir)) written.push_back(std::move(p));
    return written;
}

ResultTable run(const Experiment& e) {
    e.validate();
    const std::vector<Point> points = build_points(e);
    std::vector<MetricSpec> metrics;
    for (const auto& m : e.metrics) metrics.push_back(parse_metric(m));
    const bool want_analytical = std::find(e.engines.begin(), e.engines.end(), Engine::analytical) != e.engines.end();
    const bool want_mc = std::find(e.engines.begin(), e.engines.end(), Engine::montecarlo) != e.engines.end();

    // rows[point][metric][engine slot]
    std::vector<std::vector<std::map<Engine, ResultRow>>> cells(points.size(),
                                                                std::vector<std::map<Engine, ResultRow>>(metrics.size()));
    auto make_row = [&](std::size_t p, std::size_t m, Engine engine) {
        ResultRow row;
        row.curve = points[p].curve;
        row.sweep_value = points[p].sweep_value;
        row.metric = e.metrics[m];
        row.engine = engine;
        return row;
    };

    if (want_analytical) {
        parallel_for(points.size(), e.simulation.threads, [&](std::size_t p) {
            AnalyticalPoint point(points[p], e.power_model);
            for (std::size_t m = 0; m < metrics.size(); ++m) {
                if (!metric_supported(e.metrics[m], Engine::analytical)) continue;
                ResultRow row = make_row(p, m, Engine::analytical);
                const auto start = std::chrono::steady_clock::now();
                guarded(row, [&] { row.value = point.evaluate(metrics[m]); });
                row.runtime_ms = elapsed_ms(start);
                cells[p][m][Engine::analytical] = std::move(row);
            }
        });
    }

    if (want_mc) {
        std::vector<NetworkConfig> cfgs;
        std::vector<Targets> targets;
        for (const auto& p : points) {
            cfgs.push_back(p.cfg);
            targets.push_back(p.targets);
        }
        const auto start = std::chrono::steady_clock::now();
        std::vector<mc::SimulationRun> runs;
        ResultRow batch_failure;
        guarded(batch_failure, [&] { runs = mc::simulate_batch(cfgs, targets, e.trials, e.seed, e.simulation); });
        const double per_point_ms = elapsed_ms(start) / static_cast<double>(points.size());
        for (std::size_t p = 0; p < points.size(); ++p) {
            for (std::size_t m = 0; m < metrics.size(); ++m) {
                ResultRow row = make_row(p, m, Engine::montecarlo);
                row.runtime_ms = per_point_ms;
                if (!batch_failure.error.empty()) {
                    row.error = batch_failure.error;
                    row.numerical_failure = batch_failure.numerical_failure;
                } else {
                    guarded(row, [&] {
                        const mc::Estimate est = montecarlo_metric(points[p], e.power_model, runs[p], metrics[m]);
                        row.value = est.mean;
                        row.ci_halfwidth = est.ci_halfwidth_99;
                    });
                }
                cells[p][m][Engine::montecarlo] = std::move(row);
            }
        }
    }

    ResultTable table;
    table.name = e.name;
    table.sweep_parameter = e.sweep.parameter;
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (std::size_t m = 0; m < metrics.size(); ++m) {
            for (Engine engine : e.engines) {
                auto it = cells[p][m].find(engine);
                if (it != cells[p][m].end()) table.rows.push_back(std::move(it->second));
            }
        }
    }
    return table;
}

std::vector<std::string> figure_names() { return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7"}; }

Experiment figure_experiment(const std::string& name) {
    if (name == "fig2") {
        Experiment e = reference_base(name, 200, 15, 40.0);
        e.config.small_tiers = {small_tier(20.0, 30.0, 10.0), small_tier(20.0, 20.0, 10.0)};
        e.sweep = {"macro.antennas", {50, 100, 150, 200, 250, 300}};
        e.curves = {{"B2_1", {{"small_tiers[0].bias", 1.0}, {"small_tiers[1].bias", 20.0}}},
                    {"B2_5", {{"small_tiers[0].bias", 5.0}, {"small_tiers[1].bias", 100.0}}}};
        e.metrics = {"association_macro", "association_small[0]", "association_small[1]"};
        return e;
    }
    if (name == "fig3") {
        Experiment e = reference_base(name, 200, 15, 40.0);
        e.config.small_tiers = {small_tier(20.0, 20.0, 10.0)};
        e.sweep = {"small_tiers[0].bias", kBiasGrid};
        e.curves = {{"split_0.6_0.4", {{"small_tiers[*].far_share", 0.6}}},
                    {"split_0.9_0.1", {{"small_tiers[*].far_share", 0.9}}}};
        e.metrics = {"coverage[0]", "oma_coverage[0]"};
        return e;
    }
    if (name == "fig4") {
        Experiment e = reference_base(name, 200, 15, 40.0);
        e.config.small_tiers = {small_tier(20.0, 20.0, 15.0)};
        e.config.small_tiers[0].bias = 5.0;
        std::vector<double> grid;
        for (int i = 1; i <= 10; ++i) grid.push_back(0.25 * i);
        e.sweep = {"targets.rate_typical_bpcu", grid};
        for (double far : {0.6, 0.9}) {
            for (double rc : grid) {
                e.curves.push_back({"split_" + label_number(far) + "_Rc_" + label_number(rc),
                                    {{"small_tiers[*].far_share", far}, {"targets.rate_connected_bpcu", rc}}});
            }
        }
        e.metrics = {"coverage[0]"};
        e.engines = {Engine::analytical};
        return e;
    }
    if (name == "fig5") {
        Experiment e = reference_base(name, 200, 15, 40.0);
        e.config.small_tiers = {small_tier(20.0, 20.0, 50.0)};
        e.sweep = {"small_tiers[0].bias", kBiasGrid};
        e.curves = {{"P2_20dBm", {{"small_tiers[0].power_dbm", 20.0}}}, {"P2_30dBm", {{"small_tiers[0].power_dbm", 30.0}}}};
        e.metrics = {"ergodic_rate[0]", "oma_rate[0]"};
        return e;
    }
    if (name == "fig6") {
        Experiment e = reference_base(name, 50, 5, 40.0);
        e.config.small_tiers = {small_tier(100.0, 20.0, 50.0)};
        e.sweep = {"small_tiers[0].bias", {1.0, 5.0, 10.0, 20.0}};
        e.curves = {{"P1_30dBm", {{"macro.power_dbm", 30.0}}}, {"P1_40dBm", {{"macro.power_dbm", 40.0}}}};
        e.metrics = {"macro_rate", "macro_se", "ergodic_rate[0]", "network_se"};
        return e;
    }
    if (name == "fig7") {
        Experiment e = reference_base(name, 200, 15, 30.0);
        e.config.small_tiers = {small_tier(20.0, 20.0, 10.0)};
        e.sweep = {"small_tiers[0].bias", kBiasGrid};
        e.curves = {{"M_100", {{"macro.antennas", 100.0}}}, {"M_200", {{"macro.antennas", 200.0}}}};
        e.metrics = {"ee_macro", "ee_small[0]", "ee_network", "ee_oma_small[0]"};
        return e;
    }
    throw DomainError("unknown figure '" + name + "' (expected fig2 ... fig7)");
}

ResultTable reproduce_figure(const std::string& name, const std::filesystem::path& out_dir) {
    ResultTable table = run(figure_experiment(name));
    table.write_all(out_dir);
    return table;
}

}  // namespace hetnoma
