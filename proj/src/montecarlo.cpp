#include "hetnoma/montecarlo.hpp"

#include "hetnoma/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

namespace hetnoma::mc {
namespace {

constexpr double kPi = std::numbers::pi;
// Two-sided 99% standard normal quantile.
constexpr double kZ99 = 2.5758293035489004;

using Engine = std::mt19937_64;

Engine make_engine(std::uint64_t seed, std::uint64_t trial, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32), stream};
    return Engine(seq);
}

// Uniform on (0, 1].
double open_uniform(Engine& rng) { return 1.0 - std::generate_canonical<double, 53>(rng); }

// d^-alpha from d^2.
double path_gain(double d2, double alpha) {
    if (alpha == 4.0) return 1.0 / (d2 * d2);
    if (alpha == 3.5) return 1.0 / (d2 * std::sqrt(d2 * std::sqrt(d2)));
    if (alpha == 3.0) return 1.0 / (d2 * std::sqrt(d2));
    return std::pow(d2, -0.5 * alpha);
}

template <typename Fading>
void fill_tier(TierSample& tier, Engine& rng, double density, double inner_sq, double outer_sq, Fading&& fading) {
    tier.distance_sq.clear();
    tier.fading.clear();
    tier.paired_fading.clear();
    if (density == 0.0 || inner_sq >= outer_sq) return;
    std::poisson_distribution<long long> count_dist(density * kPi * (outer_sq - inner_sq));
    const long long count = count_dist(rng);
    tier.distance_sq.reserve(static_cast<std::size_t>(count));
    tier.fading.reserve(static_cast<std::size_t>(count));
    for (long long j = 0; j < count; ++j) {
        tier.distance_sq.push_back(inner_sq + (outer_sq - inner_sq) * open_uniform(rng));
        tier.fading.push_back(fading(rng));
    }
}

template <typename Fading>
void fill_paired(TierSample& tier, Engine& rng, Fading&& fading) {
    tier.paired_fading.resize(tier.fading.size());
    for (auto& v : tier.paired_fading) v = fading(rng);
}

struct Samplers {
    std::exponential_distribution<double> exponential{1.0};
    std::gamma_distribution<double> macro_interferer;

    explicit Samplers(const MacroTier& m) : macro_interferer(static_cast<double>(m.streams), 1.0) {}
};

// The only draw that depends on M, kept on its own substream so that
// realizations for different antenna counts share everything else.
double draw_serving_macro(const NetworkConfig& cfg, std::uint64_t seed, std::uint64_t trial) {
    Engine rng = make_engine(seed, trial, 2);
    std::gamma_distribution<double> serving(cfg.macro.array_gain(), 1.0);
    return serving(rng);
}

void draw_paired_marks(const NetworkConfig& cfg, Realization& r, std::uint64_t seed, std::uint64_t trial,
                       const SimulationOptions& options) {
    if (options.paired_field != PairedField::independent) return;
    Engine rng = make_engine(seed, trial, 1);
    Samplers s(cfg.macro);
    fill_paired(r.macro, rng, [&](Engine& e) { return s.macro_interferer(e); });
    for (auto& tier : r.small) fill_paired(tier, rng, [&](Engine& e) { return s.exponential(e); });
}

double superposed_sinr(double far_share, double near_share, double rho) {
    if (std::isinf(rho)) return far_share / near_share;
    return far_share * rho / (near_share * rho + 1.0);
}

struct ServingLink {
    double rho_typical;  // full-power SINR of the typical user
    double rho_paired;   // full-power SINR of the paired user
    const SmallTier* tier;
};

ServingLink small_link(const NetworkConfig& cfg, const Realization& r, const Association& a, double i_typical,
                       double i_paired) {
    if (!a.valid || a.macro) throw PreconditionError("trial is not served by a small tier");
    const auto& tier = cfg.small(a.small_tier);
    const double received = tier.power_w * cfg.eta * r.serving_small_fading;
    const double typical_den = i_typical + cfg.noise_power_w;
    const double paired_den = i_paired + cfg.noise_power_w;
    const double x = a.distance;
    const double d = tier.pair_distance_m;
    const double inf = std::numeric_limits<double>::infinity();
    ServingLink link{};
    link.tier = &tier;
    link.rho_typical = typical_den > 0.0 ? received * path_gain(x * x, tier.path_loss_exponent) / typical_den : inf;
    link.rho_paired = paired_den > 0.0 ? received * path_gain(d * d, tier.path_loss_exponent) / paired_den : inf;
    return link;
}

double paired_interference(const NetworkConfig& cfg, const Realization& r, const Association& a, double typical) {
    return r.small[a.small_tier].paired_fading.empty() ? typical : interference(cfg, r, a, true);
}

NomaOutcome noma_outcome(const ServingLink& link, Role role, const Targets& targets) {
    const double am = link.tier->far_share;
    const double an = link.tier->near_share;
    NomaOutcome out;
    if (role == Role::near) {
        const double to_partner = superposed_sinr(am, an, link.rho_typical);
        const double own = an * link.rho_typical;
        const double partner = superposed_sinr(am, an, link.rho_paired);
        out.covered = to_partner > targets.tau_connected() && own > targets.tau_typical();
        out.typical_rate = std::log2(1.0 + own);
        out.paired_rate = std::log2(1.0 + partner);
        out.sic_order_holds = to_partner >= partner;
    } else {
        const double own = superposed_sinr(am, an, link.rho_typical);
        const double partner = an * link.rho_paired;
        out.covered = own > targets.tau_typical();
        out.typical_rate = std::log2(1.0 + own);
        out.paired_rate = std::log2(1.0 + partner);
    }
    out.sum_rate = out.typical_rate + out.paired_rate;
    return out;
}

OmaOutcome oma_outcome(const ServingLink& link, const Targets& targets) {
    const double half_slot_tau = std::exp2(2.0 * targets.rate_typical()) - 1.0;
    OmaOutcome out;
    out.covered = link.rho_typical > half_slot_tau;
    out.sum_rate = 0.5 * std::log2(1.0 + link.rho_typical) + 0.5 * std::log2(1.0 + link.rho_paired);
    return out;
}

double macro_outcome(const NetworkConfig& cfg, const Realization& r, const Association& a, double i_total) {
    if (!a.valid || !a.macro) throw PreconditionError("trial is not served by the macro tier");
    const auto& m = cfg.macro;
    const double signal =
        m.power_w * cfg.eta * r.serving_macro_fading * path_gain(a.distance * a.distance, m.path_loss_exponent) / m.streams;
    const double denominator = i_total + cfg.noise_power_w;
    if (denominator == 0.0) return std::numeric_limits<double>::infinity();
    return std::log2(1.0 + signal / denominator);
}

// Per-tier nearest BS and path-gain sums of one realization for a fixed set
// of path-loss exponents. Tier 0 is the macro tier, tier i + 1 small tier i.
struct TierSums {
    std::vector<double> alpha;
    std::vector<std::size_t> nearest;
    std::vector<double> sum;
    std::vector<double> paired_sum;
};

std::vector<double> exponents_of(const NetworkConfig& cfg) {
    std::vector<double> alpha{cfg.macro.path_loss_exponent};
    for (const auto& t : cfg.small_tiers) alpha.push_back(t.path_loss_exponent);
    return alpha;
}

const TierSample& tier_of(const Realization& r, std::size_t tier) { return tier == 0 ? r.macro : r.small[tier - 1]; }

void prepare_sums(const Realization& r, const std::vector<double>& alpha, TierSums& out) {
    const std::size_t tiers = alpha.size();
    out.alpha = alpha;
    out.nearest.assign(tiers, 0);
    out.sum.assign(tiers, 0.0);
    out.paired_sum.assign(tiers, 0.0);
    for (std::size_t t = 0; t < tiers; ++t) {
        const auto& sample = tier_of(r, t);
        const auto& d2 = sample.distance_sq;
        double sum = 0.0;
        double paired = 0.0;
        std::size_t nearest = 0;
        for (std::size_t j = 0; j < d2.size(); ++j) {
            const double g = path_gain(d2[j], alpha[t]);
            sum += sample.fading[j] * g;
            if (!sample.paired_fading.empty()) paired += sample.paired_fading[j] * g;
            if (d2[j] < d2[nearest]) nearest = j;
        }
        out.sum[t] = sum;
        out.paired_sum[t] = paired;
        out.nearest[t] = nearest;
    }
}

// Interference from the cached sums. Removing the serving term by
// subtraction loses about eps * sum / remainder in relative terms, so the
// exact loop takes over when that ratio grows large.
double cached_interference(const NetworkConfig& cfg, const Realization& r, const TierSums& sums,
                           const Association& a, bool paired) {
    constexpr double kMaxCancellation = 1e6;
    const auto& m = cfg.macro;
    const std::size_t serving_tier = a.macro ? 0 : a.small_tier + 1;
    double total = 0.0;
    for (std::size_t t = 0; t < sums.alpha.size(); ++t) {
        const double tx = t == 0 ? m.power_w * cfg.eta / m.streams : cfg.small_tiers[t - 1].power_w * cfg.eta;
        double sum = paired ? sums.paired_sum[t] : sums.sum[t];
        if (a.valid && t == serving_tier) {
            const auto& sample = tier_of(r, t);
            const double mark = paired ? sample.paired_fading[a.index] : sample.fading[a.index];
            const double own = mark * path_gain(sample.distance_sq[a.index], sums.alpha[t]);
            const double rest = sum - own;
            if (!(rest * kMaxCancellation > sum)) {
                const auto& marks = paired ? sample.paired_fading : sample.fading;
                double exact = 0.0;
                for (std::size_t j = 0; j < sample.distance_sq.size(); ++j) {
                    if (j != a.index) exact += marks[j] * path_gain(sample.distance_sq[j], sums.alpha[t]);
                }
                sum = exact;
            } else {
                sum = rest;
            }
        }
        total += tx * sum;
    }
    return total;
}

Association associate_from_nearest(const NetworkConfig& cfg, const Realization& r,
                                   const std::vector<std::size_t>& nearest) {
    Association best;
    double best_power = -1.0;
    const auto& m = cfg.macro;
    if (!r.macro.distance_sq.empty()) {
        const double d2 = r.macro.distance_sq[nearest[0]];
        best_power = m.array_gain() * m.power_w * cfg.eta * path_gain(d2, m.path_loss_exponent) / m.streams;
        best.valid = true;
        best.macro = true;
        best.index = nearest[0];
        best.distance = std::sqrt(d2);
    }
    for (std::size_t i = 0; i < r.small.size(); ++i) {
        const auto& d2s = r.small[i].distance_sq;
        if (d2s.empty()) continue;
        const auto& t = cfg.small(i);
        const std::size_t j = nearest[i + 1];
        const double power = t.near_share * t.power_w * cfg.eta * path_gain(d2s[j], t.path_loss_exponent) * t.bias;
        if (power > best_power) {
            best_power = power;
            best.valid = true;
            best.macro = false;
            best.small_tier = i;
            best.index = j;
            best.distance = std::sqrt(d2s[j]);
        }
    }
    if (best.valid && !best.macro) {
        best.role = best.distance <= cfg.small(best.small_tier).pair_distance_m ? Role::near : Role::far;
    }
    return best;
}

double neumaier_sum(const std::vector<double>& values, double shift = 0.0, bool square = false) {
    double sum = 0.0;
    double compensation = 0.0;
    for (double v : values) {
        double term = v - shift;
        if (square) term *= term;
        const double t = sum + term;
        if (std::abs(sum) >= std::abs(term)) {
            compensation += (sum - t) + term;
        } else {
            compensation += (term - t) + sum;
        }
        sum = t;
    }
    return sum + compensation;
}

template <typename Body>
void parallel_trials(std::uint64_t trials, unsigned threads, Body&& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, threads), trials));
    if (workers <= 1) {
        for (std::uint64_t t = 0; t < trials; ++t) body(t);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::uint64_t t = w; t < trials; t += workers) body(t);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

void sample_into(const NetworkConfig& cfg, std::uint64_t seed, std::uint64_t trial_index,
                 const SimulationOptions& options, Realization& r) {
    Engine rng = make_engine(seed, trial_index, 0);
    Samplers s(cfg.macro);
    r.radius_m = options.radius_m;
    const double outer = options.radius_m * options.radius_m;
    fill_tier(r.macro, rng, cfg.macro.density, 0.0, outer, [&](Engine& e) { return s.macro_interferer(e); });
    r.small.resize(cfg.small_tiers.size());
    for (std::size_t i = 0; i < cfg.small_tiers.size(); ++i) {
        fill_tier(r.small[i], rng, cfg.small_tiers[i].density, 0.0, outer, [&](Engine& e) { return s.exponential(e); });
    }
    r.serving_small_fading = s.exponential(rng);
    r.serving_macro_fading = draw_serving_macro(cfg, seed, trial_index);
    draw_paired_marks(cfg, r, seed, trial_index, options);
}

bool same_sampling(const NetworkConfig& a, const NetworkConfig& b) {
    if (a.macro.density != b.macro.density || a.macro.streams != b.macro.streams ||
        a.small_tiers.size() != b.small_tiers.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.small_tiers.size(); ++i) {
        if (a.small_tiers[i].density != b.small_tiers[i].density) return false;
    }
    return true;
}

void check_trials(std::uint64_t trials) {
    if (trials < kMinTrials) {
        throw DomainError("at least " + std::to_string(kMinTrials) + " trials are required, got " +
                          std::to_string(trials));
    }
}

}  // namespace

void SimulationOptions::validate() const {
    if (!(radius_m > 0.0) || !std::isfinite(radius_m)) throw ValidationError("simulation.radius_m", "must be > 0");
}

Realization sample_realization(const NetworkConfig& cfg, std::uint64_t seed, std::uint64_t trial_index,
                               const SimulationOptions& options) {
    options.validate();
    Realization r;
    sample_into(cfg, seed, trial_index, options, r);
    return r;
}

Realization sample_conditioned_realization(const NetworkConfig& cfg, std::size_t k, double x0, std::uint64_t seed,
                                           std::uint64_t trial_index, const SimulationOptions& options) {
    options.validate();
    cfg.small(k);
    if (!(x0 > 0.0 && x0 < options.radius_m)) throw DomainError("x0 must lie inside the simulation disc");
    Engine rng = make_engine(seed, trial_index, 0);
    Samplers s(cfg.macro);
    Realization r;
    r.radius_m = options.radius_m;
    const double outer = options.radius_m * options.radius_m;
    const double wm = exclusion_radius_macro(cfg, k, x0);
    fill_tier(r.macro, rng, cfg.macro.density, wm * wm, outer, [&](Engine& e) { return s.macro_interferer(e); });
    r.small.resize(cfg.small_tiers.size());
    for (std::size_t i = 0; i < cfg.small_tiers.size(); ++i) {
        const double wi = exclusion_radius_small(cfg, k, i, x0);
        fill_tier(r.small[i], rng, cfg.small_tiers[i].density, wi * wi, outer,
                  [&](Engine& e) { return s.exponential(e); });
    }
    auto& serving = r.small[k];
    serving.distance_sq.insert(serving.distance_sq.begin(), x0 * x0);
    serving.fading.insert(serving.fading.begin(), 1.0);
    r.serving_small_fading = s.exponential(rng);
    r.serving_macro_fading = draw_serving_macro(cfg, seed, trial_index);
    draw_paired_marks(cfg, r, seed, trial_index, options);
    return r;
}

Association associate(const NetworkConfig& cfg, const Realization& realization) {
    std::vector<std::size_t> nearest(realization.small.size() + 1, 0);
    for (std::size_t t = 0; t < nearest.size(); ++t) {
        const auto& d2 = tier_of(realization, t).distance_sq;
        if (!d2.empty()) nearest[t] = static_cast<std::size_t>(std::min_element(d2.begin(), d2.end()) - d2.begin());
    }
    return associate_from_nearest(cfg, realization, nearest);
}

double interference(const NetworkConfig& cfg, const Realization& realization, const Association& serving,
                    bool paired_marks) {
    const auto tier_sum = [&](const TierSample& tier, double tx, double alpha, bool is_serving_tier) {
        const auto& marks = paired_marks ? tier.paired_fading : tier.fading;
        if (marks.size() != tier.distance_sq.size()) throw PreconditionError("realization has no paired marks");
        double sum = 0.0;
        for (std::size_t j = 0; j < tier.distance_sq.size(); ++j) {
            if (is_serving_tier && j == serving.index) continue;
            sum += marks[j] * path_gain(tier.distance_sq[j], alpha);
        }
        return tx * sum;
    };
    const auto& m = cfg.macro;
    double total = tier_sum(realization.macro, m.power_w * cfg.eta / m.streams, m.path_loss_exponent,
                            serving.valid && serving.macro);
    for (std::size_t i = 0; i < realization.small.size(); ++i) {
        const auto& t = cfg.small(i);
        total += tier_sum(realization.small[i], t.power_w * cfg.eta, t.path_loss_exponent,
                          serving.valid && !serving.macro && serving.small_tier == i);
    }
    return total;
}

NomaOutcome evaluate_noma_trial(const NetworkConfig& cfg, const Realization& realization, const Association& serving,
                                const Targets& targets) {
    const double typical = interference(cfg, realization, serving);
    const ServingLink link =
        small_link(cfg, realization, serving, typical, paired_interference(cfg, realization, serving, typical));
    return noma_outcome(link, serving.role, targets);
}

NomaOutcome evaluate_noma_trial(const NetworkConfig& cfg, const Realization& realization, const Targets& targets) {
    return evaluate_noma_trial(cfg, realization, associate(cfg, realization), targets);
}

double evaluate_macro_trial(const NetworkConfig& cfg, const Realization& realization, const Association& serving) {
    if (!serving.valid || !serving.macro) throw PreconditionError("trial is not served by the macro tier");
    return macro_outcome(cfg, realization, serving, interference(cfg, realization, serving));
}

double evaluate_macro_trial(const NetworkConfig& cfg, const Realization& realization) {
    return evaluate_macro_trial(cfg, realization, associate(cfg, realization));
}

OmaOutcome evaluate_oma_trial(const NetworkConfig& cfg, const Realization& realization, const Association& serving,
                              const Targets& targets) {
    const double typical = interference(cfg, realization, serving);
    const ServingLink link =
        small_link(cfg, realization, serving, typical, paired_interference(cfg, realization, serving, typical));
    return oma_outcome(link, targets);
}

OmaOutcome evaluate_oma_trial(const NetworkConfig& cfg, const Realization& realization, const Targets& targets) {
    return evaluate_oma_trial(cfg, realization, associate(cfg, realization), targets);
}

std::string Metric::name() const {
    const std::string idx = "[" + std::to_string(tier) + "]";
    switch (kind) {
        case MetricKind::association_macro: return "association_macro";
        case MetricKind::association_small: return "association_small" + idx;
        case MetricKind::coverage: return "coverage" + idx;
        case MetricKind::ergodic_rate: return "ergodic_rate" + idx;
        case MetricKind::macro_rate: return "macro_rate";
        case MetricKind::oma_coverage: return "oma_coverage" + idx;
        case MetricKind::oma_rate: return "oma_rate" + idx;
    }
    return "unknown";
}

Metric Metric::parse(const std::string& text) {
    std::string base = text;
    std::size_t tier = 0;
    const auto open = text.find('[');
    if (open != std::string::npos) {
        if (text.back() != ']') throw DomainError("malformed metric '" + text + "'");
        base = text.substr(0, open);
        const std::string digits = text.substr(open + 1, text.size() - open - 2);
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            throw DomainError("malformed tier index in metric '" + text + "'");
        }
        tier = std::stoul(digits);
    }
    const bool indexed = open != std::string::npos;
    const auto make = [&](MetricKind kind, bool needs_index) {
        if (needs_index != indexed) {
            throw DomainError("metric '" + base + (needs_index ? "' needs a [tier] index" : "' takes no index"));
        }
        return Metric{kind, tier};
    };
    if (base == "association_macro") return make(MetricKind::association_macro, false);
    if (base == "association_small") return make(MetricKind::association_small, true);
    if (base == "coverage") return make(MetricKind::coverage, true);
    if (base == "ergodic_rate") return make(MetricKind::ergodic_rate, true);
    if (base == "macro_rate") return make(MetricKind::macro_rate, false);
    if (base == "oma_coverage") return make(MetricKind::oma_coverage, true);
    if (base == "oma_rate") return make(MetricKind::oma_rate, true);
    throw DomainError("unknown metric '" + text + "'");
}

Estimate summarize(const std::vector<double>& values, std::uint64_t trials, std::uint64_t seed) {
    Estimate e;
    e.trials = trials;
    e.samples = values.size();
    e.seed = seed;
    if (values.empty()) throw NumericalError("no trial contributed to the estimate");
    const double n = static_cast<double>(values.size());
    e.mean = neumaier_sum(values) / n;
    if (values.size() < 2) {
        e.ci_halfwidth_99 = std::numeric_limits<double>::infinity();
    } else {
        const double variance = neumaier_sum(values, e.mean, true) / (n - 1.0);
        e.ci_halfwidth_99 = kZ99 * std::sqrt(variance / n);
    }
    return e;
}

SimulationRun::SimulationRun(std::vector<TrialRecord> records, std::uint64_t seed)
    : records_(std::move(records)), seed_(seed) {}

Estimate SimulationRun::estimate(const Metric& metric) const {
    std::vector<double> values;
    values.reserve(records_.size());
    const std::int32_t small_code = static_cast<std::int32_t>(metric.tier) + 1;
    for (const auto& r : records_) {
        const bool in_tier = r.tier == small_code;
        switch (metric.kind) {
            case MetricKind::association_macro:
                values.push_back(r.tier == 0 ? 1.0 : 0.0);
                break;
            case MetricKind::association_small:
                values.push_back(in_tier ? 1.0 : 0.0);
                break;
            case MetricKind::coverage:
                if (in_tier) values.push_back(r.noma_covered ? 1.0 : 0.0);
                break;
            case MetricKind::ergodic_rate:
                if (in_tier) values.push_back(r.noma_rate);
                break;
            case MetricKind::macro_rate:
                if (r.tier == 0) values.push_back(r.macro_rate);
                break;
            case MetricKind::oma_coverage:
                if (in_tier) values.push_back(r.oma_covered ? 1.0 : 0.0);
                break;
            case MetricKind::oma_rate:
                if (in_tier) values.push_back(r.oma_rate);
                break;
        }
    }
    return summarize(values, records_.size(), seed_);
}

std::uint64_t SimulationRun::sic_order_violations() const {
    return static_cast<std::uint64_t>(
        std::count_if(records_.begin(), records_.end(), [](const TrialRecord& r) { return !r.sic_order_holds; }));
}

std::vector<SimulationRun> simulate_batch(const std::vector<NetworkConfig>& cfgs, const std::vector<Targets>& targets,
                                          std::uint64_t trials, std::uint64_t seed, const SimulationOptions& options) {
    check_trials(trials);
    options.validate();
    if (cfgs.empty()) throw DomainError("simulate_batch needs at least one configuration");
    if (cfgs.size() != targets.size()) throw DomainError("one target pair per configuration is required");
    for (const auto& cfg : cfgs) cfg.validate();

    // Group configurations that draw identical realizations.
    std::vector<std::size_t> group(cfgs.size());
    std::vector<std::size_t> leaders;
    for (std::size_t c = 0; c < cfgs.size(); ++c) {
        group[c] = leaders.size();
        for (std::size_t g = 0; g < leaders.size(); ++g) {
            if (same_sampling(cfgs[leaders[g]], cfgs[c])) {
                group[c] = g;
                break;
            }
        }
        if (group[c] == leaders.size()) leaders.push_back(c);
    }

    std::vector<std::vector<TrialRecord>> records(cfgs.size(), std::vector<TrialRecord>(trials));
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, options.threads), trials));
    std::vector<Realization> buffers(workers);
    std::vector<TierSums> sums(workers);
    parallel_trials(trials, workers, [&](std::uint64_t t) {
        const unsigned w = static_cast<unsigned>(t % workers);
        Realization& r = buffers[w];
        TierSums& s = sums[w];
        for (std::size_t g = 0; g < leaders.size(); ++g) {
            sample_into(cfgs[leaders[g]], seed, t, options, r);
            s.alpha.clear();
            for (std::size_t c = 0; c < cfgs.size(); ++c) {
                if (group[c] != g) continue;
                const auto& cfg = cfgs[c];
                const auto alpha = exponents_of(cfg);
                if (alpha != s.alpha) prepare_sums(r, alpha, s);
                const Association a = associate_from_nearest(cfg, r, s.nearest);
                if (a.valid && a.macro) r.serving_macro_fading = draw_serving_macro(cfg, seed, t);
                TrialRecord rec;
                if (a.valid) {
                    const double typical = cached_interference(cfg, r, s, a, false);
                    rec.tier = a.macro ? 0 : static_cast<std::int32_t>(a.small_tier) + 1;
                    rec.role = a.role;
                    if (a.macro) {
                        rec.macro_rate = macro_outcome(cfg, r, a, typical);
                    } else {
                        const double paired = options.paired_field == PairedField::independent
                                                  ? cached_interference(cfg, r, s, a, true)
                                                  : typical;
                        const ServingLink link = small_link(cfg, r, a, typical, paired);
                        const NomaOutcome noma = noma_outcome(link, a.role, targets[c]);
                        const OmaOutcome oma = oma_outcome(link, targets[c]);
                        rec.noma_covered = noma.covered;
                        rec.noma_rate = noma.sum_rate;
                        rec.sic_order_holds = noma.sic_order_holds;
                        rec.oma_covered = oma.covered;
                        rec.oma_rate = oma.sum_rate;
                    }
                }
                records[c][t] = rec;
            }
        }
    });

    std::vector<SimulationRun> runs;
    runs.reserve(cfgs.size());
    for (auto& rec : records) runs.emplace_back(std::move(rec), seed);
    return runs;
}

SimulationRun simulate(const NetworkConfig& cfg, const Targets& targets, std::uint64_t trials, std::uint64_t seed,
                       const SimulationOptions& options) {
    return std::move(simulate_batch({cfg}, {targets}, trials, seed, options).front());
}

Estimate estimate(const NetworkConfig& cfg, const Targets& targets, const Metric& metric, std::uint64_t trials,
                  std::uint64_t seed, const SimulationOptions& options) {
    return simulate(cfg, targets, trials, seed, options).estimate(metric);
}

Estimate estimate_conditional_coverage(const NetworkConfig& cfg, std::size_t k, const Targets& targets, double x0,
                                       std::uint64_t trials, std::uint64_t seed, const SimulationOptions& options) {
    check_trials(trials);
    cfg.validate();
    const auto& tier = cfg.small(k);
    std::vector<double> covered(trials);
    parallel_trials(trials, options.threads, [&](std::uint64_t t) {
        const Realization r = sample_conditioned_realization(cfg, k, x0, seed, t, options);
        Association a;
        a.valid = true;
        a.small_tier = k;
        a.index = 0;
        a.distance = x0;
        a.role = x0 <= tier.pair_distance_m ? Role::near : Role::far;
        covered[t] = evaluate_noma_trial(cfg, r, a, targets).covered ? 1.0 : 0.0;
    });
    return summarize(covered, trials, seed);
}

}  // namespace hetnoma::mc
