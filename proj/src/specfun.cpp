#include "hetnoma/specfun.hpp"

#include "hetnoma/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace hetnoma::specfun {
namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
using Gauss = boost::math::quadrature::gauss<double, 10>;

struct Segment {
    double a;
    double b;
    double value;
    double error;
};

bool operator<(const Segment& lhs, const Segment& rhs) { return lhs.error < rhs.error; }

// One 21-point Kronrod / 10-point Gauss pair on [a, b]. The error estimate
// follows the QUADPACK heuristic, which is sharp for smooth integrands and
// conservative near singularities.
Segment apply_rule(const Integrand& f, double a, double b) {
    const auto& x = Kronrod::abscissa();
    const auto& wk = Kronrod::weights();
    const auto& wg = Gauss::weights();

    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    std::array<double, 21> values{};
    const double fc = f(centre);
    values[0] = fc;
    double kronrod = fc * wk[0];
    double gauss = 0.0;
    double abs_sum = std::abs(fc) * wk[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double fp = f(centre + half * x[i]);
        const double fm = f(centre - half * x[i]);
        values[2 * i - 1] = fp;
        values[2 * i] = fm;
        kronrod += (fp + fm) * wk[i];
        abs_sum += (std::abs(fp) + std::abs(fm)) * wk[i];
        if (i % 2 == 1) gauss += (fp + fm) * wg[i / 2];
    }
    if (!std::isfinite(kronrod)) {
        std::ostringstream msg;
        msg << "integrand is not finite on [" << a << ", " << b << "]";
        throw NumericalError(msg.str());
    }

    const double mean = 0.5 * kronrod;
    double spread = std::abs(fc - mean) * wk[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        spread += (std::abs(values[2 * i - 1] - mean) + std::abs(values[2 * i] - mean)) * wk[i];
    }

    const double result = kronrod * half;
    const double result_abs = abs_sum * std::abs(half);
    const double result_spread = spread * std::abs(half);
    double error = std::abs((kronrod - gauss) * half);
    if (result_spread != 0.0 && error != 0.0) {
        error = result_spread * std::min(1.0, std::pow(200.0 * error / result_spread, 1.5));
    }
    const double eps = std::numeric_limits<double>::epsilon();
    if (result_abs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        error = std::max(error, 50.0 * eps * result_abs);
    }
    return {a, b, result, error};
}

bool splittable(const Segment& s) {
    const double mid = 0.5 * (s.a + s.b);
    const double width = s.b - s.a;
    const double scale = std::max(std::abs(s.a), std::abs(s.b));
    return mid > s.a && mid < s.b && width > 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

double tolerance_for(const QuadratureSettings& settings, double value) {
    return std::max(settings.absolute_tolerance, settings.relative_tolerance * std::abs(value));
}

}  // namespace

void QuadratureSettings::validate() const {
    if (!(relative_tolerance > 0.0)) throw DomainError("quadrature relative_tolerance must be > 0");
    if (!(absolute_tolerance >= 0.0)) throw DomainError("quadrature absolute_tolerance must be >= 0");
    if (max_subdivisions < 16) throw DomainError("quadrature max_subdivisions must be >= 16");
}

QuadratureResult integrate_detailed(const Integrand& f, double a, double b,
                                    const QuadratureSettings& settings) {
    settings.validate();
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("integrate: finite limits required, use integrate_to_infinity");
    }
    if (a == b) return {};
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }

    std::vector<Segment> heap;
    std::vector<Segment> frozen;
    heap.reserve(64);
    heap.push_back(apply_rule(f, a, b));
    double total = heap.front().value;
    double error = heap.front().error;
    int evaluations = 21;
    int subdivisions = 0;

    while (error > tolerance_for(settings, total)) {
        if (heap.empty()) {
            std::ostringstream msg;
            msg << "quadrature limited by round-off on [" << a << ", " << b << "]: estimate " << total
                << " +/- " << error;
            throw ConvergenceError(msg.str());
        }
        if (subdivisions >= settings.max_subdivisions) {
            std::ostringstream msg;
            msg << "quadrature did not converge in " << settings.max_subdivisions << " subdivisions on [" << a
                << ", " << b << "]: estimate " << total << " +/- " << error;
            throw ConvergenceError(msg.str());
        }
        std::pop_heap(heap.begin(), heap.end());
        const Segment worst = heap.back();
        heap.pop_back();
        if (!splittable(worst)) {
            frozen.push_back(worst);
            continue;
        }
        const double mid = 0.5 * (worst.a + worst.b);
        const Segment left = apply_rule(f, worst.a, mid);
        const Segment right = apply_rule(f, mid, worst.b);
        evaluations += 42;
        ++subdivisions;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end());

        // Running sums drift; resum every so often.
        if (subdivisions % 64 == 0) {
            total = 0.0;
            error = 0.0;
            for (const auto& s : heap) {
                total += s.value;
                error += s.error;
            }
            for (const auto& s : frozen) {
                total += s.value;
                error += s.error;
            }
        }
    }

    // Final resummation in a fixed order so the result does not depend on
    // the accumulated rounding of the running sums.
    std::vector<Segment> all = std::move(heap);
    all.insert(all.end(), frozen.begin(), frozen.end());
    std::sort(all.begin(), all.end(), [](const Segment& l, const Segment& r) { return l.a < r.a; });
    double value = 0.0;
    double err = 0.0;
    for (const auto& s : all) {
        value += s.value;
        err += s.error;
    }
    return {sign * value, err, subdivisions, evaluations};
}

double integrate(const Integrand& f, double a, double b, const QuadratureSettings& settings) {
    return integrate_detailed(f, a, b, settings).value;
}

QuadratureResult integrate_to_infinity_detailed(const Integrand& f, double a,
                                                const QuadratureSettings& settings, double scale) {
    if (!std::isfinite(a)) throw DomainError("integrate_to_infinity: lower limit must be finite");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("integrate_to_infinity: scale must be > 0");
    const Integrand mapped = [&](double t) {
        const double one_minus = 1.0 - t;
        const double r = a + scale * t / one_minus;
        if (!std::isfinite(r)) return 0.0;
        const double jac = scale / (one_minus * one_minus);
        const double v = f(r);
        return v == 0.0 ? 0.0 : v * jac;
    };
    return integrate_detailed(mapped, 0.0, 1.0, settings);
}

double integrate_to_infinity(const Integrand& f, double a, const QuadratureSettings& settings, double scale) {
    return integrate_to_infinity_detailed(f, a, settings, scale).value;
}

double hyp2f1_coverage(double delta, double x) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("hyp2f1_coverage: delta must lie in (0, 1)");
    if (!(x >= 0.0)) throw DomainError("hyp2f1_coverage: x must be >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    // t = w^(1 / (1 - delta)) absorbs the t^-delta endpoint singularity:
    // (1 - delta) t^-delta dt = dw.
    const double power = 1.0 / (1.0 - delta);
    const Integrand integrand = [x, power](double w) { return 1.0 / (1.0 + x * std::pow(w, power)); };
    const QuadratureSettings tight{1e-13, 1e-16, 4000};
    // The integrand drops from 1 to 1/2 at w = x^-(1 - delta); splitting there
    // keeps both pieces smooth on their own scale.
    const double knee = std::pow(x, -(1.0 - delta));
    if (knee > 0.0 && knee < 1.0) {
        return integrate(integrand, 0.0, knee, tight) + integrate(integrand, knee, 1.0, tight);
    }
    return integrate(integrand, 0.0, 1.0, tight);
}

double real_branch_beta(double u, int p, double delta, int N) {
    if (!(u >= 0.0)) throw DomainError("real_branch_beta: u must be >= 0");
    if (N < 1) throw DomainError("real_branch_beta: N must be >= 1");
    if (p < 1 || p > N) throw DomainError("real_branch_beta: p must satisfy 1 <= p <= N");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("real_branch_beta: delta must lie in (0, 1)");
    if (u == 0.0) return 0.0;
    // w = v / (1 + v) maps the integral onto the incomplete Beta function
    // B_w(p - delta, N - p + delta); both parameters are positive.
    const double a = p - delta;
    const double b = N - p + delta;
    if (std::isinf(u)) return boost::math::beta(a, b);
    const double w = u / (1.0 + u);
    return boost::math::beta(a, b, w);
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double result = 1.0;
    for (int i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;
    }
    return std::round(result);
}

double macro_laplace_sum(double scaled_s, double exclusion_radius, double delta, int N) {
    if (!std::isfinite(scaled_s) || scaled_s < 0.0) throw DomainError("macro_laplace_sum: scaled_s must be finite and >= 0");
    if (!(exclusion_radius >= 0.0) || std::isnan(exclusion_radius)) {
        throw DomainError("macro_laplace_sum: exclusion radius must be >= 0");
    }
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("macro_laplace_sum: delta must lie in (0, 1)");
    if (N < 1) throw DomainError("macro_laplace_sum: N must be >= 1");
    if (scaled_s == 0.0) return 0.0;

    const double alpha = 2.0 / delta;
    const double u = exclusion_radius == 0.0 ? std::numeric_limits<double>::infinity()
                                             : scaled_s * std::pow(exclusion_radius, -alpha);
    double sum = 0.0;
    for (int p = 1; p <= N; ++p) {
        const double term = binomial(N, p) * real_branch_beta(u, p, delta, N);
        if (!std::isfinite(term)) {
            throw OverflowError("macro_laplace_sum: binomial term overflowed");
        }
        sum += term;
    }
    const double result = std::pow(scaled_s, delta) * sum;
    if (!std::isfinite(result)) throw OverflowError("macro_laplace_sum: result overflowed");
    return result;
}

}  // namespace hetnoma::specfun
