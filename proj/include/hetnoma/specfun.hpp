#pragma once

#include <functional>

namespace hetnoma::specfun {

/// Accuracy controls for the adaptive Gauss-Kronrod integrator.
struct QuadratureSettings {
    double relative_tolerance = 1e-9;
    double absolute_tolerance = 1e-12;
    int max_subdivisions = 2000;

    /// Throws DomainError unless rel > 0, abs >= 0 and max_subdivisions >= 16.
    void validate() const;

    /// Default settings for integrals nested inside another integral.
    static QuadratureSettings inner() { return {1e-7, 1e-14, 2000}; }
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int subdivisions = 0;
    int evaluations = 0;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive 21-point Gauss-Kronrod quadrature on the finite interval
/// [a, b]. Integrable endpoint singularities (v^-delta, delta < 1) are
/// permitted because the rule never samples the endpoints.
///
/// Throws ConvergenceError when the tolerance is not met within
/// max_subdivisions, and NumericalError if the integrand returns NaN.
QuadratureResult integrate_detailed(const Integrand& f, double a, double b,
                                    const QuadratureSettings& settings = {});

double integrate(const Integrand& f, double a, double b, const QuadratureSettings& settings = {});

/// Integral over [a, inf) through r = a + scale * t / (1 - t), t in [0, 1).
/// `scale` sets where the bulk of the mass lands inside the unit interval and
/// should be the integrand's characteristic length.
QuadratureResult integrate_to_infinity_detailed(const Integrand& f, double a,
                                                const QuadratureSettings& settings = {},
                                                double scale = 1.0);

double integrate_to_infinity(const Integrand& f, double a, const QuadratureSettings& settings = {},
                             double scale = 1.0);

/// 2F1(1, 1 - delta; 2 - delta; -x) for delta in (0, 1), x >= 0, evaluated
/// from its Euler integral (1 - delta) * int_0^1 t^-delta / (1 + x t) dt.
/// Result lies in (0, 1] and equals 1 exactly at x = 0.
double hyp2f1_coverage(double delta, double x);

/// int_0^u v^(p - delta - 1) (1 + v)^-N dv, the real-valued form of the
/// incomplete Beta term B(-u; p - delta, 1 - N) with its (-1)^(delta - p)
/// prefactor folded in. u may be +inf (complete integral).
double real_branch_beta(double u, int p, double delta, int N);

/// Macro-tier interference exponent kernel:
///   c^delta * sum_{p=1..N} C(N, p) * real_branch_beta(c * omega^(-2/delta), p, delta, N)
/// with c = scaled_s = s * P1 * eta / N and omega the exclusion radius.
/// exp(-lambda1 * pi * delta * result) is the Laplace transform of the
/// Gamma(N, 1)-faded macro interference beyond omega.
/// Throws OverflowError if the sum leaves the double range.
double macro_laplace_sum(double scaled_s, double exclusion_radius, double delta, int N);

/// Binomial coefficient C(n, k) as a double.
double binomial(int n, int k);

}  // namespace hetnoma::specfun
