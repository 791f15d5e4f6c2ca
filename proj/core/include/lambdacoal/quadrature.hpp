#pragma once

#include <functional>
#include <optional>

#include "lambdacoal/measure.hpp"

namespace lambdacoal {

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_panels = 10000;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
    bool converged = false;
};

/// Adaptive Gauss-Kronrod (G7,K15) on [a, b]. Worst panel first; stops when
/// the global error estimate meets max(abs_tol, rel_tol*|value|) or the
/// panel budget runs out (converged = false, partial value reported).
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureOptions& opts = {});

/// As integrate_adaptive, but throws NumericError when not converged.
double integrate_or_throw(const std::function<double(double)>& f,
                          double a, double b,
                          const QuadratureOptions& opts = {});

/// An integrand on (0,1] with declared behavior at 0: f(x) ~ x^singularity_order
/// near 0, and a declared limit value used when the measure has an atom at 0.
struct Integrand {
    std::function<double(double)> f;
    double singularity_order = 0.0;
    std::optional<double> limit_at_zero;
};

/// Integral of `g` against `measure`. Atoms are evaluated exactly; the atom
/// at 0 uses the declared limit (an error if singularity_order < 0, since
/// the integrand then diverges against the atom). Densities are integrated
/// by adaptive quadrature, with a t^2 endpoint substitution whenever the
/// combined endpoint exponent of integrand and density is negative.
double integrate(const LambdaMeasure& measure, const Integrand& g,
                 const QuadratureOptions& opts = {});

/// Integral of f times the component's weighted pdf over [lo, hi] clipped
/// to the component's support, with the same endpoint-substitution rules.
/// f_order_at_zero declares f(x) ~ x^order near 0 (relevant when lo == 0).
double integrate_density_against(const Density& d,
                                 const std::function<double(double)>& f,
                                 double f_order_at_zero, double lo, double hi,
                                 const QuadratureOptions& opts = {});

} // namespace lambdacoal
