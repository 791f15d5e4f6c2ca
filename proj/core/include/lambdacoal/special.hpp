#pragma once

#include <cmath>

namespace lambdacoal {

/// log Beta(a, b) for a, b > 0.
inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

/// log C(n, k).
inline double log_binomial(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// e^{-u} - 1 + u, evaluated without cancellation near u = 0.
/// This is the kernel of the psi integrand; it behaves like u^2/2 at 0.
inline double exp_remainder2(double u) {
    if (u < 1e-4) {
        const double u2 = u * u;
        return u2 * (0.5 - u / 6.0 + u2 / 24.0 - u2 * u / 120.0);
    }
    return std::expm1(-u) + u;
}

} // namespace lambdacoal
