#include "lambdacoal/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "lambdacoal/errors.hpp"
#include "lambdacoal/special.hpp"
#include "lambdacoal/util.hpp"

namespace lambdacoal {
namespace {

// QUADPACK (G7, K15) abscissae and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
constexpr double kWgk[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
constexpr double kWg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

struct PanelEval {
    double integral = 0.0;
    double error = 0.0;
};

PanelEval eval_gk15(const std::function<double(double)>& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);

    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(mid - half * kXgk[i]);
        fv[14 - i] = f(mid + half * kXgk[i]);
    }
    fv[7] = f(mid);

    double kronrod = kWgk[7] * fv[7];
    double gauss = kWg[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        kronrod += kWgk[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) gauss += kWg[i / 2] * (fv[i] + fv[14 - i]);
    }
    PanelEval out;
    out.integral = kronrod * half;
    out.error = std::abs((kronrod - gauss) * half);
    if (!std::isfinite(out.integral))
        throw NumericError("quadrature: integrand produced a non-finite value");
    return out;
}

struct Panel {
    double a, b, integral, error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

} // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureOptions& opts) {
    QuadratureResult res;
    if (a == b) {
        res.converged = true;
        return res;
    }

    std::priority_queue<Panel> queue;
    const PanelEval first = eval_gk15(f, a, b);
    queue.push({a, b, first.integral, first.error});
    res.panels = 1;

    double total = first.integral;
    double total_err = first.error;

    while (total_err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
        if (res.panels >= opts.max_panels) {
            res.value = total;
            res.error_estimate = total_err;
            res.converged = false;
            return res;
        }
        Panel worst = queue.top();
        queue.pop();
        const double m = 0.5 * (worst.a + worst.b);
        if (m <= worst.a || m >= worst.b) {
            // Panel no longer refinable in double precision; accept it.
            if (queue.empty()) break;
            total_err -= worst.error;
            continue;
        }
        const PanelEval left = eval_gk15(f, worst.a, m);
        const PanelEval right = eval_gk15(f, m, worst.b);
        res.panels += 2;
        total += left.integral + right.integral - worst.integral;
        total_err += left.error + right.error - worst.error;
        queue.push({worst.a, m, left.integral, left.error});
        queue.push({m, worst.b, right.integral, right.error});
    }

    res.value = total;
    res.error_estimate = total_err;
    res.converged = true;
    return res;
}

double integrate_or_throw(const std::function<double(double)>& f,
                          double a, double b,
                          const QuadratureOptions& opts) {
    const QuadratureResult r = integrate_adaptive(f, a, b, opts);
    if (!r.converged)
        throw NumericError("quadrature did not converge within the panel budget "
                           "(integral may be divergent)");
    return r.value;
}

namespace {

struct DensityShape {
    double lo, hi;
    double left_exponent;  // pdf ~ (x - lo)^e near lo
    double right_exponent; // pdf ~ (hi - x)^e near hi
    // pdf evaluated from the exact endpoint gaps (x - lo, hi - x); endpoint
    // substitutions hand these in directly so no digit is lost to forming
    // 1 - x near a singular endpoint.
    std::function<double(double from_lo, double from_hi)> pdf;
};

DensityShape density_shape(const Density& d) {
    if (const auto* u = std::get_if<UniformDensity>(&d.kind)) {
        const double inv = 1.0 / (u->hi - u->lo);
        return {u->lo, u->hi, 0.0, 0.0, [inv](double, double) { return inv; }};
    }
    if (const auto* betad = std::get_if<BetaDensity>(&d.kind)) {
        const double p = betad->p, q = betad->q;
        const double lb = log_beta(p, q);
        auto pdf = [p, q, lb](double from_lo, double from_hi) {
            return std::exp((p - 1.0) * std::log(from_lo) + (q - 1.0) * std::log(from_hi) -
                            lb);
        };
        return {0.0, 1.0, p - 1.0, q - 1.0, pdf};
    }
    const auto& pw = std::get<PowerDensity>(d.kind);
    const double g = pw.exponent;
    auto pdf = [g](double from_lo, double) { return (g + 1.0) * std::pow(from_lo, g); };
    return {0.0, 1.0, g, 0.0, pdf};
}

/// Substitution power that turns an endpoint behavior (x - e)^c into a
/// bounded integrand: x = e + s^m maps it to m s^{m(c+1)-1}, so m is chosen
/// with m(c+1) - 1 >= 1. Divergent cases (c <= -1) keep a mild power and are
/// caught by the panel budget.
double substitution_power(double c) {
    if (c <= -1.0) return 2.0;
    return std::clamp(std::ceil(2.0 / (1.0 + c)), 2.0, 16.0);
}

/// Integrand that receives the evaluation point together with its exact
/// distances to the support endpoints.
using GapIntegrand = std::function<double(double x, double from_lo, double from_hi)>;

/// Integral of h over [lo, hi] inside the support [supp_lo, supp_hi], with
/// endpoint substitutions where the declared exponents are negative. Only
/// the singular half is substituted; evaluations that round onto a singular
/// endpoint return 0 (the substituted integrand is bounded there).
double integrate_with_substitutions(const GapIntegrand& h, double lo, double hi,
                                    double supp_lo, double supp_hi,
                                    std::optional<double> left_exp,
                                    std::optional<double> right_exp,
                                    const QuadratureOptions& opts) {
    auto plain = [&](double x) { return h(x, x - supp_lo, supp_hi - x); };
    if (!left_exp && !right_exp) return integrate_or_throw(plain, lo, hi, opts);
    const double mid = 0.5 * (lo + hi);
    double value = 0.0;
    if (left_exp) {
        const double m = substitution_power(*left_exp);
        auto g = [&](double s) {
            const double gap = std::pow(s, m);
            const double x = lo + gap;
            if (x <= lo) return 0.0;
            return m * std::pow(s, m - 1.0) * h(x, gap, supp_hi - x);
        };
        value += integrate_or_throw(g, 0.0, std::pow(mid - lo, 1.0 / m), opts);
    } else {
        value += integrate_or_throw(plain, lo, mid, opts);
    }
    if (right_exp) {
        const double m = substitution_power(*right_exp);
        auto g = [&](double s) {
            const double gap = std::pow(s, m);
            const double x = hi - gap;
            if (x >= hi) return 0.0;
            return m * std::pow(s, m - 1.0) * h(x, x - supp_lo, gap);
        };
        value += integrate_or_throw(g, 0.0, std::pow(hi - mid, 1.0 / m), opts);
    } else {
        value += integrate_or_throw(plain, mid, hi, opts);
    }
    return value;
}

} // namespace

double integrate_density_against(const Density& d,
                                 const std::function<double(double)>& f,
                                 double f_order_at_zero, double lo, double hi,
                                 const QuadratureOptions& opts) {
    const DensityShape shape = density_shape(d);
    const double a = std::max(lo, shape.lo);
    const double b = std::min(hi, shape.hi);
    if (a >= b) return 0.0;
    auto h = [&](double x, double from_lo, double from_hi) {
        return f(x) * shape.pdf(from_lo, from_hi);
    };
    const double left_order =
        (a == 0.0 ? f_order_at_zero : 0.0) + (a == shape.lo ? shape.left_exponent : 0.0);
    std::optional<double> left_exp, right_exp;
    if (left_order < 0.0) left_exp = left_order;
    if (b == shape.hi && shape.right_exponent < 0.0) right_exp = shape.right_exponent;
    return d.weight *
           integrate_with_substitutions(h, a, b, shape.lo, shape.hi, left_exp, right_exp,
                                        opts);
}

double integrate(const LambdaMeasure& measure, const Integrand& g,
                 const QuadratureOptions& opts) {
    CompensatedSum acc;

    for (const Atom& a : measure.atoms()) {
        if (a.location == 0.0) {
            if (g.singularity_order < 0.0)
                throw NumericError("non-integrable singularity at 0 against an atom at 0");
            double at_zero;
            if (g.limit_at_zero.has_value())
                at_zero = *g.limit_at_zero;
            else if (g.singularity_order > 0.0)
                at_zero = 0.0;
            else
                throw ValidationError("integrand limit at 0 must be declared for an atom at 0");
            acc.add(a.mass * at_zero);
        } else {
            acc.add(a.mass * g.f(a.location));
        }
    }

    for (const Density& d : measure.densities())
        acc.add(integrate_density_against(d, g.f, g.singularity_order, 0.0, 1.0, opts));

    return acc.value();
}

} // namespace lambdacoal
