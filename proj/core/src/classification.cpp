#include "lambdacoal/classification.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lambdacoal/errors.hpp"
#include "lambdacoal/special.hpp"
#include "lambdacoal/util.hpp"

namespace lambdacoal {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Converges: return "converges";
        case Verdict::Diverges: return "diverges";
        default: return "inconclusive";
    }
}

const char* to_string(CoalescentClass c) {
    switch (c) {
        case CoalescentClass::ComesDownFromInfinity: return "comes-down-from-infinity";
        case CoalescentClass::DustFreeStaysInfinite: return "dust-free-stays-infinite";
        case CoalescentClass::HasDust: return "has-dust";
        case CoalescentClass::Inconsistent: return "inconsistent";
        default: return "inconclusive";
    }
}

namespace {

// Grids are anchored at the top cutoff and descend in uniform log10 steps,
// so the increments used by the tail fit are evenly spaced in log space.
std::vector<long> geometric_int_grid(long lo, long hi, int per_decade) {
    std::set<long> grid;
    const double top = std::log10(static_cast<double>(hi));
    for (int i = 0;; ++i) {
        const double e = top - static_cast<double>(i) / per_decade;
        const long v = static_cast<long>(std::llround(std::pow(10.0, e)));
        if (v <= lo) break;
        grid.insert(v);
    }
    grid.insert(lo);
    return {grid.begin(), grid.end()};
}

std::vector<double> geometric_grid(double lo, double hi, int per_decade) {
    std::vector<double> grid;
    const double top = std::log10(hi);
    for (int i = 0;; ++i) {
        const double e = top - static_cast<double>(i) / per_decade;
        const double v = std::pow(10.0, e);
        if (v <= lo * (1.0 + 1e-12)) break;
        grid.push_back(v);
    }
    grid.push_back(lo);
    std::reverse(grid.begin(), grid.end());
    return grid;
}

/// Apply the pre-registered fit rule to evidence with ascending cutoffs.
ConvergenceVerdict verdict_from_evidence(std::vector<EvidencePoint> evidence,
                                         const ClassificationConfig& cfg,
                                         const std::string& what) {
    ConvergenceVerdict out;
    out.evidence = std::move(evidence);
    if (out.evidence.size() < 3) {
        out.note = what + ": too few grid points";
        return out;
    }

    const double x_hi = std::log10(out.evidence.back().cutoff);
    const double x_lo = x_hi - cfg.fit_window_decades;
    std::vector<double> xs, ys;
    int dropped = 0;
    for (std::size_t i = 0; i + 1 < out.evidence.size(); ++i) {
        const double x = std::log10(out.evidence[i].cutoff);
        if (x < x_lo) continue;
        const double inc = out.evidence[i + 1].partial - out.evidence[i].partial;
        if (inc <= 0.0) {
            ++dropped;
            continue;
        }
        xs.push_back(x);
        ys.push_back(std::log10(inc));
    }
    if (xs.size() < 4) {
        out.note = what + ": fewer than 4 usable increments in the fit window";
        return out;
    }

    const LinearFit fit = fit_line(xs, ys);
    out.fitted_slope = fit.slope;
    out.fit_residual = fit.rms_residual;
    if (dropped > 0) out.note = what + ": dropped " + std::to_string(dropped) + " zero increments";

    const FitThresholds& th = cfg.thresholds;
    if (fit.rms_residual > th.max_residual) {
        out.verdict = Verdict::Inconclusive;
        out.note = what + ": increment decay is not power-like (residual " +
                   std::to_string(fit.rms_residual) + ")";
    } else if (fit.slope <= th.converge_slope) {
        out.verdict = Verdict::Converges;
    } else if (fit.slope >= th.diverge_slope) {
        out.verdict = Verdict::Diverges;
    } else {
        out.verdict = Verdict::Inconclusive;
        out.note = what + ": fitted slope in the inconclusive band";
    }
    return out;
}

} // namespace

double psi(const LambdaMeasure& measure, double q, const QuadratureOptions& opts) {
    if (q < 0.0) throw ValidationError("psi requires q >= 0");
    if (q == 0.0) return 0.0;
    Integrand g;
    g.f = [q](double x) { return exp_remainder2(q * x) / (x * x); };
    g.singularity_order = 0.0;
    g.limit_at_zero = 0.5 * q * q;
    QuadratureOptions o = opts;
    o.rel_tol = std::max(o.rel_tol, 1e-11);
    return integrate(measure, g, o);
}

ConvergenceVerdict cdi_series_test(const RateTable& table, const ClassificationConfig& cfg) {
    const int b_max = table.b_max();
    if (b_max < 100)
        throw ValidationError("cdi_series_test needs a rate table with b_max >= 100");

    const std::vector<long> grid = geometric_int_grid(2, b_max, cfg.grid_points_per_decade);
    std::vector<EvidencePoint> evidence;
    evidence.reserve(grid.size());

    CompensatedSum partial;
    std::size_t gi = 0;
    for (int b = 2; b <= b_max; ++b) {
        const double d_b = table.cdi_denominator(b);
        if (!(d_b > 0.0))
            throw NumericError("cdi_series_test: d_b is zero (degenerate measure)");
        partial.add(1.0 / d_b);
        if (gi < grid.size() && grid[gi] == b) {
            evidence.push_back({static_cast<double>(b), partial.value()});
            ++gi;
        }
    }
    return verdict_from_evidence(std::move(evidence), cfg, "series");
}

ConvergenceVerdict cdi_psi_test(const LambdaMeasure& measure, const ClassificationConfig& cfg) {
    if (psi(measure, 1.0, cfg.quadrature) <= 0.0)
        throw NumericError("cdi_psi_test: psi vanishes (degenerate measure)");

    const std::vector<double> grid = geometric_grid(1.0, cfg.psi_q_max, cfg.grid_points_per_decade);
    std::vector<EvidencePoint> evidence;
    evidence.push_back({1.0, 0.0});

    QuadratureOptions seg = cfg.quadrature;
    seg.rel_tol = 1e-9;
    auto inv_psi = [&](double q) { return 1.0 / psi(measure, q, cfg.quadrature); };

    CompensatedSum partial;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        partial.add(integrate_or_throw(inv_psi, grid[i], grid[i + 1], seg));
        evidence.push_back({grid[i + 1], partial.value()});
    }
    return verdict_from_evidence(std::move(evidence), cfg, "psi-integral");
}

ConvergenceVerdict dust_test(const LambdaMeasure& measure, const ClassificationConfig& cfg) {
    ConvergenceVerdict out;
    if (measure.atom_mass_at_zero() > 0.0) {
        out.verdict = Verdict::Diverges;
        out.note = "atom at 0: the 1/x integral is infinite";
        return out;
    }

    const double support_inf = measure.positive_support_infimum();
    if (support_inf > cfg.dust_eps_min) {
        // Support bounded away from 0: the integral is finite and complete.
        double value = 0.0;
        for (const Atom& a : measure.atoms()) value += a.mass / a.location;
        auto inv_x = [](double x) { return 1.0 / x; };
        for (const Density& d : measure.densities())
            value += integrate_density_against(d, inv_x, -1.0, support_inf * 0.5, 1.0,
                                               cfg.quadrature);
        out.verdict = Verdict::Converges;
        out.fitted_slope = -1.0;
        out.note = "support bounded away from 0; integral computed exactly";
        out.evidence.push_back({1.0 / support_inf, value});
        return out;
    }

    // Partial integrals over [eps, 1]; evidence indexed by 1/eps.
    std::vector<double> inv_eps_grid =
        geometric_grid(1.0, 1.0 / cfg.dust_eps_min, cfg.grid_points_per_decade);
    std::vector<EvidencePoint> evidence;
    evidence.push_back({1.0, 0.0});

    auto inv_x = [](double x) { return 1.0 / x; };
    CompensatedSum partial;
    for (std::size_t i = 0; i + 1 < inv_eps_grid.size(); ++i) {
        const double hi = 1.0 / inv_eps_grid[i];
        const double lo = 1.0 / inv_eps_grid[i + 1];
        double inc = 0.0;
        for (const Density& d : measure.densities())
            inc += integrate_density_against(d, inv_x, -1.0, lo, hi, cfg.quadrature);
        for (const Atom& a : measure.atoms())
            if (a.location >= lo && a.location < hi) inc += a.mass / a.location;
        partial.add(inc);
        evidence.push_back({inv_eps_grid[i + 1], partial.value()});
    }
    return verdict_from_evidence(std::move(evidence), cfg, "dust-integral");
}

ClassificationReport classify(const LambdaMeasure& measure, const ClassificationConfig& cfg) {
    ClassificationReport report;
    report.measure_spec = measure.to_spec_string();

    const RateTable table = build_rate_table(measure, cfg.series_b_max, 0, cfg.jobs);
    report.cdi_series = cdi_series_test(table, cfg);
    report.cdi_psi = cdi_psi_test(measure, cfg);
    report.dust = dust_test(measure, cfg);

    const Verdict s = report.cdi_series.verdict;
    const Verdict p = report.cdi_psi.verdict;
    const Verdict dust = report.dust.verdict;

    if (s != Verdict::Inconclusive && p != Verdict::Inconclusive && s != p) {
        report.combined = CoalescentClass::Inconsistent;
        report.note = "the series and psi-integral criteria disagree";
        return report;
    }
    const Verdict cdi = (s != Verdict::Inconclusive) ? s : p;

    if (cdi == Verdict::Converges) {
        if (dust == Verdict::Converges) {
            // Coming down from infinity implies dust-free; this cannot both hold.
            report.combined = CoalescentClass::Inconsistent;
            report.note = "CDI verdict contradicts a has-dust verdict";
        } else {
            report.combined = CoalescentClass::ComesDownFromInfinity;
            if (dust == Verdict::Inconclusive)
                report.note = "dust test inconclusive; dust-free follows from CDI";
        }
    } else if (dust == Verdict::Converges) {
        report.combined = CoalescentClass::HasDust;
    } else if (cdi == Verdict::Diverges && dust == Verdict::Diverges) {
        report.combined = CoalescentClass::DustFreeStaysInfinite;
    } else {
        report.combined = CoalescentClass::Inconclusive;
        report.note = "not enough evidence to separate the classes";
    }
    return report;
}

} // namespace lambdacoal
