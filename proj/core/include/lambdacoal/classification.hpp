#pragma once

#include <string>
#include <vector>

#include "lambdacoal/measure.hpp"
#include "lambdacoal/quadrature.hpp"
#include "lambdacoal/rates.hpp"

namespace lambdacoal {

enum class Verdict { Converges, Diverges, Inconclusive };

const char* to_string(Verdict v);

struct EvidencePoint {
    double cutoff = 0.0;  // grid cutoff (B, Q, or 1/eps)
    double partial = 0.0; // partial sum / integral up to the cutoff
};

/// Three-valued convergence verdict with the finite evidence behind it.
/// Convergence of a series or integral is not decidable from finitely many
/// terms; the verdict is an extrapolation with a pre-registered rule:
/// least squares of log10 increments against log10 cutoff over the last
/// `fit_window_decades`, Converges iff the fitted decay is summable with
/// margin, Diverges iff non-summable with margin, Inconclusive otherwise
/// or when the fit residual exceeds the threshold.
struct ConvergenceVerdict {
    Verdict verdict = Verdict::Inconclusive;
    std::vector<EvidencePoint> evidence;
    double fitted_slope = 0.0;
    double fit_residual = 0.0;
    std::string note;
};

struct FitThresholds {
    // Increments on a geometric cutoff grid are summable iff their log-log
    // slope is < 0. Values frozen from pilot runs on the standard battery
    // (pure-atom, uniform, beta, power measures and their mixtures); the
    // band between the two slopes is reported Inconclusive.
    double converge_slope = -0.20;
    double diverge_slope = -0.12;
    double max_residual = 0.05; // RMS in log10 units
};

struct ClassificationConfig {
    int series_b_max = 1000000;
    double psi_q_max = 1e8;
    double dust_eps_min = 1e-10;
    int grid_points_per_decade = 8;
    double fit_window_decades = 2.0;
    FitThresholds thresholds;
    QuadratureOptions quadrature;
    unsigned jobs = 1;
};

enum class CoalescentClass {
    ComesDownFromInfinity,
    DustFreeStaysInfinite,
    HasDust,
    Inconclusive,
    Inconsistent,
};

const char* to_string(CoalescentClass c);

struct ClassificationReport {
    std::string measure_spec;
    ConvergenceVerdict cdi_series;
    ConvergenceVerdict cdi_psi;
    ConvergenceVerdict dust; // verdict on the integral of 1/x: Diverges => dust-free
    CoalescentClass combined = CoalescentClass::Inconclusive;
    std::string note;
};

/// psi(q): integral of (e^{-qx} - 1 + qx) x^{-2} against the measure.
/// The atom at 0 contributes mass * q^2/2 (the integrand's limit); the
/// kernel is evaluated in a cancellation-safe form near x = 0.
double psi(const LambdaMeasure& measure, double q, const QuadratureOptions& opts = {});

/// Series criterion: partial sums of 1 / d_b up to the table's b_max on a
/// geometric grid of cutoffs. Converges <=> comes down from infinity.
ConvergenceVerdict cdi_series_test(const RateTable& table,
                                   const ClassificationConfig& cfg = {});

/// Integral criterion: partial integrals of 1/psi(q) from q = 1 on a
/// geometric grid of upper limits. The lower limit is fixed at 1; only the
/// behavior at infinity is at stake. Converges <=> comes down from infinity.
ConvergenceVerdict cdi_psi_test(const LambdaMeasure& measure,
                                const ClassificationConfig& cfg = {});

/// Dust criterion: partial integrals of 1/x against the measure down to a
/// geometric grid of lower cutoffs. Diverges => dust-free, Converges =>
/// the coalescent has dust. An atom at 0 forces Diverges immediately.
ConvergenceVerdict dust_test(const LambdaMeasure& measure,
                             const ClassificationConfig& cfg = {});

/// Runs all three tests and combines them. The two CDI criteria are
/// equivalent in theory; contradictory non-Inconclusive verdicts (or a CDI
/// verdict alongside a has-dust verdict) yield Inconsistent.
ClassificationReport classify(const LambdaMeasure& measure,
                              const ClassificationConfig& cfg = {});

} // namespace lambdacoal
