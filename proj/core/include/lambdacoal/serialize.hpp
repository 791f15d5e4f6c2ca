#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "lambdacoal/classification.hpp"
#include "lambdacoal/coalescent.hpp"
#include "lambdacoal/diagnostics.hpp"
#include "lambdacoal/mmspace.hpp"

namespace lambdacoal {

/// JSON serializations. Deterministic: object keys are sorted and floats
/// print in shortest round-trip form, so identical inputs give identical
/// bytes.
std::string to_json(const ClassificationReport& report);
std::string to_json(const CoalescentHistory& history);
std::string to_json(const CompactnessReport& report);

CoalescentHistory history_from_json(const std::string& text);

/// Human-readable key/value report with the evidence arrays inlined.
std::string classification_report_text(const ClassificationReport& report);
std::string compactness_report_text(const CompactnessReport& report);

/// Plot-ready CSV exports (one row per grid cell per statistic).
std::string xi_scaling_csv(const XiScalingResult& result);
std::string thin_csv(const std::vector<ThinCell>& cells);
std::string local_csv(const LocalProbeResult& result);

/// Geometric functionals of one tree over evaluation grids.
struct TreeAnalysis {
    int n = 0;
    bool censored = false;
    double tree_height = 0.0;
    DiscreteDistribution distances;
    std::vector<std::pair<double, int>> xi;                   // (eps, xi)
    std::vector<std::tuple<double, double, double>> moduli;   // (delta, v, v_tilde)
};

TreeAnalysis analyze_tree(const UltrametricSpace& tree, const std::vector<double>& eps_grid,
                          const std::vector<double>& delta_grid, bool allow_censored = false);

std::string to_json(const TreeAnalysis& analysis);
std::string distance_distribution_csv(const DiscreteDistribution& d);
std::string xi_grid_csv(const std::vector<std::pair<double, int>>& xi);
std::string moduli_csv(const std::vector<std::tuple<double, double, double>>& moduli);
std::string matrix_csv(const DistanceMatrixSample& sample);

} // namespace lambdacoal
