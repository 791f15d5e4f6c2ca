#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lambdacoal/ultrametric.hpp"

namespace lambdacoal {

/// A finite metric measure space given by an explicit distance matrix and
/// point masses. Zero distances between distinct points are allowed.
class FiniteMmSpace {
public:
    FiniteMmSpace(std::vector<double> distances_row_major, std::vector<double> masses,
                  bool validate = true);

    int size() const { return m_; }
    double distance(int i, int j) const {
        return dist_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) +
                     static_cast<std::size_t>(j)];
    }
    double mass(int i) const { return masses_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& masses() const { return masses_; }
    double diameter() const;

private:
    int m_ = 0;
    std::vector<double> dist_;
    std::vector<double> masses_;
};

/// Pairwise distances of points sampled i.i.d. from a space's mass
/// distribution, with provenance for reproducibility.
struct DistanceMatrixSample {
    int m = 0;
    std::vector<double> entries; // row-major m x m
    std::vector<int> source_points;
    std::string source;
    std::uint64_t seed = 0;

    double distance(int i, int j) const {
        return entries[static_cast<std::size_t>(i) * static_cast<std::size_t>(m) +
                       static_cast<std::size_t>(j)];
    }
};

DistanceMatrixSample sample_distance_matrix(const UltrametricSpace& space, int m,
                                            std::uint64_t seed,
                                            std::optional<int> pin_first = {});
DistanceMatrixSample sample_distance_matrix(const FiniteMmSpace& space, int m,
                                            std::uint64_t seed,
                                            std::optional<int> pin_first = {});

/// Discrete distribution on distances: mass w({d}) of the distance between
/// two independent sample points (the diagonal contributes mass at 0).
struct DiscreteDistribution {
    std::vector<std::pair<double, double>> atoms; // (value, mass), ascending values
    double mass_at(double value) const;
    double total() const;
};

DiscreteDistribution distance_distribution(const UltrametricSpace& space,
                                           bool allow_censored = false);
DiscreteDistribution distance_distribution(const FiniteMmSpace& space);

/// Mass of the closed ball of radius eps around point i.
double ball_mass(const UltrametricSpace& space, int leaf, double eps);
double ball_mass(const FiniteMmSpace& space, int i, double eps);

/// mu{x : mu(B_eps(x)) <= delta} — the mass sitting on thin points.
double thin_mass(const UltrametricSpace& space, double eps, double delta,
                 bool allow_censored = false);
double thin_mass(const FiniteMmSpace& space, double eps, double delta);

/// Moduli of mass distribution:
///   v_delta       = inf{eps > 0 : thin_mass(eps, delta) <= eps}
///   v_tilde_delta = inf{eps > 0 : thin_mass(eps, delta) == 0}
/// Computed exactly: thin_mass is piecewise constant in eps, jumping only at
/// realized distances, so the infimum is attained either at an interval's
/// left endpoint or at the interval's constant value itself.
struct Moduli {
    double v = 0.0;
    double v_tilde = 0.0;
};

Moduli moduli_of_mass(const UltrametricSpace& space, double delta,
                      bool allow_censored = false);
Moduli moduli_of_mass(const FiniteMmSpace& space, double delta);

double v_delta(const UltrametricSpace& space, double delta, bool allow_censored = false);
double v_delta(const FiniteMmSpace& space, double delta);
double v_tilde_delta(const UltrametricSpace& space, double delta, bool allow_censored = false);
double v_tilde_delta(const FiniteMmSpace& space, double delta);

/// Maximal number of positive-mass points with pairwise distances strictly
/// greater than eps.
struct XiResult {
    int lower = 1;
    int upper = 1;
    bool exact = true;
    int value() const { return lower; }
};

/// Ultrametric fast path: blocks of the partition at time eps are exactly
/// the classes of "distance <= eps", so xi equals the number of
/// positive-mass blocks. Exact, O(nodes).
int xi_epsilon(const UltrametricSpace& space, double eps, bool allow_censored = false);

/// Number of distinct blocks at time eps among a subset of leaves (the xi of
/// the sub-space these leaves span).
int xi_epsilon_among(const UltrametricSpace& space, const std::vector<int>& leaves,
                     double eps);

/// General finite spaces: exact branch-and-bound over positive-mass points
/// (maximum clique of the "distance > eps" graph) with a greedy-coloring
/// bound. If the node budget runs out the result carries certified bounds
/// with exact = false.
XiResult xi_epsilon(const FiniteMmSpace& space, double eps, long node_budget = 1000000);

/// A sampled matrix as a uniform-mass finite space (duplicate sample slots
/// sit at distance 0 and cannot both enter a separated set).
XiResult xi_epsilon(const DistanceMatrixSample& sample, double eps,
                    long node_budget = 1000000);

/// Keep index 0 and exactly the j with r_{0j} <= delta, in order; the
/// induced sub-matrix (only index 0 when no j qualifies).
DistanceMatrixSample delta_restriction(const DistanceMatrixSample& sample, double delta);

} // namespace lambdacoal
