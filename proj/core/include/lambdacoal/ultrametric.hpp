#pragma once

#include <vector>

#include "lambdacoal/coalescent.hpp"

namespace lambdacoal {

/// Finite ultrametric measure tree built from a coalescent history: leaves
/// 0..n-1 at height 0 carry mass 1/n, internal nodes sit at the merge times,
/// and the distance between two leaves is the height of their lowest common
/// ancestor. When the history stopped at a horizon before absorption the
/// space is censored: distances across surviving roots are reported as the
/// horizon value and mass-geometry functionals refuse the space unless the
/// caller opts into lower-bound semantics.
class UltrametricSpace {
public:
    static UltrametricSpace from_history(const CoalescentHistory& history);

    int leaf_count() const { return n_; }
    int node_count() const { return static_cast<int>(parent_.size()); }
    int internal_count() const { return node_count() - n_; }

    bool censored() const { return censored_; }
    double censor_height() const { return censor_height_; }

    double node_height(int node) const { return heights_[static_cast<std::size_t>(node)]; }
    int parent(int node) const { return parent_[static_cast<std::size_t>(node)]; }
    const std::vector<int>& children(int node) const {
        return children_[static_cast<std::size_t>(node)];
    }
    int leaves_below(int node) const { return leaf_counts_[static_cast<std::size_t>(node)]; }

    double leaf_mass(int leaf) const;
    double node_mass(int node) const;

    /// Height of the lowest common ancestor; censor height across roots.
    double distance(int i, int j) const;

    /// Largest merge height (0 for a single leaf); censor height if censored.
    double total_height() const;

    /// Topmost ancestor of `leaf` with height <= t: the node representing
    /// the block of the partition at time t that contains the leaf.
    int block_root_at(int leaf, double t) const;

    /// Internal nodes sorted by height ascending (their construction order).
    /// Node index n_ + e corresponds to event e of the source history.
    int internal_node(int event_index) const { return n_ + event_index; }

private:
    UltrametricSpace() = default;

    int n_ = 0;
    bool censored_ = false;
    double censor_height_ = 0.0;
    std::vector<double> heights_;
    std::vector<int> parent_;
    std::vector<std::vector<int>> children_;
    std::vector<int> leaf_counts_;
};

/// Spec-facing alias for UltrametricSpace::from_history.
UltrametricSpace tree_from_history(const CoalescentHistory& history);

} // namespace lambdacoal
