#include "lambdacoal/ultrametric.hpp"

#include <algorithm>
#include <unordered_map>

#include "lambdacoal/errors.hpp"

namespace lambdacoal {

UltrametricSpace UltrametricSpace::from_history(const CoalescentHistory& history) {
    UltrametricSpace tree;
    const int n = history.n;
    tree.n_ = n;
    const int total = n + static_cast<int>(history.events.size());
    tree.heights_.assign(static_cast<std::size_t>(total), 0.0);
    tree.parent_.assign(static_cast<std::size_t>(total), -1);
    tree.children_.resize(static_cast<std::size_t>(total));
    tree.leaf_counts_.assign(static_cast<std::size_t>(total), 0);

    std::unordered_map<int, int> node_of_block;
    node_of_block.reserve(static_cast<std::size_t>(total));
    for (int i = 1; i <= n; ++i) {
        node_of_block[i] = i - 1;
        tree.leaf_counts_[static_cast<std::size_t>(i) - 1] = 1;
    }

    double prev_time = 0.0;
    int next_node = n;
    for (const MergeEvent& e : history.events) {
        if (e.time < prev_time)
            throw ValidationError("history event times are not non-decreasing");
        prev_time = e.time;
        const int v = next_node++;
        tree.heights_[static_cast<std::size_t>(v)] = e.time;
        for (int id : e.blocks) {
            const auto it = node_of_block.find(id);
            if (it == node_of_block.end())
                throw ValidationError("history merges an unknown block id");
            tree.parent_[static_cast<std::size_t>(it->second)] = v;
            tree.children_[static_cast<std::size_t>(v)].push_back(it->second);
            tree.leaf_counts_[static_cast<std::size_t>(v)] +=
                tree.leaf_counts_[static_cast<std::size_t>(it->second)];
            node_of_block.erase(it);
        }
        node_of_block[e.new_block] = v;
    }

    if (node_of_block.size() > 1) {
        if (!history.horizon)
            throw ValidationError(
                "history did not reach absorption and carries no horizon; "
                "cross-root distances are undefined");
        tree.censored_ = true;
        tree.censor_height_ = *history.horizon;
    } else if (history.horizon) {
        tree.censor_height_ = *history.horizon;
    }
    return tree;
}

double UltrametricSpace::leaf_mass(int) const { return 1.0 / static_cast<double>(n_); }

double UltrametricSpace::node_mass(int node) const {
    return static_cast<double>(leaf_counts_[static_cast<std::size_t>(node)]) /
           static_cast<double>(n_);
}

double UltrametricSpace::distance(int i, int j) const {
    if (i == j) return 0.0;
    int a = i, b = j;
    while (a != b) {
        const double ha = heights_[static_cast<std::size_t>(a)];
        const double hb = heights_[static_cast<std::size_t>(b)];
        int& lower = (ha < hb || (ha == hb && a < b)) ? a : b;
        const int up = parent_[static_cast<std::size_t>(lower)];
        if (up < 0) return censor_height_; // distinct roots: censored pair
        lower = up;
    }
    return heights_[static_cast<std::size_t>(a)];
}

double UltrametricSpace::total_height() const {
    if (censored_) return censor_height_;
    double h = 0.0;
    for (int v = n_; v < node_count(); ++v)
        h = std::max(h, heights_[static_cast<std::size_t>(v)]);
    return h;
}

int UltrametricSpace::block_root_at(int leaf, double t) const {
    int v = leaf;
    while (true) {
        const int up = parent_[static_cast<std::size_t>(v)];
        if (up < 0 || heights_[static_cast<std::size_t>(up)] > t) return v;
        v = up;
    }
}

UltrametricSpace tree_from_history(const CoalescentHistory& history) {
    return UltrametricSpace::from_history(history);
}

} // namespace lambdacoal
