#include "lambdacoal/mmspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lambdacoal/errors.hpp"
#include "lambdacoal/rng.hpp"

namespace lambdacoal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_uncensored(const UltrametricSpace& space, bool allow_censored,
                        const char* what) {
    if (space.censored() && !allow_censored)
        throw ValidationError(std::string(what) +
                              ": space is censored at the horizon; pass "
                              "allow_censored for lower-bound semantics");
}

} // namespace

FiniteMmSpace::FiniteMmSpace(std::vector<double> distances_row_major,
                             std::vector<double> masses, bool validate)
    : masses_(std::move(masses)) {
    m_ = static_cast<int>(masses_.size());
    dist_ = std::move(distances_row_major);
    if (dist_.size() != static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_))
        throw ValidationError("distance matrix size does not match point count");
    if (m_ < 1) throw ValidationError("a finite mm-space needs at least one point");
    if (!validate) return;

    double scale = 0.0;
    for (double d : dist_) scale = std::max(scale, d);
    const double tol = 1e-9 * std::max(scale, 1.0);
    double mass_sum = 0.0;
    for (double w : masses_) {
        if (!(w >= 0.0)) throw ValidationError("point masses must be >= 0");
        mass_sum += w;
    }
    if (std::abs(mass_sum - 1.0) > 1e-9)
        throw ValidationError("point masses must sum to 1");
    for (int i = 0; i < m_; ++i) {
        if (distance(i, i) != 0.0) throw ValidationError("distance matrix diagonal must be 0");
        for (int j = 0; j < m_; ++j) {
            if (!(distance(i, j) >= 0.0)) throw ValidationError("distances must be >= 0");
            if (std::abs(distance(i, j) - distance(j, i)) > tol)
                throw ValidationError("distance matrix must be symmetric");
        }
    }
    for (int i = 0; i < m_; ++i)
        for (int j = 0; j < m_; ++j)
            for (int k = 0; k < m_; ++k)
                if (distance(i, k) > distance(i, j) + distance(j, k) + tol)
                    throw ValidationError("triangle inequality violated");
}

double FiniteMmSpace::diameter() const {
    double d = 0.0;
    for (double v : dist_) d = std::max(d, v);
    return d;
}

namespace {

template <class DistFn>
DistanceMatrixSample sample_matrix_impl(int m, std::uint64_t seed,
                                        const std::vector<double>& cumulative_mass,
                                        DistFn&& dist, const std::string& source,
                                        std::optional<int> pin_first) {
    if (m < 1) throw ValidationError("sample size must be >= 1");
    RandomStream rng(seed);
    DistanceMatrixSample s;
    s.m = m;
    s.seed = seed;
    s.source = source;
    s.source_points.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cumulative_mass.begin(), cumulative_mass.end(), u);
        int idx = static_cast<int>(it - cumulative_mass.begin());
        idx = std::min(idx, static_cast<int>(cumulative_mass.size()) - 1);
        s.source_points[static_cast<std::size_t>(i)] = idx;
    }
    if (pin_first) s.source_points[0] = *pin_first;
    s.entries.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const double d = dist(s.source_points[static_cast<std::size_t>(i)],
                                  s.source_points[static_cast<std::size_t>(j)]);
            s.entries[static_cast<std::size_t>(i) * static_cast<std::size_t>(m) +
                      static_cast<std::size_t>(j)] = d;
            s.entries[static_cast<std::size_t>(j) * static_cast<std::size_t>(m) +
                      static_cast<std::size_t>(i)] = d;
        }
    return s;
}

} // namespace

DistanceMatrixSample sample_distance_matrix(const UltrametricSpace& space, int m,
                                            std::uint64_t seed,
                                            std::optional<int> pin_first) {
    const int n = space.leaf_count();
    std::vector<double> cum(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        cum[static_cast<std::size_t>(i)] = static_cast<double>(i + 1) / n;
    return sample_matrix_impl(
        m, seed, cum, [&](int i, int j) { return space.distance(i, j); },
        "ultrametric(n=" + std::to_string(n) + ")", pin_first);
}

DistanceMatrixSample sample_distance_matrix(const FiniteMmSpace& space, int m,
                                            std::uint64_t seed,
                                            std::optional<int> pin_first) {
    std::vector<double> cum(static_cast<std::size_t>(space.size()));
    double acc = 0.0;
    for (int i = 0; i < space.size(); ++i) {
        acc += space.mass(i);
        cum[static_cast<std::size_t>(i)] = acc;
    }
    return sample_matrix_impl(
        m, seed, cum, [&](int i, int j) { return space.distance(i, j); },
        "finite(m=" + std::to_string(space.size()) + ")", pin_first);
}

double DiscreteDistribution::mass_at(double value) const {
    for (const auto& [v, w] : atoms)
        if (v == value) return w;
    return 0.0;
}

double DiscreteDistribution::total() const {
    double s = 0.0;
    for (const auto& [v, w] : atoms) s += w;
    return s;
}

DiscreteDistribution distance_distribution(const UltrametricSpace& space,
                                           bool allow_censored) {
    require_uncensored(space, allow_censored, "distance_distribution");
    const int n = space.leaf_count();
    std::map<double, double> acc;
    acc[0.0] = 1.0 / static_cast<double>(n); // i == j picks, sum of (1/n)^2
    for (int v = n; v < space.node_count(); ++v) {
        double s = 0.0, s2 = 0.0;
        for (int c : space.children(v)) {
            const double mc = space.node_mass(c);
            s += mc;
            s2 += mc * mc;
        }
        acc[space.node_height(v)] += s * s - s2;
    }
    if (space.censored()) {
        // Surviving roots sit at the censor height from each other.
        double s = 0.0, s2 = 0.0;
        for (int v = 0; v < space.node_count(); ++v) {
            if (space.parent(v) < 0) {
                const double mv = space.node_mass(v);
                s += mv;
                s2 += mv * mv;
            }
        }
        if (s2 < s * s) acc[space.censor_height()] += s * s - s2;
    }
    DiscreteDistribution out;
    for (const auto& [d, w] : acc)
        if (w > 0.0) out.atoms.emplace_back(d, w);
    return out;
}

DiscreteDistribution distance_distribution(const FiniteMmSpace& space) {
    std::map<double, double> acc;
    for (int i = 0; i < space.size(); ++i)
        for (int j = 0; j < space.size(); ++j)
            acc[space.distance(i, j)] += space.mass(i) * space.mass(j);
    DiscreteDistribution out;
    for (const auto& [d, w] : acc)
        if (w > 0.0) out.atoms.emplace_back(d, w);
    return out;
}

double ball_mass(const UltrametricSpace& space, int leaf, double eps) {
    if (eps < 0.0) throw ValidationError("ball_mass needs eps >= 0");
    if (space.censored() && eps >= space.censor_height()) return 1.0;
    return space.node_mass(space.block_root_at(leaf, eps));
}

double ball_mass(const FiniteMmSpace& space, int i, double eps) {
    if (eps < 0.0) throw ValidationError("ball_mass needs eps >= 0");
    double m = 0.0;
    for (int j = 0; j < space.size(); ++j)
        if (space.distance(i, j) <= eps) m += space.mass(j);
    return m;
}

namespace {

/// Roots of the partition at time eps: nodes with height <= eps whose parent
/// (if any) sits strictly above eps.
template <class Fn>
void for_each_block_at(const UltrametricSpace& space, double eps, Fn&& fn) {
    for (int v = 0; v < space.node_count(); ++v) {
        if (space.node_height(v) > eps) continue;
        const int p = space.parent(v);
        if (p < 0 || space.node_height(p) > eps) fn(v);
    }
}

} // namespace

double thin_mass(const UltrametricSpace& space, double eps, double delta,
                 bool allow_censored) {
    require_uncensored(space, allow_censored, "thin_mass");
    if (space.censored() && eps >= space.censor_height())
        return 1.0 <= delta ? 1.0 : 0.0;
    int count = 0;
    double sum = 0.0;
    for_each_block_at(space, eps, [&](int v) {
        const double mv = space.node_mass(v);
        if (mv <= delta) {
            ++count;
            sum += mv;
        }
    });
    return count == 0 ? 0.0 : sum;
}

double thin_mass(const FiniteMmSpace& space, double eps, double delta) {
    int count = 0;
    double sum = 0.0;
    for (int i = 0; i < space.size(); ++i) {
        if (space.mass(i) <= 0.0) continue;
        if (ball_mass(space, i, eps) <= delta) {
            ++count;
            sum += space.mass(i);
        }
    }
    return count == 0 ? 0.0 : sum;
}

namespace {

/// Exact infimum scan shared by both space types. Interval i is
/// [edges[i], edges[i+1]) (the last extends to infinity) and carries the
/// constant thin mass values[i]; zero[i] says the thin set is exactly empty.
Moduli moduli_from_intervals(const std::vector<double>& edges,
                             const std::vector<double>& values,
                             const std::vector<bool>& zero) {
    Moduli out{kInf, kInf};
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double lo = edges[i];
        const double hi = (i + 1 < edges.size()) ? edges[i + 1] : kInf;
        if (out.v == kInf) {
            if (values[i] <= lo)
                out.v = lo;
            else if (values[i] < hi)
                out.v = values[i];
        }
        if (out.v_tilde == kInf && zero[i]) out.v_tilde = lo;
    }
    return out;
}

} // namespace

Moduli moduli_of_mass(const UltrametricSpace& space, double delta, bool allow_censored) {
    require_uncensored(space, allow_censored, "moduli_of_mass");
    const int n = space.leaf_count();

    // Sweep merge events in height order, maintaining the thin mass.
    int thin_count = 0;
    double thin_sum = 0.0;
    const double leaf_mass = 1.0 / static_cast<double>(n);
    if (leaf_mass <= delta) {
        thin_count = n;
        thin_sum = 1.0;
    }

    std::vector<double> edges{0.0};
    std::vector<double> values;
    std::vector<bool> zero;
    auto close_interval = [&](double next_edge) {
        values.push_back(thin_count == 0 ? 0.0 : thin_sum);
        zero.push_back(thin_count == 0);
        edges.push_back(next_edge);
    };

    int v = n;
    const int total = space.node_count();
    while (v < total) {
        const double h = space.node_height(v);
        close_interval(h);
        while (v < total && space.node_height(v) == h) {
            for (int c : space.children(v)) {
                const double mc = space.node_mass(c);
                if (mc <= delta) {
                    --thin_count;
                    thin_sum -= mc;
                }
            }
            const double mv = space.node_mass(v);
            if (mv <= delta) {
                ++thin_count;
                thin_sum += mv;
            }
            ++v;
        }
    }
    if (space.censored()) {
        close_interval(space.censor_height());
        thin_count = (1.0 <= delta) ? 1 : 0;
        thin_sum = (1.0 <= delta) ? 1.0 : 0.0;
    }
    // last interval extends to infinity
    values.push_back(thin_count == 0 ? 0.0 : thin_sum);
    zero.push_back(thin_count == 0);

    return moduli_from_intervals(edges, values, zero);
}

Moduli moduli_of_mass(const FiniteMmSpace& space, double delta) {
    std::vector<double> edges{0.0};
    for (int i = 0; i < space.size(); ++i)
        for (int j = i + 1; j < space.size(); ++j)
            if (space.distance(i, j) > 0.0) edges.push_back(space.distance(i, j));
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<double> values;
    std::vector<bool> zero;
    values.reserve(edges.size());
    for (double eps : edges) {
        int count = 0;
        double sum = 0.0;
        for (int i = 0; i < space.size(); ++i) {
            if (space.mass(i) <= 0.0) continue;
            if (ball_mass(space, i, eps) <= delta) {
                ++count;
                sum += space.mass(i);
            }
        }
        values.push_back(count == 0 ? 0.0 : sum);
        zero.push_back(count == 0);
    }
    return moduli_from_intervals(edges, values, zero);
}

double v_delta(const UltrametricSpace& space, double delta, bool allow_censored) {
    return moduli_of_mass(space, delta, allow_censored).v;
}
double v_delta(const FiniteMmSpace& space, double delta) {
    return moduli_of_mass(space, delta).v;
}
double v_tilde_delta(const UltrametricSpace& space, double delta, bool allow_censored) {
    return moduli_of_mass(space, delta, allow_censored).v_tilde;
}
double v_tilde_delta(const FiniteMmSpace& space, double delta) {
    return moduli_of_mass(space, delta).v_tilde;
}

int xi_epsilon(const UltrametricSpace& space, double eps, bool allow_censored) {
    if (!(eps > 0.0)) throw ValidationError("xi_epsilon needs eps > 0");
    require_uncensored(space, allow_censored, "xi_epsilon");
    if (space.censored() && eps >= space.censor_height()) return 1;
    int blocks = 0;
    for_each_block_at(space, eps, [&](int) { ++blocks; });
    return blocks;
}

int xi_epsilon_among(const UltrametricSpace& space, const std::vector<int>& leaves,
                     double eps) {
    if (!(eps > 0.0)) throw ValidationError("xi_epsilon needs eps > 0");
    std::vector<int> roots;
    roots.reserve(leaves.size());
    for (int leaf : leaves) roots.push_back(space.block_root_at(leaf, eps));
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return static_cast<int>(roots.size());
}

namespace {

/// Branch-and-bound maximum clique on up to 64 vertices with a greedy
/// coloring bound. Returns false when the node budget is exhausted.
class MaxCliqueSearch {
public:
    MaxCliqueSearch(const std::vector<std::uint64_t>& adj, long budget)
        : adj_(adj), budget_(budget) {}

    bool run(int& best) {
        std::vector<int> all(adj_.size());
        for (std::size_t i = 0; i < adj_.size(); ++i) all[i] = static_cast<int>(i);
        best_ = std::max(best, 1);
        const bool complete = expand(all, 0);
        best = best_;
        return complete;
    }

private:
    bool expand(std::vector<int> cand, int depth) {
        if (cand.empty()) {
            best_ = std::max(best_, depth);
            return true;
        }
        if (--budget_ < 0) return false;

        // Greedy coloring bound: vertices of one color class are pairwise
        // non-adjacent, so a clique picks at most one per class.
        std::vector<int> color(cand.size(), 0);
        std::vector<std::uint64_t> class_mask;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            const int v = cand[i];
            std::size_t c = 0;
            while (c < class_mask.size() && (class_mask[c] & adj_[static_cast<std::size_t>(v)]))
                ++c;
            if (c == class_mask.size()) class_mask.push_back(0);
            class_mask[c] |= (std::uint64_t{1} << v);
            color[i] = static_cast<int>(c) + 1;
        }
        // Process candidates in color order, highest first.
        std::vector<std::size_t> order(cand.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return color[a] < color[b]; });

        bool complete = true;
        for (std::size_t oi = order.size(); oi-- > 0;) {
            const std::size_t i = order[oi];
            if (depth + color[i] <= best_) break; // bound: cannot beat best
            const int v = cand[i];
            std::vector<int> next;
            next.reserve(cand.size());
            for (std::size_t j = 0; j < oi; ++j) {
                const int u = cand[order[j]];
                if (adj_[static_cast<std::size_t>(v)] & (std::uint64_t{1} << u))
                    next.push_back(u);
            }
            if (!expand(std::move(next), depth + 1)) complete = false;
        }
        return complete;
    }

    const std::vector<std::uint64_t>& adj_;
    long budget_;
    int best_ = 1;
};

XiResult xi_bb(const std::vector<std::vector<bool>>& separated, long budget) {
    const int m = static_cast<int>(separated.size());
    XiResult res;
    if (m == 0) {
        res.lower = res.upper = 0;
        return res;
    }
    // Greedy separated set: a certified lower bound.
    std::vector<int> greedy;
    for (int i = 0; i < m; ++i) {
        bool ok = true;
        for (int g : greedy)
            if (!separated[static_cast<std::size_t>(i)][static_cast<std::size_t>(g)]) {
                ok = false;
                break;
            }
        if (ok) greedy.push_back(i);
    }
    // Greedy coloring of the separation graph: an upper bound.
    std::vector<int> color(static_cast<std::size_t>(m), -1);
    int classes = 0;
    for (int i = 0; i < m; ++i) {
        std::vector<bool> used(static_cast<std::size_t>(classes) + 1, false);
        for (int j = 0; j < i; ++j)
            if (separated[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
                color[static_cast<std::size_t>(j)] >= 0)
                used[static_cast<std::size_t>(color[static_cast<std::size_t>(j)])] = true;
        int c = 0;
        while (c < classes && used[static_cast<std::size_t>(c)]) ++c;
        if (c == classes) ++classes;
        color[static_cast<std::size_t>(i)] = c;
    }
    res.lower = static_cast<int>(greedy.size());
    res.upper = classes;
    res.exact = res.lower == res.upper;
    if (res.exact || m > 64) return res;

    std::vector<std::uint64_t> adj(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i != j && separated[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                adj[static_cast<std::size_t>(i)] |= (std::uint64_t{1} << j);
    MaxCliqueSearch search(adj, budget);
    int best = res.lower;
    if (search.run(best)) {
        res.lower = res.upper = std::max(best, res.lower);
        res.exact = true;
    } else {
        res.lower = std::max(res.lower, best);
        res.exact = false;
    }
    return res;
}

} // namespace

XiResult xi_epsilon(const FiniteMmSpace& space, double eps, long node_budget) {
    if (!(eps > 0.0)) throw ValidationError("xi_epsilon needs eps > 0");
    std::vector<int> pts;
    for (int i = 0; i < space.size(); ++i)
        if (space.mass(i) > 0.0) pts.push_back(i);
    const int m = static_cast<int>(pts.size());
    std::vector<std::vector<bool>> sep(static_cast<std::size_t>(m),
                                       std::vector<bool>(static_cast<std::size_t>(m), false));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            sep[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                i != j && space.distance(pts[static_cast<std::size_t>(i)],
                                         pts[static_cast<std::size_t>(j)]) > eps;
    return xi_bb(sep, node_budget);
}

XiResult xi_epsilon(const DistanceMatrixSample& sample, double eps, long node_budget) {
    if (!(eps > 0.0)) throw ValidationError("xi_epsilon needs eps > 0");
    const int m = sample.m;
    std::vector<std::vector<bool>> sep(static_cast<std::size_t>(m),
                                       std::vector<bool>(static_cast<std::size_t>(m), false));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            sep[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                i != j && sample.distance(i, j) > eps;
    return xi_bb(sep, node_budget);
}

DistanceMatrixSample delta_restriction(const DistanceMatrixSample& sample, double delta) {
    if (!(delta > 0.0)) throw ValidationError("delta_restriction needs delta > 0");
    std::vector<int> keep{0};
    for (int j = 1; j < sample.m; ++j)
        if (sample.distance(0, j) <= delta) keep.push_back(j);

    DistanceMatrixSample out;
    out.m = static_cast<int>(keep.size());
    out.seed = sample.seed;
    out.source = sample.source + "|delta-restricted";
    out.entries.assign(static_cast<std::size_t>(out.m) * static_cast<std::size_t>(out.m), 0.0);
    out.source_points.resize(static_cast<std::size_t>(out.m));
    for (int i = 0; i < out.m; ++i) {
        out.source_points[static_cast<std::size_t>(i)] =
            sample.source_points.empty()
                ? keep[static_cast<std::size_t>(i)]
                : sample.source_points[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])];
        for (int j = 0; j < out.m; ++j)
            out.entries[static_cast<std::size_t>(i) * static_cast<std::size_t>(out.m) +
                        static_cast<std::size_t>(j)] =
                sample.distance(keep[static_cast<std::size_t>(i)],
                                keep[static_cast<std::size_t>(j)]);
    }
    return out;
}

} // namespace lambdacoal
