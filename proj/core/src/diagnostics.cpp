#include "lambdacoal/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "lambdacoal/errors.hpp"
#include "lambdacoal/mmspace.hpp"
#include "lambdacoal/rng.hpp"
#include "lambdacoal/ultrametric.hpp"
#include "lambdacoal/util.hpp"

namespace lambdacoal {

namespace {

// Stream tags for seed splitting; each study draws an independent stream
// per replicate.
constexpr std::uint64_t kTagXi = 0x78690000;
constexpr std::uint64_t kTagThin = 0x7468696e;
constexpr std::uint64_t kTagLocal = 0x6c6f6361;

void validate_grids(const StudyConfig& cfg) {
    if (cfg.n_grid.empty() || cfg.replicates < 1)
        throw ValidationError("study needs a nonempty n_grid and replicates >= 1");
    for (std::size_t i = 1; i < cfg.n_grid.size(); ++i)
        if (cfg.n_grid[i] <= cfg.n_grid[i - 1])
            throw ValidationError("n_grid must be strictly increasing");
    for (double e : cfg.eps_grid)
        if (!(e > 0.0)) throw ValidationError("eps_grid entries must be positive");
}

struct SummarySlices {
    double median = 0.0, q1 = 0.0, q3 = 0.0;
};

SummarySlices summarize(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    SummarySlices s;
    s.median = median_of_sorted(v);
    s.q1 = quantile_of_sorted(v, 0.25);
    s.q3 = quantile_of_sorted(v, 0.75);
    return s;
}

/// One simulation at the largest n per replicate; the smaller grid levels
/// are its restrictions, so replicate r is pathwise coupled across n (the
/// pre-registered pairing behind the paired-seed growth statistics).
template <class Fn>
void run_replicates(const LambdaMeasure& measure, const StudyConfig& cfg,
                    std::uint64_t tag, Fn&& per_replicate) {
    const int n_max = cfg.n_grid.back();
    const bool gillespie_possible =
        cfg.scheme == Scheme::Gillespie ||
        (cfg.scheme == Scheme::Auto && !(measure.positive_support_infimum() > 0.0));
    MergerWeightTable table(measure, gillespie_possible ? n_max : 2, cfg.jobs);
    const MergerWeightTable* shared = gillespie_possible ? &table : nullptr;

    parallel_for(0, static_cast<std::size_t>(cfg.replicates), cfg.jobs, [&](std::size_t r) {
        SimConfig sim;
        sim.n = n_max;
        sim.scheme = cfg.scheme;
        sim.seed = split_seed(cfg.seed, tag, r);
        CoalescentHistory full = simulate(measure, sim, shared);
        std::vector<CoalescentHistory> per_n;
        per_n.reserve(cfg.n_grid.size());
        for (int n : cfg.n_grid)
            per_n.push_back(n == n_max ? std::move(full) : restrict_history(full, n));
        per_replicate(r, per_n);
    });
}

GrowthRatio make_ratio(const std::vector<double>& prev, const std::vector<double>& next,
                       int n_from, int n_to) {
    GrowthRatio g;
    g.n_from = n_from;
    g.n_to = n_to;
    std::vector<double> p = prev, q = next;
    std::sort(p.begin(), p.end());
    std::sort(q.begin(), q.end());
    const double mp = median_of_sorted(p);
    const double mq = median_of_sorted(q);
    g.median_ratio = mp > 0.0 ? mq / mp : std::numeric_limits<double>::infinity();
    int increases = 0;
    for (std::size_t r = 0; r < prev.size(); ++r)
        if (next[r] > prev[r]) ++increases;
    g.increase_fraction = static_cast<double>(increases) / static_cast<double>(prev.size());
    return g;
}

/// xi_eta of the delta-restriction rooted at leaf 0, computed exactly on
/// the tree: the restriction spans the block of leaf 0 at time delta, and
/// the separated set picks one point per eta-block inside it.
int exact_restricted_xi(const UltrametricSpace& tree, double delta, double eta,
                        bool* empty_restriction) {
    const int ball_root = tree.block_root_at(0, delta);
    if (empty_restriction) *empty_restriction = tree.leaves_below(ball_root) == 1;
    if (tree.node_height(ball_root) <= eta) return 1;
    int count = 0;
    std::vector<int> stack{ball_root};
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        if (tree.node_height(v) <= eta) {
            ++count; // eta-block root: its parent lies strictly above eta
            continue;
        }
        for (int c : tree.children(v)) stack.push_back(c);
    }
    return count;
}

} // namespace

XiScalingResult xi_scaling_study(const LambdaMeasure& measure, const StudyConfig& cfg) {
    validate_grids(cfg);
    XiScalingResult out;

    const std::size_t n_count = cfg.n_grid.size();
    const std::size_t e_count = cfg.eps_grid.size();
    // values[ni][ei][r]
    std::vector<std::vector<std::vector<double>>> values(
        n_count, std::vector<std::vector<double>>(
                     e_count, std::vector<double>(static_cast<std::size_t>(cfg.replicates))));
    std::vector<std::vector<std::vector<int>>> violations(
        n_count, std::vector<std::vector<int>>(
                     e_count, std::vector<int>(static_cast<std::size_t>(cfg.replicates), 0)));

    run_replicates(measure, cfg, kTagXi,
                   [&](std::size_t r, const std::vector<CoalescentHistory>& per_n) {
                       for (std::size_t ni = 0; ni < n_count; ++ni) {
                           const StepFunction traj = block_count_trajectory(per_n[ni]);
                           const UltrametricSpace tree = tree_from_history(per_n[ni]);
                           for (std::size_t ei = 0; ei < e_count; ++ei) {
                               const double eps = cfg.eps_grid[ei];
                               const int xi = xi_epsilon(tree, eps);
                               values[ni][ei][r] = xi;
                               if (xi > traj.at(eps)) violations[ni][ei][r] = 1;
                           }
                       }
                   });

    for (std::size_t ni = 0; ni < n_count; ++ni) {
        for (std::size_t ei = 0; ei < e_count; ++ei) {
            XiCell cell;
            cell.n = cfg.n_grid[ni];
            cell.eps = cfg.eps_grid[ei];
            const SummarySlices s = summarize(values[ni][ei]);
            cell.median = s.median;
            cell.q1 = s.q1;
            cell.q3 = s.q3;
            cell.max_value =
                static_cast<int>(*std::max_element(values[ni][ei].begin(), values[ni][ei].end()));
            cell.domination_violations =
                std::accumulate(violations[ni][ei].begin(), violations[ni][ei].end(), 0);
            out.total_domination_violations += cell.domination_violations;
            out.cells.push_back(cell);
            if (ni > 0) {
                GrowthRatio g = make_ratio(values[ni - 1][ei], values[ni][ei],
                                           cfg.n_grid[ni - 1], cfg.n_grid[ni]);
                g.eps = cfg.eps_grid[ei];
                out.ratios.push_back(g);
            }
        }
    }
    return out;
}

std::vector<ThinCell> thin_point_probe(const LambdaMeasure& measure, const StudyConfig& cfg) {
    validate_grids(cfg);
    const std::size_t n_count = cfg.n_grid.size();
    const std::size_t cells_per_n = cfg.eps_grid.size() * cfg.thin_delta_grid.size();
    std::vector<std::vector<std::vector<double>>> fractions(
        n_count, std::vector<std::vector<double>>(
                     cells_per_n, std::vector<double>(static_cast<std::size_t>(cfg.replicates))));

    run_replicates(measure, cfg, kTagThin,
                   [&](std::size_t r, const std::vector<CoalescentHistory>& per_n) {
                       for (std::size_t ni = 0; ni < n_count; ++ni) {
                           const UltrametricSpace tree = tree_from_history(per_n[ni]);
                           std::size_t ci = 0;
                           for (double eps : cfg.eps_grid)
                               for (double delta : cfg.thin_delta_grid)
                                   fractions[ni][ci++][r] = thin_mass(tree, eps, delta);
                       }
                   });

    std::vector<ThinCell> out;
    for (std::size_t ni = 0; ni < n_count; ++ni) {
        std::size_t ci = 0;
        for (double eps : cfg.eps_grid)
            for (double delta : cfg.thin_delta_grid) {
                ThinCell cell;
                cell.n = cfg.n_grid[ni];
                cell.eps = eps;
                cell.delta = delta;
                double sum = 0.0;
                for (double f : fractions[ni][ci]) sum += f;
                cell.mean_fraction = sum / cfg.replicates;
                cell.median_fraction = summarize(fractions[ni][ci]).median;
                out.push_back(cell);
                ++ci;
            }
    }
    return out;
}

LocalProbeResult local_compactness_probe(const LambdaMeasure& measure, const StudyConfig& cfg) {
    validate_grids(cfg);
    LocalProbeResult out;
    std::vector<std::pair<double, double>> pairs; // (delta, eta) with eta < delta
    for (double delta : cfg.delta_grid)
        for (double eta : cfg.eta_grid)
            if (eta < delta) pairs.emplace_back(delta, eta);
    if (pairs.empty())
        throw ValidationError("local probe has no (delta, eta) pair with eta < delta");

    const std::size_t n_count = cfg.n_grid.size();
    std::vector<std::vector<std::vector<double>>> values(
        n_count, std::vector<std::vector<double>>(
                     pairs.size(), std::vector<double>(static_cast<std::size_t>(cfg.replicates))));
    std::vector<std::vector<std::vector<int>>> empties(
        n_count, std::vector<std::vector<int>>(
                     pairs.size(), std::vector<int>(static_cast<std::size_t>(cfg.replicates), 0)));

    run_replicates(
        measure, cfg, kTagLocal,
        [&](std::size_t r, const std::vector<CoalescentHistory>& per_n) {
            for (std::size_t ni = 0; ni < n_count; ++ni) {
                const UltrametricSpace tree = tree_from_history(per_n[ni]);
                for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
                    const auto [delta, eta] = pairs[pi];
                    bool empty = false;
                    double xi;
                    if (cfg.probe_sample_size > 0) {
                        const std::uint64_t sseed =
                            split_seed(cfg.seed, kTagLocal ^ 0x5a5a ^ (ni << 8), r);
                        const DistanceMatrixSample sample = sample_distance_matrix(
                            tree, cfg.probe_sample_size, sseed, 0);
                        const DistanceMatrixSample restricted =
                            delta_restriction(sample, delta);
                        empty = restricted.m <= 1;
                        xi = empty ? 1.0
                                   : xi_epsilon_among(tree, restricted.source_points, eta);
                    } else {
                        xi = exact_restricted_xi(tree, delta, eta, &empty);
                    }
                    values[ni][pi][r] = xi;
                    empties[ni][pi][r] = empty ? 1 : 0;
                }
            }
        });

    for (std::size_t ni = 0; ni < n_count; ++ni) {
        for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
            LocalCell cell;
            cell.n = cfg.n_grid[ni];
            cell.delta = pairs[pi].first;
            cell.eta = pairs[pi].second;
            const SummarySlices s = summarize(values[ni][pi]);
            cell.median = s.median;
            cell.q1 = s.q1;
            cell.q3 = s.q3;
            cell.empty_restrictions =
                std::accumulate(empties[ni][pi].begin(), empties[ni][pi].end(), 0);
            out.cells.push_back(cell);
            if (ni > 0) {
                GrowthRatio g = make_ratio(values[ni - 1][pi], values[ni][pi],
                                           cfg.n_grid[ni - 1], cfg.n_grid[ni]);
                g.delta = pairs[pi].first;
                g.eta = pairs[pi].second;
                out.ratios.push_back(g);
            }
        }
    }
    return out;
}

namespace {

/// xi-study trend: "stable" when the final n-step median ratio clears the
/// frozen threshold for every eps; "growing" when every step's median ratio
/// exceeds 1 with the required fraction of paired replicates increasing.
std::string trend_of_xi(const std::vector<GrowthRatio>& ratios, const StudyConfig& cfg,
                        int last_n) {
    if (ratios.empty()) return "mixed";
    bool stable = true;
    bool growing = true;
    for (const GrowthRatio& g : ratios) {
        if (g.n_to == last_n && g.median_ratio > cfg.stabilization_ratio_max) stable = false;
        if (!(g.median_ratio > 1.0) || g.increase_fraction < cfg.growth_fraction_min)
            growing = false;
    }
    if (stable && !growing) return "stable";
    if (growing) return "growing";
    return "mixed";
}

/// Local-probe trend on small-integer medians: "stable" when every
/// (delta, eta) cell's final median ratio stays under the local threshold;
/// "growing" when at least half the cells grow past it with medians
/// non-decreasing along the grid. The slowest admissible cells (eta close
/// to delta) can sit flat at these n even for measures that stay infinite,
/// so growth is aggregated over cells rather than demanded of each.
std::string trend_of_local(const LocalProbeResult& local, const StudyConfig& cfg) {
    if (local.cells.empty()) return "mixed";
    // Medians per (delta, eta), in n order (cells are emitted n-major).
    std::map<std::pair<double, double>, std::vector<double>> medians;
    for (const LocalCell& c : local.cells) medians[{c.delta, c.eta}].push_back(c.median);

    std::size_t growing_cells = 0;
    bool all_stable = true;
    for (const auto& [key, ms] : medians) {
        const double last = ms.back();
        const double prev = ms.size() >= 2 ? ms[ms.size() - 2] : last;
        const double ratio =
            prev > 0.0 ? last / prev : std::numeric_limits<double>::infinity();
        bool nondecreasing = true;
        for (std::size_t i = 1; i < ms.size(); ++i)
            if (ms[i] < ms[i - 1]) nondecreasing = false;
        if (ratio > cfg.local_ratio_max) all_stable = false;
        if (nondecreasing && last > ms.front() && ratio > cfg.local_ratio_max)
            ++growing_cells;
    }
    if (all_stable) return "stable";
    if (2 * growing_cells >= medians.size()) return "growing";
    return "mixed";
}

} // namespace

CompactnessReport dichotomy_report(const LambdaMeasure& measure, const StudyConfig& cfg,
                                  const ClassificationConfig& class_cfg) {
    CompactnessReport report;
    report.measure_spec = measure.to_spec_string();
    report.config = cfg;
    report.classification = classify(measure, class_cfg);
    report.xi = xi_scaling_study(measure, cfg);
    report.thin = thin_point_probe(measure, cfg);
    report.local = local_compactness_probe(measure, cfg);

    const int last_n = cfg.n_grid.back();
    report.empirical_xi = trend_of_xi(report.xi.ratios, cfg, last_n);
    report.empirical_local = trend_of_local(report.local, cfg);

    if (report.xi.total_domination_violations > 0)
        report.warnings.push_back(
            "xi exceeded the block count N(eps) in some replicate: this is a bug");

    const CoalescentClass cls = report.classification.combined;
    switch (cls) {
        case CoalescentClass::ComesDownFromInfinity:
            if (report.empirical_xi == "stable" && report.empirical_local != "growing")
                report.verdict = "consistent-with-compact";
            else
                report.verdict =
                    "DISAGREEMENT: analytic class is comes-down-from-infinity but the "
                    "empirical statistics do not stabilize; suspect a bug";
            break;
        case CoalescentClass::DustFreeStaysInfinite:
            if (report.empirical_xi == "growing" && report.empirical_local == "growing")
                report.verdict = "consistent-with-not-locally-compact";
            else
                report.verdict =
                    "DISAGREEMENT: analytic class stays infinite but the empirical "
                    "statistics stabilize; suspect a bug";
            break;
        case CoalescentClass::HasDust:
            report.warnings.push_back(
                "has-dust: the sampling measures do not converge Gromov-weakly, so no "
                "limit tree exists; finite-n diagnostics carry no limit statement");
            report.verdict = "has-dust: finite-n diagnostics only (empirical xi trend: " +
                             report.empirical_xi + ")";
            break;
        case CoalescentClass::Inconsistent:
            report.verdict = "inconsistent analytic classification; see evidence";
            break;
        default:
            report.verdict = "inconclusive analytic classification; empirical xi trend: " +
                             report.empirical_xi;
    }
    return report;
}

} // namespace lambdacoal
