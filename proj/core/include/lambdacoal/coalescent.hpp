#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lambdacoal/measure.hpp"

namespace lambdacoal {

enum class Scheme { Gillespie, Poisson, Auto };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct SimConfig {
    int n = 2;
    std::optional<double> horizon;  // empty = run to absorption
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::Auto;
    std::optional<double> x_min;    // poisson cutoff; auto-chosen when empty
    int row_cache_cap = 4096;       // gillespie rate rows cached up to this b
    long max_poisson_points = 50000000;
};

struct MergeEvent {
    double time = 0.0;
    std::vector<int> blocks; // ids of merged blocks, ascending
    int new_block = 0;       // id of the block created
};

/// A full sample path of the n-coalescent restricted to {1..n}. Initial
/// blocks carry ids 1..n; each merger creates the next unused id. Event
/// times are strictly increasing except for flagged floating-point ties.
struct CoalescentHistory {
    int n = 0;
    std::uint64_t seed = 0;
    std::string scheme;
    std::string measure_spec;
    std::optional<double> horizon;
    std::vector<MergeEvent> events;

    // metadata
    double poisson_x_min = 0.0;         // 0 when not applicable
    double missed_merger_bound = 0.0;   // expected >=2-block mergers below the cutoff
    double kingman_component_mass = 0.0; // atom at 0 superposed as pair mergers
    bool had_time_ties = false;

    int final_block_count() const;
    bool absorbed() const { return final_block_count() == 1; }
};

/// Immutable cumulative merger-size weights, shareable across replicates
/// and threads. Row b holds partial sums of C(b,k) lambda_{b,k} over k.
class MergerWeightTable {
public:
    MergerWeightTable(const LambdaMeasure& measure, int max_b, unsigned jobs = 1);
    int max_b() const { return max_b_; }
    const std::vector<double>& cumulative_row(int b) const {
        return rows_[static_cast<std::size_t>(b) - 2];
    }

private:
    int max_b_;
    std::vector<std::vector<double>> rows_;
};

/// Exact continuous-time Markov chain simulation: with b blocks alive, wait
/// an exponential with the total merger rate, draw the merger size from the
/// C(b,k) lambda_{b,k} weights, merge a uniform k-subset. A shared weight
/// table (covering b up to cfg.n) avoids rebuilding rows per replicate.
CoalescentHistory simulate_gillespie(const LambdaMeasure& measure, const SimConfig& cfg,
                                     const MergerWeightTable* shared = nullptr);

/// Poisson-construction simulation: points (t, x) arrive with intensity
/// x^{-2} dLambda(x) dt restricted to x >= x_min; at each point every alive
/// block is marked independently with probability x and the marked blocks
/// merge when at least two are marked. An atom at 0 is superposed exactly as
/// independent pairwise mergers at its mass. Mass below the cutoff is
/// accounted by the reported missed-merger bound
///   sum over the path of C(b,2) * Lambda((0,x_min)) * dt.
CoalescentHistory simulate_poisson(const LambdaMeasure& measure, const SimConfig& cfg);

/// Dispatch on cfg.scheme. Auto picks the Poisson construction when it is
/// exact (support bounded away from 0, plus possibly an atom at 0) and the
/// Gillespie chain otherwise.
CoalescentHistory simulate(const LambdaMeasure& measure, const SimConfig& cfg,
                           const MergerWeightTable* shared = nullptr);

/// Restriction of a history to the leaves {1..m}: events whose merged
/// blocks trace to fewer than two surviving blocks collapse into the
/// continuing block. By the consistency of the coalescent family the result
/// is distributed exactly as the m-coalescent, pathwise coupled to the
/// parent: block counts and separated-set sizes are monotone in m.
CoalescentHistory restrict_history(const CoalescentHistory& history, int m);

/// Right-continuous block-count step function N(t): N(0) = n, dropping k-1
/// at each size-k merger.
struct StepFunction {
    std::vector<double> times;  // event times, ascending
    std::vector<int> values;    // value on [times[i], times[i+1])
    int initial = 0;            // value on [0, times[0])

    int at(double t) const;
};

StepFunction block_count_trajectory(const CoalescentHistory& history);

/// Frequencies |block|/n of the blocks alive at time t, ordered by each
/// block's smallest leaf. Sums to 1.
std::vector<double> block_frequencies(const CoalescentHistory& history, double t);

/// Blocks alive at time t as sorted leaf lists, ordered by smallest leaf.
std::vector<std::vector<int>> partition_at(const CoalescentHistory& history, double t);

} // namespace lambdacoal
