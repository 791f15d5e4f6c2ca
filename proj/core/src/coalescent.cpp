#include "lambdacoal/coalescent.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "lambdacoal/errors.hpp"
#include "lambdacoal/quadrature.hpp"
#include "lambdacoal/rates.hpp"
#include "lambdacoal/rng.hpp"
#include "lambdacoal/util.hpp"

namespace lambdacoal {

const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::Gillespie: return "gillespie";
        case Scheme::Poisson: return "poisson";
        default: return "auto";
    }
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "gillespie") return Scheme::Gillespie;
    if (s == "poisson") return Scheme::Poisson;
    if (s == "auto") return Scheme::Auto;
    throw ParseError("unknown scheme '" + s + "'");
}

int CoalescentHistory::final_block_count() const {
    int blocks = n;
    for (const MergeEvent& e : events) blocks -= static_cast<int>(e.blocks.size()) - 1;
    return blocks;
}

namespace {

void validate_config(const SimConfig& cfg) {
    if (cfg.n < 1) throw ValidationError("simulation needs n >= 1");
    if (cfg.horizon && !(*cfg.horizon > 0.0))
        throw ValidationError("horizon must be positive");
    if (cfg.x_min && !(*cfg.x_min > 0.0 && *cfg.x_min < 1.0))
        throw ValidationError("x_min must lie in (0,1)");
}

/// Draw k distinct positions from alive[] by a partial Fisher-Yates pass;
/// the chosen blocks end up in alive[0..k).
void choose_blocks(std::vector<int>& alive, int k, RandomStream& rng) {
    const int b = static_cast<int>(alive.size());
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(b - i)));
        std::swap(alive[static_cast<std::size_t>(i)], alive[static_cast<std::size_t>(j)]);
    }
}

void record_merge(CoalescentHistory& hist, std::vector<int>& alive, int k, double t,
                  int& next_id) {
    MergeEvent ev;
    ev.time = t;
    ev.blocks.assign(alive.begin(), alive.begin() + k);
    std::sort(ev.blocks.begin(), ev.blocks.end());
    ev.new_block = next_id++;
    if (!hist.events.empty() && hist.events.back().time == t) hist.had_time_ties = true;
    hist.events.push_back(std::move(ev));
    alive.erase(alive.begin(), alive.begin() + k);
    alive.push_back(hist.events.back().new_block);
}

} // namespace

MergerWeightTable::MergerWeightTable(const LambdaMeasure& measure, int max_b, unsigned jobs)
    : max_b_(std::max(max_b, 2)) {
    rows_.resize(static_cast<std::size_t>(max_b_) - 1);
    parallel_for(2, static_cast<std::size_t>(max_b_) + 1, jobs, [&](std::size_t b) {
        std::vector<double> row = merger_weight_row(measure, static_cast<int>(b));
        for (std::size_t i = 1; i < row.size(); ++i) row[i] += row[i - 1];
        rows_[b - 2] = std::move(row);
    });
}

CoalescentHistory simulate_gillespie(const LambdaMeasure& measure, const SimConfig& cfg,
                                     const MergerWeightTable* shared) {
    validate_config(cfg);
    RandomStream rng(cfg.seed);

    CoalescentHistory hist;
    hist.n = cfg.n;
    hist.seed = cfg.seed;
    hist.scheme = "gillespie";
    hist.measure_spec = measure.to_spec_string();
    hist.horizon = cfg.horizon;

    // Cumulative merger-size weights per block count, cached up to the cap.
    const int cache_cap = std::min(cfg.n, cfg.row_cache_cap);
    std::vector<std::vector<double>> cum_rows(
        static_cast<std::size_t>(std::max(0, cache_cap - 1)));
    auto cumulative_row = [&](int b) -> const std::vector<double>& {
        if (shared && b <= shared->max_b()) return shared->cumulative_row(b);
        static thread_local std::vector<double> scratch;
        std::vector<double>* row = nullptr;
        if (b <= cache_cap) {
            row = &cum_rows[static_cast<std::size_t>(b) - 2];
            if (!row->empty()) return *row;
        } else {
            row = &scratch;
        }
        *row = merger_weight_row(measure, b);
        for (std::size_t i = 1; i < row->size(); ++i) (*row)[i] += (*row)[i - 1];
        return *row;
    };

    std::vector<int> alive(static_cast<std::size_t>(cfg.n));
    std::iota(alive.begin(), alive.end(), 1);
    int next_id = cfg.n + 1;
    double t = 0.0;

    while (alive.size() >= 2) {
        const int b = static_cast<int>(alive.size());
        const std::vector<double>& cum = cumulative_row(b);
        const double gamma_b = cum.back();
        if (!(gamma_b > 0.0))
            throw NumericError("total merger rate is zero with " + std::to_string(b) + " blocks");
        t += rng.exponential(gamma_b);
        if (cfg.horizon && t > *cfg.horizon) break;
        const double u = rng.uniform() * gamma_b;
        const int k = 2 + static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
        const int k_clamped = std::min(k, b);
        choose_blocks(alive, k_clamped, rng);
        record_merge(hist, alive, k_clamped, t, next_id);
    }
    return hist;
}

namespace {

/// Sampler for x with density proportional to x^{-2} dLambda(x) on [x_min, 1].
struct ComponentSampler {
    enum Kind { AtomX, UniformX, PowerX, BetaX } kind;
    double rate = 0.0;
    double a = 0.0, b = 0.0;      // parameters / clipped support
    double p = 0.0, q = 0.0;      // beta shapes
    double split = 0.0;           // beta: envelope split point
    double k1 = 0.0, k2 = 0.0;    // beta: envelope constants
    double wA = 0.0, wB = 0.0;    // beta: envelope piece masses

    double sample(RandomStream& rng) const;
};

double power_law_inverse(double lo, double hi, double exponent, double u) {
    // Inverse CDF of x^exponent on [lo, hi].
    const double e1 = exponent + 1.0;
    if (std::abs(e1) < 1e-12) {
        return lo * std::pow(hi / lo, u);
    }
    const double plo = std::pow(lo, e1);
    const double phi = std::pow(hi, e1);
    return std::pow(plo + u * (phi - plo), 1.0 / e1);
}

double ComponentSampler::sample(RandomStream& rng) const {
    switch (kind) {
        case AtomX:
            return a;
        case UniformX: {
            // density 1/x^2 on [a, b]; inverse CDF in closed form
            const double u = rng.uniform();
            return 1.0 / (1.0 / a - u * (1.0 / a - 1.0 / b));
        }
        case PowerX:
            return power_law_inverse(a, b, p - 2.0, rng.uniform());
        case BetaX: {
            // Two-piece power-law envelope rejection for x^{p-3}(1-x)^{q-1}.
            for (int iter = 0; iter < 100000; ++iter) {
                double x;
                double envelope;
                if (rng.uniform() * (wA + wB) < wA) {
                    x = power_law_inverse(a, split, p - 3.0, rng.uniform());
                    envelope = k1 * std::pow(x, p - 3.0);
                } else {
                    const double y = (1.0 - split) * std::pow(rng.uniform(), 1.0 / q);
                    x = 1.0 - y;
                    envelope = k2 * std::pow(y, q - 1.0);
                }
                x = std::min(x, 0.9999999999999999);
                const double target =
                    std::pow(x, p - 3.0) * std::pow(1.0 - x, q - 1.0);
                if (rng.uniform() * envelope <= target) return x;
            }
            throw NumericError("beta component rejection sampler failed to accept");
        }
    }
    throw NumericError("unreachable sampler kind");
}

std::vector<ComponentSampler> build_samplers(const LambdaMeasure& measure, double x_min,
                                             const QuadratureOptions& quad) {
    std::vector<ComponentSampler> out;
    for (const Atom& at : measure.atoms()) {
        if (at.location == 0.0 || at.location < x_min) continue;
        ComponentSampler s;
        s.kind = ComponentSampler::AtomX;
        s.a = at.location;
        s.rate = at.mass / (at.location * at.location);
        out.push_back(s);
    }
    for (const Density& d : measure.densities()) {
        ComponentSampler s;
        if (const auto* u = std::get_if<UniformDensity>(&d.kind)) {
            const double lo = std::max(u->lo, x_min);
            if (lo >= u->hi) continue;
            s.kind = ComponentSampler::UniformX;
            s.a = lo;
            s.b = u->hi;
            s.rate = d.weight / (u->hi - u->lo) * (1.0 / lo - 1.0 / u->hi);
        } else if (const auto* bd = std::get_if<BetaDensity>(&d.kind)) {
            s.kind = ComponentSampler::BetaX;
            s.a = x_min;
            s.b = 1.0;
            s.p = bd->p;
            s.q = bd->q;
            s.split = std::max(0.5, x_min);
            // max of (1-x)^{q-1} on [a, split] and of x^{p-3} on [split, 1]
            s.k1 = (bd->q >= 1.0) ? std::pow(1.0 - s.a, bd->q - 1.0)
                                  : std::pow(1.0 - s.split, bd->q - 1.0);
            s.k2 = (bd->p >= 3.0) ? 1.0 : std::pow(s.split, bd->p - 3.0);
            if (s.split > s.a) {
                const double e1 = bd->p - 2.0;
                s.wA = (std::abs(e1) < 1e-12)
                           ? s.k1 * std::log(s.split / s.a)
                           : s.k1 * (std::pow(s.split, e1) - std::pow(s.a, e1)) / e1;
            }
            s.wB = s.k2 * std::pow(1.0 - s.split, bd->q) / bd->q;
            auto inv_sq = [](double x) { return 1.0 / (x * x); };
            s.rate = integrate_density_against(d, inv_sq, -2.0, x_min, 1.0, quad);
        } else {
            const auto& pw = std::get<PowerDensity>(d.kind);
            const double g = pw.exponent;
            s.kind = ComponentSampler::PowerX;
            s.a = x_min;
            s.b = 1.0;
            s.p = g; // exponent of the density; sampler uses p - 2
            const double e1 = g - 1.0;
            const double integral = (std::abs(e1) < 1e-12)
                                        ? -std::log(x_min)
                                        : (1.0 - std::pow(x_min, e1)) / e1;
            s.rate = d.weight * (g + 1.0) * integral;
        }
        if (s.rate > 0.0) out.push_back(s);
    }
    return out;
}

double auto_cutoff(const LambdaMeasure& measure, const SimConfig& cfg) {
    const double support_inf = measure.positive_support_infimum();
    if (support_inf > 0.0) return support_inf;

    // Choose the cutoff so the expected number of missed >=2-block mergers
    // over the run stays below 1e-3. Without a horizon, a crude absorption
    // proxy stands in for the duration.
    const double horizon = cfg.horizon ? *cfg.horizon : 4.0 / measure.total_mass();
    const double pairs = 0.5 * cfg.n * (cfg.n - 1.0);
    const double target = 1e-3 / std::max(pairs * horizon, 1e-12);

    double lo = 1e-14, hi = 0.5;
    if (measure.mass_below(hi) <= target) return hi;
    if (measure.mass_below(lo) > target)
        throw ValidationError(
            "poisson scheme infeasible: the cutoff needed for the missed-merger "
            "budget is below 1e-14; use the gillespie scheme");
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (measure.mass_below(mid) <= target)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

} // namespace

CoalescentHistory simulate_poisson(const LambdaMeasure& measure, const SimConfig& cfg) {
    validate_config(cfg);
    RandomStream rng(cfg.seed);

    const double x_min = cfg.x_min ? *cfg.x_min : auto_cutoff(measure, cfg);
    const double kingman_mass = measure.atom_mass_at_zero();
    const QuadratureOptions quad;
    const std::vector<ComponentSampler> samplers = build_samplers(measure, x_min, quad);

    double point_rate = 0.0;
    for (const auto& s : samplers) point_rate += s.rate;
    if (!(point_rate > 0.0) && !(kingman_mass > 0.0))
        throw ValidationError("no merger activity at or above the cutoff x_min");

    std::vector<double> cum_rates(samplers.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < samplers.size(); ++i) {
        acc += samplers[i].rate;
        cum_rates[i] = acc;
    }

    const double mass_below = measure.mass_below(x_min);

    CoalescentHistory hist;
    hist.n = cfg.n;
    hist.seed = cfg.seed;
    hist.scheme = "poisson";
    hist.measure_spec = measure.to_spec_string();
    hist.horizon = cfg.horizon;
    hist.poisson_x_min = x_min;
    hist.kingman_component_mass = kingman_mass;

    std::vector<int> alive(static_cast<std::size_t>(cfg.n));
    std::iota(alive.begin(), alive.end(), 1);
    int next_id = cfg.n + 1;
    double t = 0.0;
    double bound = 0.0;
    long points = 0;
    std::vector<int> marked;

    while (alive.size() >= 2) {
        const double b = static_cast<double>(alive.size());
        const double pair_rate = kingman_mass * 0.5 * b * (b - 1.0);
        const double total = point_rate + pair_rate;
        const double dt = rng.exponential(total);
        if (cfg.horizon && t + dt > *cfg.horizon) {
            bound += 0.5 * b * (b - 1.0) * mass_below * (*cfg.horizon - t);
            break;
        }
        bound += 0.5 * b * (b - 1.0) * mass_below * dt;
        t += dt;

        if (rng.uniform() * total < pair_rate) {
            choose_blocks(alive, 2, rng);
            record_merge(hist, alive, 2, t, next_id);
            continue;
        }

        if (++points > cfg.max_poisson_points)
            throw NumericError("poisson scheme exceeded the point budget; "
                               "lower the horizon or use gillespie");
        const double u = rng.uniform() * point_rate;
        const std::size_t ci = static_cast<std::size_t>(
            std::lower_bound(cum_rates.begin(), cum_rates.end(), u) - cum_rates.begin());
        const double x = samplers[std::min(ci, samplers.size() - 1)].sample(rng);

        marked.clear();
        for (std::size_t i = 0; i < alive.size(); ++i)
            if (rng.bernoulli(x)) marked.push_back(static_cast<int>(i));
        if (marked.size() < 2) continue;

        // Move the marked blocks to the front, preserving choose/record flow.
        for (std::size_t i = 0; i < marked.size(); ++i)
            std::swap(alive[i], alive[static_cast<std::size_t>(marked[i])]);
        record_merge(hist, alive, static_cast<int>(marked.size()), t, next_id);
    }
    hist.missed_merger_bound = bound;
    return hist;
}

CoalescentHistory simulate(const LambdaMeasure& measure, const SimConfig& cfg,
                           const MergerWeightTable* shared) {
    switch (cfg.scheme) {
        case Scheme::Gillespie: return simulate_gillespie(measure, cfg, shared);
        case Scheme::Poisson: return simulate_poisson(measure, cfg);
        case Scheme::Auto: break;
    }
    // The poisson construction is exact when nothing lives below a positive
    // cutoff; otherwise the gillespie chain is the exact choice.
    if (measure.positive_support_infimum() > 0.0 && !cfg.x_min)
        return simulate_poisson(measure, cfg);
    return simulate_gillespie(measure, cfg, shared);
}

CoalescentHistory restrict_history(const CoalescentHistory& history, int m) {
    if (m < 1 || m > history.n)
        throw ValidationError("restriction needs 1 <= m <= n");
    CoalescentHistory out;
    out.n = m;
    out.seed = history.seed;
    out.scheme = history.scheme;
    out.measure_spec = history.measure_spec;
    out.horizon = history.horizon;
    out.poisson_x_min = history.poisson_x_min;
    out.missed_merger_bound = history.missed_merger_bound;
    out.had_time_ties = history.had_time_ties;

    // id in the parent history -> id of its trace in the restriction
    std::map<int, int> trace;
    for (int i = 1; i <= m; ++i) trace[i] = i;
    int next_id = m + 1;
    for (const MergeEvent& e : history.events) {
        std::vector<int> present;
        for (int id : e.blocks) {
            const auto it = trace.find(id);
            if (it != trace.end()) {
                present.push_back(it->second);
                trace.erase(it);
            }
        }
        if (present.empty()) continue;
        if (present.size() == 1) {
            trace[e.new_block] = present.front();
            continue;
        }
        std::sort(present.begin(), present.end());
        MergeEvent ev;
        ev.time = e.time;
        ev.blocks = std::move(present);
        ev.new_block = next_id++;
        trace[e.new_block] = ev.new_block;
        out.events.push_back(std::move(ev));
    }
    return out;
}

int StepFunction::at(double t) const {
    if (times.empty() || t < times.front()) return initial;
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

StepFunction block_count_trajectory(const CoalescentHistory& history) {
    StepFunction f;
    f.initial = history.n;
    int blocks = history.n;
    f.times.reserve(history.events.size());
    f.values.reserve(history.events.size());
    for (const MergeEvent& e : history.events) {
        blocks -= static_cast<int>(e.blocks.size()) - 1;
        f.times.push_back(e.time);
        f.values.push_back(blocks);
    }
    return f;
}

namespace {

struct BlockState {
    int size = 0;
    int min_leaf = 0;
};

std::map<int, BlockState> replay_sizes(const CoalescentHistory& history, double t) {
    std::map<int, BlockState> blocks;
    for (int i = 1; i <= history.n; ++i) blocks[i] = {1, i};
    for (const MergeEvent& e : history.events) {
        if (e.time > t) break;
        BlockState merged;
        merged.min_leaf = history.n + 1;
        for (int id : e.blocks) {
            const auto it = blocks.find(id);
            if (it == blocks.end())
                throw ValidationError("history merges a block that is not alive");
            merged.size += it->second.size;
            merged.min_leaf = std::min(merged.min_leaf, it->second.min_leaf);
            blocks.erase(it);
        }
        blocks[e.new_block] = merged;
    }
    return blocks;
}

} // namespace

std::vector<double> block_frequencies(const CoalescentHistory& history, double t) {
    if (t < 0.0) throw ValidationError("block_frequencies needs t >= 0");
    const auto blocks = replay_sizes(history, t);
    std::vector<std::pair<int, double>> by_leaf;
    by_leaf.reserve(blocks.size());
    for (const auto& [id, st] : blocks)
        by_leaf.emplace_back(st.min_leaf, static_cast<double>(st.size) / history.n);
    std::sort(by_leaf.begin(), by_leaf.end());
    std::vector<double> out;
    out.reserve(by_leaf.size());
    for (const auto& [leaf, freq] : by_leaf) out.push_back(freq);
    return out;
}

std::vector<std::vector<int>> partition_at(const CoalescentHistory& history, double t) {
    std::map<int, std::vector<int>> blocks;
    for (int i = 1; i <= history.n; ++i) blocks[i] = {i};
    for (const MergeEvent& e : history.events) {
        if (e.time > t) break;
        std::vector<int> merged;
        for (int id : e.blocks) {
            auto it = blocks.find(id);
            if (it == blocks.end())
                throw ValidationError("history merges a block that is not alive");
            merged.insert(merged.end(), it->second.begin(), it->second.end());
            blocks.erase(it);
        }
        std::sort(merged.begin(), merged.end());
        blocks[e.new_block] = std::move(merged);
    }
    std::vector<std::vector<int>> out;
    out.reserve(blocks.size());
    for (auto& [id, leaves] : blocks) out.push_back(std::move(leaves));
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

} // namespace lambdacoal
