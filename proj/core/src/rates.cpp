#include "lambdacoal/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lambdacoal/errors.hpp"
#include "lambdacoal/special.hpp"
#include "lambdacoal/util.hpp"

namespace lambdacoal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log lambda_{b,k} of an atom component, k = 2..b into out[k-2].
void atom_log_lambda_row(const Atom& a, int b, std::vector<double>& out) {
    if (a.location == 0.0) {
        std::fill(out.begin(), out.end(), kNegInf);
        out[0] = std::log(a.mass);
        return;
    }
    const double lx = std::log(a.location);
    const double l1x = std::log1p(-a.location);
    double cur = std::log(a.mass) + (b - 2) * l1x; // k = 2
    const double step = lx - l1x;
    for (int k = 2; k <= b; ++k) {
        out[k - 2] = cur;
        cur += step;
    }
}

/// log lambda row of a beta(p,q) density: w * B(k-2+p, b-k+q) / B(p,q).
void beta_log_lambda_row(double w, double p, double q, int b, std::vector<double>& out) {
    double cur = std::log(w) + log_beta(p, b - 2 + q) - log_beta(p, q); // k = 2
    for (int k = 2; k <= b; ++k) {
        out[k - 2] = cur;
        if (k < b) cur += std::log((k - 2 + p) / (b - k - 1 + q));
    }
}

/// log lambda row of the power density (g+1) x^g: w (g+1) B(k-1+g, b-k+1).
void power_log_lambda_row(double w, double g, int b, std::vector<double>& out) {
    double cur = std::log(w) + std::log(g + 1.0) + log_beta(1.0 + g, b - 1.0); // k = 2
    for (int k = 2; k <= b; ++k) {
        out[k - 2] = cur;
        if (k < b) cur += std::log((k - 1 + g) / static_cast<double>(b - k));
    }
}

/// Binomial(b-1, x) pmf over j = 0..b-1, via a log-space recurrence.
/// Underflowed entries come out as exact zeros, which is fine: they only
/// ever reduce already-negligible tail differences.
void binomial_pmf(int b, double x, std::vector<double>& pmf) {
    pmf.assign(static_cast<std::size_t>(b), 0.0);
    const int n = b - 1;
    if (x <= 0.0) { pmf[0] = 1.0; return; }
    if (x >= 1.0) { pmf[static_cast<std::size_t>(n)] = 1.0; return; }
    const double lx = std::log(x);
    const double l1x = std::log1p(-x);
    double lcur = n * l1x;
    for (int j = 0; j <= n; ++j) {
        pmf[static_cast<std::size_t>(j)] = std::exp(lcur);
        if (j < n) lcur += std::log((n - j) / (j + 1.0)) + lx - l1x;
    }
}

/// log lambda row of a uniform density on [lo, hi]:
///   lambda_{b,k} = w/(hi-lo) * B(k-1, b-k+1) *
///                  [P(Bin(b-1,hi) >= k-1) - P(Bin(b-1,lo) >= k-1)]
/// The bracket is the incomplete-beta difference written as binomial tails;
/// both tails are partial sums of positive pmf terms, so the whole row is
/// computed without the alternating-sum instability of a direct expansion.
void uniform_log_lambda_row(double w, double lo, double hi, int b, std::vector<double>& out) {
    static thread_local std::vector<double> pmf_lo, pmf_hi, upper_lo, upper_hi, lower_lo, lower_hi;
    binomial_pmf(b, lo, pmf_lo);
    binomial_pmf(b, hi, pmf_hi);

    const std::size_t nb = static_cast<std::size_t>(b);
    upper_lo.assign(nb + 1, 0.0);
    upper_hi.assign(nb + 1, 0.0);
    lower_lo.assign(nb + 1, 0.0);
    lower_hi.assign(nb + 1, 0.0);
    for (int j = b - 1; j >= 0; --j) {
        upper_lo[static_cast<std::size_t>(j)] = upper_lo[static_cast<std::size_t>(j) + 1] + pmf_lo[static_cast<std::size_t>(j)];
        upper_hi[static_cast<std::size_t>(j)] = upper_hi[static_cast<std::size_t>(j) + 1] + pmf_hi[static_cast<std::size_t>(j)];
    }
    double acc_lo = 0.0, acc_hi = 0.0;
    for (int j = 0; j < b; ++j) {
        acc_lo += pmf_lo[static_cast<std::size_t>(j)];
        acc_hi += pmf_hi[static_cast<std::size_t>(j)];
        lower_lo[static_cast<std::size_t>(j)] = acc_lo;
        lower_hi[static_cast<std::size_t>(j)] = acc_hi;
    }

    const double base = std::log(w / (hi - lo));
    double lbeta = -std::log(b - 1.0); // log B(1, b-1), k = 2
    for (int k = 2; k <= b; ++k) {
        // tail difference; pick the form whose operands are smaller
        const double t_hi = upper_hi[static_cast<std::size_t>(k - 1)];
        const double t_lo = upper_lo[static_cast<std::size_t>(k - 1)];
        double diff;
        if (t_hi < 0.5) {
            diff = t_hi - t_lo;
        } else {
            const double l_lo = (k >= 2) ? lower_lo[static_cast<std::size_t>(k - 2)] : 0.0;
            const double l_hi = (k >= 2) ? lower_hi[static_cast<std::size_t>(k - 2)] : 0.0;
            diff = l_lo - l_hi;
        }
        diff = std::max(diff, 0.0);
        out[k - 2] = (diff > 0.0) ? base + lbeta + std::log(diff) : kNegInf;
        if (k < b) lbeta += std::log((k - 1.0) / (b - k));
    }
}

void component_log_lambda_row(const Density& d, int b, std::vector<double>& out) {
    if (const auto* u = std::get_if<UniformDensity>(&d.kind))
        uniform_log_lambda_row(d.weight, u->lo, u->hi, b, out);
    else if (const auto* bd = std::get_if<BetaDensity>(&d.kind))
        beta_log_lambda_row(d.weight, bd->p, bd->q, b, out);
    else
        power_log_lambda_row(d.weight, std::get<PowerDensity>(d.kind).exponent, b, out);
}

struct RateRows {
    std::vector<double> lambda; // lambda_{b,k}, k = 2..b
    std::vector<double> weight; // C(b,k) lambda_{b,k}
};

RateRows compute_rate_rows(const LambdaMeasure& measure, int b, bool want_weights) {
    if (b < 2) throw ValidationError("rate rows need b >= 2");
    const std::size_t len = static_cast<std::size_t>(b) - 1;
    RateRows rows;
    rows.lambda.assign(len, 0.0);
    if (want_weights) rows.weight.assign(len, 0.0);

    // log C(b,k) along the row
    std::vector<double> log_binom(len);
    double lc = std::log(0.5 * b * (b - 1.0));
    for (int k = 2; k <= b; ++k) {
        log_binom[static_cast<std::size_t>(k) - 2] = lc;
        if (k < b) lc += std::log((b - k) / (k + 1.0));
    }

    std::vector<double> comp(len);
    auto accumulate = [&](const std::vector<double>& logl) {
        for (std::size_t i = 0; i < len; ++i) {
            if (logl[i] == kNegInf) continue;
            rows.lambda[i] += std::exp(logl[i]);
            if (want_weights) rows.weight[i] += std::exp(logl[i] + log_binom[i]);
        }
    };
    for (const Atom& a : measure.atoms()) {
        atom_log_lambda_row(a, b, comp);
        accumulate(comp);
    }
    for (const Density& d : measure.densities()) {
        component_log_lambda_row(d, b, comp);
        accumulate(comp);
    }
    return rows;
}

/// Streaming moments M_j = integral of (1-x)^j against one component,
/// advanced by an O(1) recurrence.
struct MomentStream {
    enum Kind { AtomK, BetaK, PowerK, UniformK } kind;
    double cur = 0.0;   // M_j for atom/beta/power
    double ratio = 0.0; // atom: (1-x0)
    double p = 0.0, q = 0.0;
    double w = 0.0, inv_span = 0.0, ra = 0.0, rc = 0.0, pow_a = 0.0, pow_c = 0.0;
    long j = 0;

    static MomentStream for_atom(const Atom& a) {
        MomentStream s;
        s.kind = AtomK;
        s.cur = a.mass;
        s.ratio = 1.0 - a.location;
        return s;
    }
    static MomentStream for_density(const Density& d) {
        MomentStream s;
        if (const auto* u = std::get_if<UniformDensity>(&d.kind)) {
            s.kind = UniformK;
            s.w = d.weight;
            s.inv_span = 1.0 / (u->hi - u->lo);
            s.ra = 1.0 - u->lo;
            s.rc = 1.0 - u->hi;
            s.pow_a = s.ra;
            s.pow_c = s.rc;
        } else if (const auto* bd = std::get_if<BetaDensity>(&d.kind)) {
            s.kind = BetaK;
            s.cur = d.weight;
            s.p = bd->p;
            s.q = bd->q;
        } else {
            s.kind = PowerK;
            s.cur = d.weight;
            s.p = std::get<PowerDensity>(d.kind).exponent;
        }
        return s;
    }

    double value() const {
        if (kind == UniformK)
            return w * inv_span * (pow_a - pow_c) / static_cast<double>(j + 1);
        return cur;
    }
    void advance() {
        switch (kind) {
            case AtomK: cur *= ratio; break;
            case BetaK: cur *= (q + static_cast<double>(j)) / (p + q + static_cast<double>(j)); break;
            case PowerK: cur *= (static_cast<double>(j) + 1.0) / (p + static_cast<double>(j) + 2.0); break;
            case UniformK: pow_a *= ra; pow_c *= rc; break;
        }
        ++j;
    }
};

} // namespace

double lambda_bk(const LambdaMeasure& measure, int b, int k) {
    if (!(2 <= k && k <= b))
        throw ValidationError("lambda_bk requires 2 <= k <= b");
    return compute_rate_rows(measure, b, false).lambda[static_cast<std::size_t>(k) - 2];
}

std::vector<double> lambda_row(const LambdaMeasure& measure, int b) {
    return std::move(compute_rate_rows(measure, b, false).lambda);
}

std::vector<double> merger_weight_row(const LambdaMeasure& measure, int b) {
    return std::move(compute_rate_rows(measure, b, true).weight);
}

RateTable::RateTable(LambdaMeasure measure, int b_max, int entry_cap, unsigned jobs)
    : measure_(std::move(measure)), b_max_(b_max), entry_cap_(entry_cap) {
    if (b_max_ < 2) throw ValidationError("rate table needs b_max >= 2");
    entry_cap_ = std::clamp(entry_cap_, 2, b_max_);

    rows_.resize(static_cast<std::size_t>(entry_cap_) - 1);
    parallel_for(2, static_cast<std::size_t>(entry_cap_) + 1, jobs, [&](std::size_t b) {
        rows_[b - 2] = lambda_row(measure_, static_cast<int>(b));
    });

    gamma_.resize(static_cast<std::size_t>(b_max_) - 1);
    d_.resize(static_cast<std::size_t>(b_max_) - 1);
    std::vector<MomentStream> streams;
    for (const Atom& a : measure_.atoms()) streams.push_back(MomentStream::for_atom(a));
    for (const Density& d : measure_.densities()) streams.push_back(MomentStream::for_density(d));

    CompensatedSum s1; // sum of M_j
    CompensatedSum s2; // sum of (j+1) M_j
    long j = -1;
    for (int b = 2; b <= b_max_; ++b) {
        while (j < b - 2) {
            ++j;
            double mj = 0.0;
            for (auto& s : streams) mj += s.value();
            for (auto& s : streams) s.advance();
            s1.add(mj);
            s2.add(static_cast<double>(j + 1) * mj);
        }
        gamma_[static_cast<std::size_t>(b) - 2] = s2.value();
        d_[static_cast<std::size_t>(b) - 2] = static_cast<double>(b) * s1.value();
    }
}

double RateTable::lambda(int b, int k) const {
    if (!(2 <= k && k <= b && b <= b_max_))
        throw ValidationError("lambda(b,k) out of table range");
    if (b <= entry_cap_)
        return rows_[static_cast<std::size_t>(b) - 2][static_cast<std::size_t>(k) - 2];
    return lambda_bk(measure_, b, k);
}

RateTable build_rate_table(const LambdaMeasure& measure, int b_max, int entry_cap, unsigned jobs) {
    if (entry_cap <= 0) entry_cap = std::min(b_max, 512);
    return RateTable(measure, b_max, entry_cap, jobs);
}

} // namespace lambdacoal
