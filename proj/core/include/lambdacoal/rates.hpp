#pragma once

#include <vector>

#include "lambdacoal/measure.hpp"

namespace lambdacoal {

/// lambda_{b,k}: the rate at which a fixed set of k of b blocks merges,
/// i.e. the integral of x^{k-2} (1-x)^{b-k} against the measure. Closed
/// Beta-function forms per component, evaluated in log space. The atom at 0
/// contributes its mass when k = 2 and nothing when k > 2. O(b) per call;
/// use lambda_row / merger_weight_row for whole rows.
double lambda_bk(const LambdaMeasure& measure, int b, int k);

/// Row of lambda_{b,k} for k = 2..b (index k-2).
std::vector<double> lambda_row(const LambdaMeasure& measure, int b);

/// Row of C(b,k) * lambda_{b,k} for k = 2..b: the total rate of seeing a
/// size-k merger among b blocks. Binomials taken in log space, so entries
/// never overflow even though C(b,k) does.
std::vector<double> merger_weight_row(const LambdaMeasure& measure, int b);

/// Cached merger rates and per-block-count aggregates:
///   gamma_b = sum_k C(b,k) lambda_{b,k}        (total merger rate)
///   d_b     = sum_k k C(b,k) lambda_{b,k}      (rate of line consumption)
///
/// Aggregates are held for every b <= b_max; dense lambda entries only up
/// to entry_cap (a full triangle at large b_max would not fit in memory).
/// lambda(b,k) beyond the cap recomputes its row on demand.
///
/// Aggregates are computed from the moment sequence M_j = integral of
/// (1-x)^j against the measure, via the exact identities
///   d_b     = b * sum_{j=0}^{b-2} M_j
///   gamma_b = sum_{j=0}^{b-2} (j+1) M_j
/// which follow from expanding 1-(1-x)^b in powers of (1-x). Each component
/// advances M_j with an O(1) recurrence, so filling the aggregates is O(b_max)
/// with no cancellation (all terms positive).
class RateTable {
public:
    RateTable(LambdaMeasure measure, int b_max, int entry_cap, unsigned jobs);

    const LambdaMeasure& measure() const { return measure_; }
    int b_max() const { return b_max_; }
    int entry_cap() const { return entry_cap_; }

    double lambda(int b, int k) const;
    double gamma(int b) const { return gamma_.at(static_cast<std::size_t>(b) - 2); }
    double cdi_denominator(int b) const { return d_.at(static_cast<std::size_t>(b) - 2); }

private:
    LambdaMeasure measure_;
    int b_max_;
    int entry_cap_;
    std::vector<std::vector<double>> rows_;
    std::vector<double> gamma_;
    std::vector<double> d_;
};

RateTable build_rate_table(const LambdaMeasure& measure, int b_max,
                           int entry_cap = 0 /* 0 = min(b_max, 512) */,
                           unsigned jobs = 1);

} // namespace lambdacoal
