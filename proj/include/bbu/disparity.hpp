#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bbu/types.hpp"

namespace bbu {

/// Resolves one example to its cost in [0, max_cost].
using CostFn = std::function<double(const AnnotatedExample&)>;

/// Per-group sample frequencies, measured against the full sample
/// (neither-tagged examples included in the denominator).
struct GroupFrequencies {
    double protected_frequency = 0.0;
    double unprotected_frequency = 0.0;
};

GroupFrequencies empirical_frequencies(std::span<const AnnotatedExample> examples);

/// Single-example disparity estimate: cost * sign / frequency, or 0 for a
/// neither-tagged example. Its mean over an enumerated sample with exact
/// frequencies reproduces the groupwise disparity.
///
/// Throws ZeroFrequencyError when the frequency is 0 for a signed group, and
/// InvalidParamsError when it lies outside (0, 1].
double amortized_disparity(double cost, GroupTag group, double group_frequency);

/// Amortized disparity of every example, in input order.
std::vector<double> amortized_disparities(std::span<const AnnotatedExample> examples,
                                          const CostFn& cost_of,
                                          const GroupFrequencies& frequencies,
                                          double max_cost = 1.0);

/// Population-style variance (divide by n) of the amortized disparities
/// around their sample mean.
double empirical_variance_of_amortized(std::span<const AnnotatedExample> examples,
                                       const CostFn& cost_of,
                                       const GroupFrequencies& frequencies,
                                       double max_cost = 1.0);

/// Sample disparity: mean cost over the protected group minus mean cost over
/// the unprotected group. Neither-tagged examples are excluded from both
/// means but counted in n_neither. The returned empirical_variance is the
/// variance of the amortized disparities under the sample's own frequencies.
///
/// Throws EmptyGroupError when either signed group has no members and
/// CostOutOfRangeError when a resolved cost leaves [0, max_cost].
DisparityEstimate estimate_groupwise_disparity(std::span<const AnnotatedExample> examples,
                                               const CostFn& cost_of,
                                               double max_cost = 1.0);

}  // namespace bbu
