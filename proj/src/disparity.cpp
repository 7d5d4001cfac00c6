#include "bbu/disparity.hpp"

#include <cmath>

#include "bbu/summation.hpp"

namespace bbu {

namespace {

std::vector<double> resolve_costs(std::span<const AnnotatedExample> examples,
                                  const CostFn& cost_of,
                                  double max_cost) {
    std::vector<double> costs;
    costs.reserve(examples.size());
    for (const auto& ex : examples) {
        const double c = cost_of(ex);
        if (!(c >= 0.0) || c > max_cost || !std::isfinite(c)) {
            throw CostOutOfRangeError("example '" + ex.id + "': cost " + std::to_string(c) +
                                      " outside [0, " + std::to_string(max_cost) + "]");
        }
        costs.push_back(c);
    }
    return costs;
}

struct GroupCounts {
    std::int64_t n_protected = 0;
    std::int64_t n_unprotected = 0;
    std::int64_t n_neither = 0;
};

GroupCounts count_groups(std::span<const AnnotatedExample> examples) {
    GroupCounts counts;
    for (const auto& ex : examples) {
        switch (ex.group) {
            case GroupTag::Protected: ++counts.n_protected; break;
            case GroupTag::Unprotected: ++counts.n_unprotected; break;
            case GroupTag::Neither: ++counts.n_neither; break;
        }
    }
    return counts;
}

double variance_around_mean(std::span<const double> xs) {
    const double mean = compensated_mean(xs);
    CompensatedSum squares;
    for (double x : xs) {
        const double d = x - mean;
        squares.add(d * d);
    }
    return squares.value() / static_cast<double>(xs.size());
}

}  // namespace

GroupFrequencies empirical_frequencies(std::span<const AnnotatedExample> examples) {
    const GroupCounts counts = count_groups(examples);
    const double n = static_cast<double>(examples.size());
    if (n == 0.0) return {};
    return {static_cast<double>(counts.n_protected) / n,
            static_cast<double>(counts.n_unprotected) / n};
}

double amortized_disparity(double cost, GroupTag group, double group_frequency) {
    const int sign = group_sign(group);
    if (sign == 0) return 0.0;
    if (group_frequency == 0.0) {
        throw ZeroFrequencyError("group frequency is zero for a " + to_string(group) + " example");
    }
    if (!(group_frequency > 0.0) || group_frequency > 1.0) {
        throw InvalidParamsError("group frequency must lie in (0, 1]");
    }
    return cost * static_cast<double>(sign) / group_frequency;
}

std::vector<double> amortized_disparities(std::span<const AnnotatedExample> examples,
                                          const CostFn& cost_of,
                                          const GroupFrequencies& frequencies,
                                          double max_cost) {
    const std::vector<double> costs = resolve_costs(examples, cost_of, max_cost);
    std::vector<double> out;
    out.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const GroupTag g = examples[i].group;
        const double freq = g == GroupTag::Protected ? frequencies.protected_frequency
                                                     : frequencies.unprotected_frequency;
        out.push_back(amortized_disparity(costs[i], g, g == GroupTag::Neither ? 1.0 : freq));
    }
    return out;
}

double empirical_variance_of_amortized(std::span<const AnnotatedExample> examples,
                                       const CostFn& cost_of,
                                       const GroupFrequencies& frequencies,
                                       double max_cost) {
    const GroupCounts counts = count_groups(examples);
    if (counts.n_protected == 0 || counts.n_unprotected == 0) {
        throw EmptyGroupError("variance needs at least one protected and one unprotected example");
    }
    const auto amortized = amortized_disparities(examples, cost_of, frequencies, max_cost);
    return variance_around_mean(amortized);
}

DisparityEstimate estimate_groupwise_disparity(std::span<const AnnotatedExample> examples,
                                               const CostFn& cost_of,
                                               double max_cost) {
    const std::vector<double> costs = resolve_costs(examples, cost_of, max_cost);
    const GroupCounts counts = count_groups(examples);
    if (counts.n_protected == 0) {
        throw EmptyGroupError("sample has no protected examples; disparity is undefined");
    }
    if (counts.n_unprotected == 0) {
        throw EmptyGroupError("sample has no unprotected examples; disparity is undefined");
    }

    CompensatedSum protected_sum;
    CompensatedSum unprotected_sum;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (examples[i].group == GroupTag::Protected) {
            protected_sum.add(costs[i]);
        } else if (examples[i].group == GroupTag::Unprotected) {
            unprotected_sum.add(costs[i]);
        }
    }
    const double mean_protected = protected_sum.value() / static_cast<double>(counts.n_protected);
    const double mean_unprotected =
        unprotected_sum.value() / static_cast<double>(counts.n_unprotected);

    DisparityEstimate estimate;
    estimate.delta_bar = mean_protected - mean_unprotected;
    estimate.n_protected = counts.n_protected;
    estimate.n_unprotected = counts.n_unprotected;
    estimate.n_neither = counts.n_neither;

    const GroupFrequencies freqs = empirical_frequencies(examples);
    std::vector<double> amortized;
    amortized.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const GroupTag g = examples[i].group;
        const double freq = g == GroupTag::Protected ? freqs.protected_frequency
                                                     : freqs.unprotected_frequency;
        amortized.push_back(amortized_disparity(costs[i], g, g == GroupTag::Neither ? 1.0 : freq));
    }
    estimate.empirical_variance = variance_around_mean(amortized);
    return estimate;
}

}  // namespace bbu
