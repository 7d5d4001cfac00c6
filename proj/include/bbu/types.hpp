#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bbu/errors.hpp"

namespace bbu {

/// Group annotation: protected (+1), unprotected (-1), or neither (0).
enum class GroupTag : int { Unprotected = -1, Neither = 0, Protected = 1 };

constexpr int group_sign(GroupTag g) { return static_cast<int>(g); }

/// Maps {-1, 0, 1} to a tag; empty optional for anything else.
std::optional<GroupTag> try_group_tag(int value);

std::string to_string(GroupTag g);

/// One observation in an audited sample. At least one of the
/// (gold_label, prediction) pair or raw_cost must be present; ingestion
/// enforces this eagerly.
struct AnnotatedExample {
    std::string id;
    GroupTag group = GroupTag::Neither;
    std::optional<int> gold_label;   // binary {0, 1}
    std::optional<int> prediction;   // binary {0, 1}
    std::optional<double> raw_cost;  // in [0, max cost]

    bool operator==(const AnnotatedExample&) const = default;
};

enum class BoundFamily { Bernstein, Hoeffding };

std::string to_string(BoundFamily f);

/// Everything the tail bounds and the planner consume. The envelope
/// m = max_cost / gamma bounds each amortized disparity in [-m, m].
struct BoundParams {
    double max_cost = 1.0;     // C > 0
    double gamma = 0.5;        // lower bound on both group proportions, in (0, 0.5]
    double confidence = 0.95;  // rho in [0, 1)
    double variance = 0.0;     // sigma^2 of the amortized disparities, <= m^2
    std::int64_t sample_size = 1;

    double envelope() const { return max_cost / gamma; }
    double worst_case_variance() const { return envelope() * envelope(); }

    /// Checks every invariant except sample_size (the planner derives it).
    void validate_sans_n() const;
    /// Checks every invariant including sample_size >= 1.
    void validate() const;
};

/// Sample disparity together with the group tallies and the empirical
/// variance of the per-example amortized disparities.
struct DisparityEstimate {
    double delta_bar = 0.0;
    std::int64_t n_protected = 0;
    std::int64_t n_unprotected = 0;
    std::int64_t n_neither = 0;
    double empirical_variance = 0.0;

    std::int64_t total() const { return n_protected + n_unprotected + n_neither; }
};

/// Two-sided interval [center - half_width, center + half_width].
struct ConfidenceInterval {
    double center = 0.0;
    double half_width = 0.0;
    double confidence = 0.0;
    BoundFamily family = BoundFamily::Bernstein;

    double lower() const { return center - half_width; }
    double upper() const { return center + half_width; }
};

}  // namespace bbu
