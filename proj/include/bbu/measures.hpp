#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bbu/disparity.hpp"
#include "bbu/types.hpp"

namespace bbu {

enum class MeasureKind { DemographicParity, EqualOpportunity, EqualizedOdds, CustomCost };

/// Whether the cost counts failures (default) or successes. The two framings
/// produce disparities of equal magnitude and opposite sign.
enum class CostDirection { CostIsFailure, CostIsSuccess };

struct MeasureSpec {
    MeasureKind kind = MeasureKind::CustomCost;
    CostDirection direction = CostDirection::CostIsFailure;
};

std::optional<MeasureKind> try_measure_kind(std::string_view name);  // dp | eo | eodds | custom
std::string to_string(MeasureKind kind);

/// Cost of one example under the measure, in [0, 1]:
///   demographic parity / equal opportunity -> 1 - prediction
///   equalized odds                         -> zero-one loss 1[gold != prediction]
///   custom                                 -> raw_cost
/// CostIsSuccess flips each of these to 1 - cost.
double resolve_cost(const AnnotatedExample& example, const MeasureSpec& spec);

/// Effective group annotation under the measure. Demographic parity and
/// custom costs keep the tag; equal opportunity and equalized odds multiply
/// it by the gold label, so unqualified (gold = 0) examples become neither.
GroupTag resolve_group(const AnnotatedExample& example, const MeasureSpec& spec);

/// Copy of the example with its group replaced by resolve_group.
AnnotatedExample apply_measure(AnnotatedExample example, const MeasureSpec& spec);

std::vector<AnnotatedExample> apply_measure(std::span<const AnnotatedExample> examples,
                                            const MeasureSpec& spec);

/// Cost resolver bound to a measure, for the disparity estimators.
CostFn make_cost_fn(const MeasureSpec& spec);

}  // namespace bbu
