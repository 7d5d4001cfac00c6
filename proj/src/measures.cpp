#include "bbu/measures.hpp"

namespace bbu {

namespace {

int require_binary(const AnnotatedExample& ex, const std::optional<int>& field,
                   const char* name) {
    if (!field.has_value()) {
        throw MissingFieldError(name, "required by the measure but absent on example '" + ex.id + "'");
    }
    if (*field != 0 && *field != 1) {
        throw InvalidParamsError(std::string(name) + " must be binary on example '" + ex.id + "'");
    }
    return *field;
}

double require_raw_cost(const AnnotatedExample& ex) {
    if (!ex.raw_cost.has_value()) {
        throw MissingFieldError("raw_cost", "custom measures need a precomputed cost on example '" + ex.id + "'");
    }
    return *ex.raw_cost;
}

}  // namespace

std::optional<MeasureKind> try_measure_kind(std::string_view name) {
    if (name == "dp") return MeasureKind::DemographicParity;
    if (name == "eo") return MeasureKind::EqualOpportunity;
    if (name == "eodds") return MeasureKind::EqualizedOdds;
    if (name == "custom") return MeasureKind::CustomCost;
    return std::nullopt;
}

std::string to_string(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::DemographicParity: return "dp";
        case MeasureKind::EqualOpportunity: return "eo";
        case MeasureKind::EqualizedOdds: return "eodds";
        case MeasureKind::CustomCost: return "custom";
    }
    return "?";
}

double resolve_cost(const AnnotatedExample& example, const MeasureSpec& spec) {
    double cost = 0.0;
    switch (spec.kind) {
        case MeasureKind::DemographicParity:
        case MeasureKind::EqualOpportunity:
            cost = 1.0 - static_cast<double>(require_binary(example, example.prediction, "prediction"));
            break;
        case MeasureKind::EqualizedOdds: {
            const int gold = require_binary(example, example.gold_label, "gold_label");
            const int pred = require_binary(example, example.prediction, "prediction");
            cost = gold != pred ? 1.0 : 0.0;
            break;
        }
        case MeasureKind::CustomCost:
            cost = require_raw_cost(example);
            break;
    }
    return spec.direction == CostDirection::CostIsFailure ? cost : 1.0 - cost;
}

GroupTag resolve_group(const AnnotatedExample& example, const MeasureSpec& spec) {
    switch (spec.kind) {
        case MeasureKind::DemographicParity:
        case MeasureKind::CustomCost:
            return example.group;
        case MeasureKind::EqualOpportunity:
        case MeasureKind::EqualizedOdds: {
            // f(x) * y(x): only qualified examples keep their group.
            const int gold = require_binary(example, example.gold_label, "gold_label");
            return gold == 1 ? example.group : GroupTag::Neither;
        }
    }
    return example.group;
}

AnnotatedExample apply_measure(AnnotatedExample example, const MeasureSpec& spec) {
    example.group = resolve_group(example, spec);
    return example;
}

std::vector<AnnotatedExample> apply_measure(std::span<const AnnotatedExample> examples,
                                            const MeasureSpec& spec) {
    std::vector<AnnotatedExample> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) out.push_back(apply_measure(ex, spec));
    return out;
}

CostFn make_cost_fn(const MeasureSpec& spec) {
    return [spec](const AnnotatedExample& ex) { return resolve_cost(ex, spec); };
}

}  // namespace bbu
