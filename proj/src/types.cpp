#include "bbu/types.hpp"

#include <cmath>

namespace bbu {

std::optional<GroupTag> try_group_tag(int value) {
    switch (value) {
        case -1: return GroupTag::Unprotected;
        case 0: return GroupTag::Neither;
        case 1: return GroupTag::Protected;
        default: return std::nullopt;
    }
}

std::string to_string(GroupTag g) {
    switch (g) {
        case GroupTag::Protected: return "protected";
        case GroupTag::Unprotected: return "unprotected";
        case GroupTag::Neither: return "neither";
    }
    return "?";
}

std::string to_string(BoundFamily f) {
    return f == BoundFamily::Bernstein ? "bernstein" : "hoeffding";
}

void BoundParams::validate_sans_n() const {
    if (!(max_cost > 0.0) || !std::isfinite(max_cost)) {
        throw InvalidParamsError("max_cost must be positive and finite");
    }
    if (!(gamma > 0.0) || gamma > 0.5) {
        throw InvalidParamsError("gamma must lie in (0, 0.5]");
    }
    if (confidence < 0.0 || confidence >= 1.0 || !std::isfinite(confidence)) {
        throw InvalidConfidenceError("confidence must lie in [0, 1)");
    }
    if (!(variance >= 0.0) || !std::isfinite(variance)) {
        throw InvalidParamsError("variance must be nonnegative and finite");
    }
    // Amortized disparities live in [-m, m], so their variance cannot exceed m^2.
    const double cap = worst_case_variance();
    if (variance > cap * (1.0 + 1e-9)) {
        throw InvalidParamsError("variance exceeds (max_cost/gamma)^2; the gamma assumption is inconsistent with it");
    }
}

void BoundParams::validate() const {
    validate_sans_n();
    if (sample_size < 1) {
        throw InvalidParamsError("sample_size must be at least 1");
    }
}

}  // namespace bbu
