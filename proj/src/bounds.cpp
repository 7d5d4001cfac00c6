#include "bbu/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace bbu {

namespace {

// log[(1-rho)/2], negative everywhere on rho in [0, 1).
double log_half_tail(double confidence) {
    return std::log((1.0 - confidence) / 2.0);
}

double linear_coefficient(const BoundParams& params) {
    return 2.0 * params.max_cost / (3.0 * params.gamma);
}

}  // namespace

double bernstein_tail_bound_raw(const BoundParams& params, double t) {
    params.validate();
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw NonPositiveTError("deviation t must be positive");
    }
    const double n = static_cast<double>(params.sample_size);
    const double denom = 2.0 * params.variance + linear_coefficient(params) * t;
    return 2.0 * std::exp(-n * t * t / denom);
}

double bernstein_tail_bound(const BoundParams& params, double t) {
    return std::min(1.0, bernstein_tail_bound_raw(params, t));
}

double interval_half_width(const BoundParams& params) {
    params.validate();
    const double n = static_cast<double>(params.sample_size);
    const double log_tail = log_half_tail(params.confidence);
    const double b = -linear_coefficient(params) * log_tail;
    const double discriminant = b * b - 8.0 * n * params.variance * log_tail;
    return (b + std::sqrt(discriminant)) / (2.0 * n);
}

double hoeffding_half_width(const BoundParams& params) {
    params.validate();
    const double n = static_cast<double>(params.sample_size);
    return params.envelope() * std::sqrt(2.0 * -log_half_tail(params.confidence) / n);
}

std::int64_t required_sample_size(double delta_bar, const BoundParams& params) {
    params.validate_sans_n();
    if (!(delta_bar > 0.0) || !std::isfinite(delta_bar)) {
        throw NonPositiveDeltaError("delta_bar must be positive; no finite sample size certifies bias otherwise");
    }
    if (delta_bar > params.max_cost) {
        throw InvalidParamsError("delta_bar cannot exceed max_cost");
    }
    const double log_tail = log_half_tail(params.confidence);
    const double threshold =
        (2.0 * params.variance + linear_coefficient(params) * delta_bar) * -log_tail /
        (delta_bar * delta_bar);
    if (!(threshold < 9.0e18)) {
        throw InvalidParamsError("required sample size overflows a 64-bit integer");
    }
    // The bound is strict, so an exactly integral threshold still rounds up.
    return static_cast<std::int64_t>(std::floor(threshold)) + 1;
}

std::string to_string(BiasVerdict v) {
    switch (v) {
        case BiasVerdict::BiasedAgainstProtected: return "biased_against_protected";
        case BiasVerdict::BiasedAgainstUnprotected: return "biased_against_unprotected";
        case BiasVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

BiasVerdict bias_claim(const ConfidenceInterval& interval) {
    if (interval.lower() > 0.0) return BiasVerdict::BiasedAgainstProtected;
    if (interval.upper() < 0.0) return BiasVerdict::BiasedAgainstUnprotected;
    return BiasVerdict::Inconclusive;
}

}  // namespace bbu
