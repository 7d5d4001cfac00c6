#pragma once

#include <cstdint>
#include <string>

#include "bbu/types.hpp"

namespace bbu {

/// Bernstein tail probability for a deviation of t:
///
///   Pr[|delta_bar - delta| > t] <= 2 exp( -n t^2 / (2 sigma^2 + (2C/3gamma) t) )
///
/// The raw right-hand side, which can reach 2 as t -> 0.
double bernstein_tail_bound_raw(const BoundParams& params, double t);

/// Same bound clipped to [0, 1] so it reads as a probability.
double bernstein_tail_bound(const BoundParams& params, double t);

/// Half-width t of the two-sided confidence interval at confidence rho,
/// obtained by setting the Bernstein tail equal to 1 - rho and solving the
/// quadratic in t:
///
///   t = (B + sqrt(B^2 - 8 n sigma^2 log[(1-rho)/2])) / (2n),
///   B = -(2C/3gamma) log[(1-rho)/2]
///
/// Round-trips: bernstein_tail_bound(params, t) == 1 - rho.
double interval_half_width(const BoundParams& params);

/// Two-sided Hoeffding half-width for variables bounded in [-C/gamma, C/gamma]:
/// t = (C/gamma) sqrt(2 log[2/(1-rho)] / n). Ignores the variance.
double hoeffding_half_width(const BoundParams& params);

/// Smallest integer n such that the interval at confidence rho excludes zero
/// for a sample disparity of delta_bar, i.e. the smallest n with
///
///   n > (2 sigma^2 + (2C/3gamma) delta_bar) (-log[(1-rho)/2]) / delta_bar^2
///
/// The inequality is strict: an exactly integral threshold yields
/// threshold + 1. Throws NonPositiveDeltaError for delta_bar <= 0 (no finite
/// n can certify bias) and InvalidParamsError for delta_bar > max_cost.
std::int64_t required_sample_size(double delta_bar, const BoundParams& params);

enum class BiasVerdict { BiasedAgainstProtected, BiasedAgainstUnprotected, Inconclusive };

std::string to_string(BiasVerdict v);

/// Directional claim: biased against the protected group iff the whole
/// interval lies above zero, against the unprotected group iff it lies below,
/// inconclusive when it straddles zero.
BiasVerdict bias_claim(const ConfidenceInterval& interval);

}  // namespace bbu
