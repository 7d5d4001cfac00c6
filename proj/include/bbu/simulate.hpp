#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bbu/data_io.hpp"
#include "bbu/types.hpp"

namespace bbu {

enum class VarianceMode { Empirical, WorstCase };
enum class SamplingMode { Stratified, Iid };

std::string to_string(VarianceMode m);
std::string to_string(SamplingMode m);

struct CoverageConfig {
    double rho = 0.95;
    std::int64_t trials = 20;
    double max_cost = 1.0;
    VarianceMode variance = VarianceMode::WorstCase;
    SamplingMode sampling = SamplingMode::Stratified;
};

/// One (n, gamma) cell of the coverage experiment.
struct CoverageCell {
    std::int64_t n = 0;
    double gamma = 0.0;
    double rho = 0.0;
    std::int64_t trials = 0;
    std::int64_t hits = 0;  // trials whose interval contained the true disparity
    double mean_half_width = 0.0;

    double coverage() const {
        return trials == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials);
    }
    bool operator==(const CoverageCell&) const = default;
};

struct CoverageReport {
    std::vector<CoverageCell> cells;
    bool operator==(const CoverageReport&) const = default;
};

struct TrialResult {
    bool formed = false;  // false when an iid draw missed one of the groups
    bool hit = false;
    double half_width = 0.0;
};

/// One independent trial. Randomness is derived from (seed, trial_index)
/// alone, so trials may run in any order or in parallel and aggregate to the
/// same counts.
TrialResult coverage_trial(const Population& population, std::int32_t group_id,
                           std::int64_t n, double gamma, const CoverageConfig& config,
                           std::uint64_t seed, std::int64_t trial_index);

/// Runs config.trials trials for one group at one (n, gamma) cell. Each trial
/// draws without replacement at the gamma-controlled mix (ceil(gamma*n)
/// members of the group, the rest from its complement), estimates the
/// disparity, builds the Bernstein interval and tests whether the group's
/// true disparity falls inside.
///
/// Throws SampleTooLargeError when n exceeds the population and
/// InfeasibleMixError when either stratum cannot supply its share.
CoverageCell run_coverage_experiment(const Population& population, std::int32_t group_id,
                                     std::int64_t n, double gamma,
                                     const CoverageConfig& config, std::uint64_t seed);

/// Full grid over sample sizes, gammas and groups; per-(n, gamma) cells are
/// aggregated across the given groups.
CoverageReport run_coverage_grid(const Population& population,
                                 std::span<const std::int32_t> group_ids,
                                 std::span<const std::int64_t> n_grid,
                                 std::span<const double> gamma_grid,
                                 const CoverageConfig& config, std::uint64_t seed);

struct SweepPoint {
    double delta_bar = 0.0;
    std::int64_t required_n = 0;
};

/// Pointwise required_sample_size over a grid of positive sample disparities.
std::vector<SweepPoint> sweep_sample_size(std::span<const double> delta_grid,
                                          const BoundParams& params);

/// Plot-data CSV: `# bbu coverage v1` comment line, column header, one row
/// per cell. Overwrites the target; re-emitting a report is byte-identical.
void emit_plot_data(const CoverageReport& report, const std::filesystem::path& path);
void emit_plot_data(std::span<const SweepPoint> curve, const std::filesystem::path& path);

}  // namespace bbu
