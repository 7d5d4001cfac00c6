#include "bbu/simulate.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>

#include "bbu/bounds.hpp"
#include "bbu/rng.hpp"
#include "bbu/summation.hpp"

namespace bbu {

namespace {

constexpr std::string_view kPlotMagic = "# bbu coverage v1";

std::string format_double(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::vector<std::uint32_t> members_of(const Population& pop, std::int32_t group_id, bool invert) {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if ((pop.group_ids[i] == group_id) != invert) out.push_back(static_cast<std::uint32_t>(i));
    }
    return out;
}

/// First k entries of a seeded partial Fisher-Yates shuffle of the pool.
void sample_without_replacement(std::vector<std::uint32_t> pool, std::size_t k, SplitMix64& rng,
                                const std::vector<double>& costs, std::vector<double>& out) {
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
        out.push_back(costs[pool[i]]);
    }
}

std::uint64_t trial_seed(std::uint64_t seed, std::int32_t group_id, std::int64_t n, double gamma,
                         std::int64_t trial_index) {
    std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(group_id));
    s = mix_seed(s, static_cast<std::uint64_t>(n));
    s = mix_seed(s, std::bit_cast<std::uint64_t>(gamma));
    return mix_seed(s, static_cast<std::uint64_t>(trial_index));
}

/// Variance of the amortized disparities of a sample holding n_in in-group
/// costs and n_out out-group costs, under the sample's own frequencies.
double sample_amortized_variance(std::span<const double> in_costs,
                                 std::span<const double> out_costs) {
    const double n = static_cast<double>(in_costs.size() + out_costs.size());
    const double in_scale = n / static_cast<double>(in_costs.size());
    const double out_scale = n / static_cast<double>(out_costs.size());
    CompensatedSum sum;
    for (double c : in_costs) sum.add(c * in_scale);
    for (double c : out_costs) sum.add(-c * out_scale);
    const double mean = sum.value() / n;
    CompensatedSum squares;
    for (double c : in_costs) {
        const double d = c * in_scale - mean;
        squares.add(d * d);
    }
    for (double c : out_costs) {
        const double d = -c * out_scale - mean;
        squares.add(d * d);
    }
    return squares.value() / n;
}

struct CellTotals {
    std::int64_t trials = 0;
    std::int64_t hits = 0;
    CompensatedSum half_widths;
};

void check_cell_feasible(const Population& population, std::int32_t group_id, std::int64_t n,
                         double gamma, const CoverageConfig& config) {
    if (!(gamma > 0.0) || gamma > 0.5) throw InvalidConfigError("gamma must lie in (0, 0.5]");
    if (n < 2) throw InvalidConfigError("sample size must be at least 2");
    if (n > static_cast<std::int64_t>(population.size())) {
        throw SampleTooLargeError("sample size " + std::to_string(n) + " exceeds population of " +
                                  std::to_string(population.size()));
    }
    if (config.sampling == SamplingMode::Stratified) {
        const auto k = static_cast<std::int64_t>(std::ceil(gamma * static_cast<double>(n)));
        const std::int64_t pool_in = population.group_size(group_id);
        const std::int64_t pool_out = static_cast<std::int64_t>(population.size()) - pool_in;
        if (k > pool_in || n - k > pool_out || k < 1 || n - k < 1) {
            throw InfeasibleMixError("cannot draw " + std::to_string(k) + ":" +
                                     std::to_string(n - k) + " from pools of " +
                                     std::to_string(pool_in) + ":" + std::to_string(pool_out));
        }
    }
}

}  // namespace

std::string to_string(VarianceMode m) {
    return m == VarianceMode::Empirical ? "empirical" : "worst-case";
}

std::string to_string(SamplingMode m) {
    return m == SamplingMode::Stratified ? "stratified" : "iid";
}

TrialResult coverage_trial(const Population& population, std::int32_t group_id,
                           std::int64_t n, double gamma, const CoverageConfig& config,
                           std::uint64_t seed, std::int64_t trial_index) {
    check_cell_feasible(population, group_id, n, gamma, config);
    SplitMix64 rng(trial_seed(seed, group_id, n, gamma, trial_index));

    std::vector<double> in_costs;
    std::vector<double> out_costs;
    if (config.sampling == SamplingMode::Stratified) {
        const auto k = static_cast<std::int64_t>(std::ceil(gamma * static_cast<double>(n)));
        in_costs.reserve(static_cast<std::size_t>(k));
        out_costs.reserve(static_cast<std::size_t>(n - k));
        sample_without_replacement(members_of(population, group_id, false),
                                   static_cast<std::size_t>(k), rng, population.costs, in_costs);
        sample_without_replacement(members_of(population, group_id, true),
                                   static_cast<std::size_t>(n - k), rng, population.costs,
                                   out_costs);
    } else {
        // iid draws (with replacement) from the whole population.
        for (std::int64_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(rng.below(population.size()));
            (population.group_ids[idx] == group_id ? in_costs : out_costs)
                .push_back(population.costs[idx]);
        }
        if (in_costs.empty() || out_costs.empty()) {
            // The draw produced no members of one group, so no interval can be
            // formed; the trial counts as a miss.
            return {};
        }
    }

    const double delta_bar = compensated_mean(in_costs) - compensated_mean(out_costs);

    BoundParams params;
    params.max_cost = config.max_cost;
    params.gamma = gamma;
    params.confidence = config.rho;
    params.sample_size = n;
    params.variance = config.variance == VarianceMode::WorstCase
                          ? params.worst_case_variance()
                          : sample_amortized_variance(in_costs, out_costs);
    const double t = interval_half_width(params);

    const double truth = true_disparity(population, group_id);
    TrialResult result;
    result.formed = true;
    result.half_width = t;
    result.hit = truth >= delta_bar - t && truth <= delta_bar + t;
    return result;
}

CoverageCell run_coverage_experiment(const Population& population, std::int32_t group_id,
                                     std::int64_t n, double gamma,
                                     const CoverageConfig& config, std::uint64_t seed) {
    if (config.trials < 1) throw InvalidConfigError("trials must be at least 1");
    check_cell_feasible(population, group_id, n, gamma, config);

    // Collect per-trial results by index, then aggregate in index order, so
    // the outcome does not depend on execution order.
    std::vector<TrialResult> results(static_cast<std::size_t>(config.trials));
    for (std::int64_t trial = 0; trial < config.trials; ++trial) {
        results[static_cast<std::size_t>(trial)] =
            coverage_trial(population, group_id, n, gamma, config, seed, trial);
    }

    CoverageCell cell;
    cell.n = n;
    cell.gamma = gamma;
    cell.rho = config.rho;
    cell.trials = config.trials;
    CompensatedSum widths;
    std::int64_t formed = 0;
    for (const auto& r : results) {
        if (r.hit) ++cell.hits;
        if (r.formed) {
            widths.add(r.half_width);
            ++formed;
        }
    }
    cell.mean_half_width = formed == 0 ? 0.0 : widths.value() / static_cast<double>(formed);
    return cell;
}

CoverageReport run_coverage_grid(const Population& population,
                                 std::span<const std::int32_t> group_ids,
                                 std::span<const std::int64_t> n_grid,
                                 std::span<const double> gamma_grid,
                                 const CoverageConfig& config, std::uint64_t seed) {
    if (group_ids.empty()) throw InvalidConfigError("grid needs at least one group");
    CoverageReport report;
    for (const std::int64_t n : n_grid) {
        for (const double gamma : gamma_grid) {
            CellTotals totals;
            CompensatedSum width_sums;
            std::int64_t cells = 0;
            for (const std::int32_t g : group_ids) {
                const CoverageCell part =
                    run_coverage_experiment(population, g, n, gamma, config, seed);
                totals.trials += part.trials;
                totals.hits += part.hits;
                width_sums.add(part.mean_half_width);
                ++cells;
            }
            CoverageCell cell;
            cell.n = n;
            cell.gamma = gamma;
            cell.rho = config.rho;
            cell.trials = totals.trials;
            cell.hits = totals.hits;
            cell.mean_half_width = width_sums.value() / static_cast<double>(cells);
            report.cells.push_back(cell);
        }
    }
    return report;
}

std::vector<SweepPoint> sweep_sample_size(std::span<const double> delta_grid,
                                          const BoundParams& params) {
    std::vector<SweepPoint> curve;
    curve.reserve(delta_grid.size());
    for (const double delta : delta_grid) {
        curve.push_back({delta, required_sample_size(delta, params)});
    }
    return curve;
}

void emit_plot_data(const CoverageReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << kPlotMagic << '\n';
    out << "n,gamma,rho,trials,hits,coverage,mean_half_width\n";
    for (const auto& cell : report.cells) {
        out << cell.n << ',' << format_double(cell.gamma) << ',' << format_double(cell.rho) << ','
            << cell.trials << ',' << cell.hits << ',' << format_double(cell.coverage()) << ','
            << format_double(cell.mean_half_width) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

void emit_plot_data(std::span<const SweepPoint> curve, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << kPlotMagic << '\n';
    out << "delta_bar,required_n\n";
    for (const auto& point : curve) {
        out << format_double(point.delta_bar) << ',' << point.required_n << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace bbu
