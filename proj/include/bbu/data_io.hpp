#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbu/types.hpp"

namespace bbu {

enum class Format { Csv, Jsonl };

/// Picks Jsonl for .jsonl/.ndjson/.json extensions, Csv otherwise.
Format format_from_extension(const std::filesystem::path& path);

/// Loads an annotated sample, validating every row eagerly.
///
/// CSV schema: header `id,group,gold_label,prediction,raw_cost`; group in
/// {-1,0,1}; gold_label/prediction in {0,1,""}; raw_cost in [0,1] or empty.
/// JSONL: one object per line, same field names, absent fields omitted.
///
/// Throws ParseError (with line number), SchemaError (naming the field),
/// EmptyDatasetError, IoError.
std::vector<AnnotatedExample> load_examples(const std::filesystem::path& path, Format format);

/// Writes the same schema back out; load_examples(write_examples(x)) == x.
void write_examples(const std::filesystem::path& path,
                    std::span<const AnnotatedExample> examples, Format format);

/// One group of a synthetic population. Costs are drawn uniformly from
/// [mean_cost - spread, mean_cost + spread] in antithetic pairs, so the
/// realized group mean equals mean_cost up to rounding; draws are clamped to
/// [0, 1] (with a warning) when the support leaks outside.
struct GroupSpec {
    std::string name;
    double mean_cost = 0.0;
    double spread = 0.0;
    double frequency = 0.0;
};

struct PopulationConfig {
    std::vector<GroupSpec> groups;
    std::int64_t population_size = 0;
    std::uint64_t seed = 0;

    /// Throws InvalidConfigError unless group frequencies form a simplex,
    /// means sit in [0, 1], spreads are nonnegative and the size is positive.
    void validate() const;
};

/// A fully enumerated population with known group memberships and costs, so
/// the true disparity of any group is computable exactly.
struct Population {
    std::vector<std::string> group_names;
    std::vector<std::int32_t> group_ids;  // one entry per member
    std::vector<double> costs;            // parallel to group_ids
    std::vector<std::string> warnings;    // generation notes (clamping etc.)

    std::size_t size() const { return costs.size(); }
    std::size_t group_count() const { return group_names.size(); }
    std::int64_t group_size(std::int32_t group_id) const;
    /// Index of the named group, or -1.
    std::int32_t group_index(std::string_view name) const;
};

/// Deterministic in (config, seed); group counts follow the frequencies by
/// largest-remainder apportionment.
Population generate_population(const PopulationConfig& config);

/// Reads a population from disk: either a JSON PopulationConfig (object with
/// a "groups" array), which is generated on the spot, or a CSV with header
/// `group,cost` enumerating the members directly.
Population load_population(const std::filesystem::path& path);

void write_population_csv(const std::filesystem::path& path, const Population& population);

PopulationConfig population_config_from_json_file(const std::filesystem::path& path);

/// Exact mean-cost difference over the whole population: members of group_id
/// versus everyone else. Throws EmptyGroupError when either side is empty.
double true_disparity(const Population& population, std::int32_t group_id);

struct CostTableRow {
    std::string group;
    double in_group_mean = 0.0;
    double out_group_mean = 0.0;
    double delta = 0.0;  // in_group_mean - out_group_mean, exactly
};

/// One row per group. Requires at least two groups so every complement is
/// nonempty.
std::vector<CostTableRow> cost_table(const Population& population);

/// Annotates the population for an audit of one group: members of
/// protected_group_id become protected, everyone else unprotected; costs are
/// carried as raw_cost.
std::vector<AnnotatedExample> annotate(const Population& population,
                                       std::int32_t protected_group_id);

}  // namespace bbu
