#include "bbu/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "bbu/rng.hpp"
#include "bbu/summation.hpp"

namespace bbu {

namespace {

constexpr std::string_view kExampleHeader = "id,group,gold_label,prediction,raw_cost";
constexpr std::string_view kPopulationHeader = "group,cost";

std::string format_double(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

bool parse_int_strict(std::string_view text, int& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

bool parse_double_strict(std::string_view text, double& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

void strip_carriage_return(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

GroupTag parse_group_field(std::string_view text, std::size_t line) {
    int value = 0;
    if (!parse_int_strict(text, value)) {
        throw SchemaError(line, "group", "expected -1, 0 or 1, got '" + std::string(text) + "'");
    }
    const auto tag = try_group_tag(value);
    if (!tag) {
        throw SchemaError(line, "group", "expected -1, 0 or 1, got '" + std::string(text) + "'");
    }
    return *tag;
}

std::optional<int> parse_label_field(std::string_view text, std::size_t line, const char* field) {
    if (text.empty()) return std::nullopt;
    int value = 0;
    if (!parse_int_strict(text, value) || (value != 0 && value != 1)) {
        throw SchemaError(line, field, "expected 0, 1 or empty, got '" + std::string(text) + "'");
    }
    return value;
}

std::optional<double> parse_cost_field(std::string_view text, std::size_t line) {
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    if (!parse_double_strict(text, value)) {
        throw SchemaError(line, "raw_cost", "expected a number in [0,1] or empty, got '" + std::string(text) + "'");
    }
    if (!(value >= 0.0) || value > 1.0) {
        throw SchemaError(line, "raw_cost", "cost " + std::string(text) + " outside [0,1]");
    }
    return value;
}

void check_example_invariant(const AnnotatedExample& ex, std::size_t line) {
    const bool has_pair = ex.gold_label.has_value() && ex.prediction.has_value();
    if (!has_pair && !ex.raw_cost.has_value()) {
        throw SchemaError(line, "raw_cost",
                          "row needs either both gold_label and prediction or a raw_cost");
    }
}

std::vector<AnnotatedExample> load_examples_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) {
        throw EmptyDatasetError(path.string() + " is empty");
    }
    strip_carriage_return(line);
    if (line != kExampleHeader) {
        throw ParseError(1, "bad header; expected '" + std::string(kExampleHeader) + "'");
    }

    std::vector<AnnotatedExample> examples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_carriage_return(line);
        const auto fields = split_fields(line);
        if (fields.size() != 5) {
            throw ParseError(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
        }
        AnnotatedExample ex;
        ex.id = std::string(fields[0]);
        ex.group = parse_group_field(fields[1], line_no);
        ex.gold_label = parse_label_field(fields[2], line_no, "gold_label");
        ex.prediction = parse_label_field(fields[3], line_no, "prediction");
        ex.raw_cost = parse_cost_field(fields[4], line_no);
        check_example_invariant(ex, line_no);
        examples.push_back(std::move(ex));
    }
    if (examples.empty()) {
        throw EmptyDatasetError(path.string() + " has a header but no rows");
    }
    return examples;
}

std::vector<AnnotatedExample> load_examples_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::vector<AnnotatedExample> examples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        strip_carriage_return(line);
        if (line.empty()) continue;

        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, e.what());
        }
        if (!row.is_object()) {
            throw ParseError(line_no, "expected a JSON object");
        }

        AnnotatedExample ex;
        if (row.contains("id")) {
            if (!row["id"].is_string()) throw SchemaError(line_no, "id", "must be a string");
            ex.id = row["id"].get<std::string>();
        }
        if (!row.contains("group") || !row["group"].is_number_integer()) {
            throw SchemaError(line_no, "group", "required integer in {-1,0,1}");
        }
        const auto tag = try_group_tag(row["group"].get<int>());
        if (!tag) throw SchemaError(line_no, "group", "expected -1, 0 or 1");
        ex.group = *tag;

        for (const char* field : {"gold_label", "prediction"}) {
            if (!row.contains(field) || row[field].is_null()) continue;
            if (!row[field].is_number_integer()) {
                throw SchemaError(line_no, field, "expected 0 or 1");
            }
            const int v = row[field].get<int>();
            if (v != 0 && v != 1) throw SchemaError(line_no, field, "expected 0 or 1");
            (field == std::string_view("gold_label") ? ex.gold_label : ex.prediction) = v;
        }
        if (row.contains("raw_cost") && !row["raw_cost"].is_null()) {
            if (!row["raw_cost"].is_number()) {
                throw SchemaError(line_no, "raw_cost", "expected a number in [0,1]");
            }
            const double c = row["raw_cost"].get<double>();
            if (!(c >= 0.0) || c > 1.0) {
                throw SchemaError(line_no, "raw_cost", "cost outside [0,1]");
            }
            ex.raw_cost = c;
        }
        check_example_invariant(ex, line_no);
        examples.push_back(std::move(ex));
    }
    if (examples.empty()) {
        throw EmptyDatasetError(path.string() + " holds no examples");
    }
    return examples;
}

void write_examples_csv(const std::filesystem::path& path,
                        std::span<const AnnotatedExample> examples) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << kExampleHeader << '\n';
    for (const auto& ex : examples) {
        if (ex.id.find_first_of(",\r\n") != std::string::npos) {
            throw IoError("example id '" + ex.id + "' cannot be stored in the CSV schema");
        }
        out << ex.id << ',' << group_sign(ex.group) << ',';
        if (ex.gold_label) out << *ex.gold_label;
        out << ',';
        if (ex.prediction) out << *ex.prediction;
        out << ',';
        if (ex.raw_cost) out << format_double(*ex.raw_cost);
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

void write_examples_jsonl(const std::filesystem::path& path,
                          std::span<const AnnotatedExample> examples) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& ex : examples) {
        nlohmann::ordered_json row;
        row["id"] = ex.id;
        row["group"] = group_sign(ex.group);
        if (ex.gold_label) row["gold_label"] = *ex.gold_label;
        if (ex.prediction) row["prediction"] = *ex.prediction;
        if (ex.raw_cost) row["raw_cost"] = *ex.raw_cost;
        out << row.dump() << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

/// Largest-remainder apportionment of population_size seats to frequencies.
std::vector<std::int64_t> apportion_counts(const PopulationConfig& config) {
    const auto n_groups = config.groups.size();
    std::vector<std::int64_t> counts(n_groups);
    std::vector<std::pair<double, std::size_t>> remainders(n_groups);
    std::int64_t assigned = 0;
    for (std::size_t g = 0; g < n_groups; ++g) {
        const double quota = config.groups[g].frequency * static_cast<double>(config.population_size);
        counts[g] = static_cast<std::int64_t>(std::floor(quota));
        remainders[g] = {quota - std::floor(quota), g};
        assigned += counts[g];
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    const std::int64_t leftover = config.population_size - assigned;
    for (std::int64_t i = 0; i < leftover; ++i) {
        ++counts[remainders[static_cast<std::size_t>(i) % remainders.size()].second];
    }
    return counts;
}

}  // namespace

Format format_from_extension(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") return Format::Jsonl;
    return Format::Csv;
}

std::vector<AnnotatedExample> load_examples(const std::filesystem::path& path, Format format) {
    return format == Format::Csv ? load_examples_csv(path) : load_examples_jsonl(path);
}

void write_examples(const std::filesystem::path& path,
                    std::span<const AnnotatedExample> examples, Format format) {
    if (format == Format::Csv) {
        write_examples_csv(path, examples);
    } else {
        write_examples_jsonl(path, examples);
    }
}

void PopulationConfig::validate() const {
    if (population_size < 1) {
        throw InvalidConfigError("population_size must be positive");
    }
    if (groups.empty()) {
        throw InvalidConfigError("config needs at least one group");
    }
    double freq_sum = 0.0;
    for (const auto& g : groups) {
        if (g.name.empty()) throw InvalidConfigError("group names must be nonempty");
        if (!(g.frequency > 0.0) || g.frequency > 1.0) {
            throw InvalidConfigError("group '" + g.name + "': frequency must lie in (0, 1]");
        }
        if (!(g.mean_cost >= 0.0) || g.mean_cost > 1.0) {
            throw InvalidConfigError("group '" + g.name + "': mean_cost must lie in [0, 1]");
        }
        if (!(g.spread >= 0.0) || !std::isfinite(g.spread)) {
            throw InvalidConfigError("group '" + g.name + "': spread must be nonnegative");
        }
        freq_sum += g.frequency;
    }
    if (std::abs(freq_sum - 1.0) > 1e-9) {
        throw InvalidConfigError("group frequencies must sum to 1 (got " + format_double(freq_sum) + ")");
    }
}

Population generate_population(const PopulationConfig& config) {
    config.validate();

    Population pop;
    pop.group_names.reserve(config.groups.size());
    for (const auto& g : config.groups) pop.group_names.push_back(g.name);
    pop.group_ids.reserve(static_cast<std::size_t>(config.population_size));
    pop.costs.reserve(static_cast<std::size_t>(config.population_size));

    const auto counts = apportion_counts(config);
    for (std::size_t g = 0; g < config.groups.size(); ++g) {
        const auto& spec = config.groups[g];
        if (counts[g] == 0) {
            pop.warnings.push_back("group '" + spec.name + "' received 0 members at this population size");
            continue;
        }
        const double lo = spec.mean_cost - spec.spread;
        const double hi = spec.mean_cost + spec.spread;
        if (lo < 0.0 || hi > 1.0) {
            pop.warnings.push_back("group '" + spec.name + "': cost support [" + format_double(lo) +
                                   ", " + format_double(hi) +
                                   "] is clamped to [0,1]; the realized mean will be biased");
        }
        SplitMix64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(g)));
        const auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
        std::int64_t emitted = 0;
        // Antithetic pairs (u, 2*mean - u) pin the realized group mean to
        // mean_cost exactly whenever no clamping occurs.
        while (emitted + 2 <= counts[g]) {
            const double u = lo + (hi - lo) * rng.uniform01();
            pop.group_ids.push_back(static_cast<std::int32_t>(g));
            pop.costs.push_back(clamp01(u));
            pop.group_ids.push_back(static_cast<std::int32_t>(g));
            pop.costs.push_back(clamp01(2.0 * spec.mean_cost - u));
            emitted += 2;
        }
        if (emitted < counts[g]) {
            pop.group_ids.push_back(static_cast<std::int32_t>(g));
            pop.costs.push_back(clamp01(spec.mean_cost));
        }
    }
    return pop;
}

PopulationConfig population_config_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfigError(path.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("groups") || !doc["groups"].is_array()) {
        throw InvalidConfigError(path.string() + ": expected an object with a 'groups' array");
    }
    PopulationConfig config;
    config.population_size = doc.value("population_size", std::int64_t{0});
    config.seed = doc.value("seed", std::uint64_t{0});
    for (const auto& g : doc["groups"]) {
        if (!g.is_object()) throw InvalidConfigError("each group must be an object");
        GroupSpec spec;
        spec.name = g.value("name", std::string{});
        spec.mean_cost = g.value("mean_cost", 0.0);
        spec.spread = g.value("spread", 0.0);
        spec.frequency = g.value("frequency", 0.0);
        config.groups.push_back(std::move(spec));
    }
    config.validate();
    return config;
}

Population load_population(const std::filesystem::path& path) {
    if (path.extension() == ".json") {
        return generate_population(population_config_from_json_file(path));
    }

    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) {
        throw EmptyDatasetError(path.string() + " is empty");
    }
    strip_carriage_return(line);
    if (line != kPopulationHeader) {
        throw ParseError(1, "bad header; expected '" + std::string(kPopulationHeader) + "'");
    }

    Population pop;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_carriage_return(line);
        const auto fields = split_fields(line);
        if (fields.size() != 2) {
            throw ParseError(line_no, "expected 2 fields, got " + std::to_string(fields.size()));
        }
        if (fields[0].empty()) {
            throw SchemaError(line_no, "group", "group name must be nonempty");
        }
        double cost = 0.0;
        if (!parse_double_strict(fields[1], cost) || !(cost >= 0.0) || cost > 1.0) {
            throw SchemaError(line_no, "cost", "expected a number in [0,1], got '" + std::string(fields[1]) + "'");
        }
        const std::string name(fields[0]);
        std::int32_t id = pop.group_index(name);
        if (id < 0) {
            id = static_cast<std::int32_t>(pop.group_names.size());
            pop.group_names.push_back(name);
        }
        pop.group_ids.push_back(id);
        pop.costs.push_back(cost);
    }
    if (pop.costs.empty()) {
        throw EmptyDatasetError(path.string() + " has a header but no rows");
    }
    return pop;
}

void write_population_csv(const std::filesystem::path& path, const Population& population) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << kPopulationHeader << '\n';
    for (std::size_t i = 0; i < population.size(); ++i) {
        out << population.group_names[static_cast<std::size_t>(population.group_ids[i])] << ','
            << format_double(population.costs[i]) << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

std::int64_t Population::group_size(std::int32_t group_id) const {
    return std::count(group_ids.begin(), group_ids.end(), group_id);
}

std::int32_t Population::group_index(std::string_view name) const {
    for (std::size_t g = 0; g < group_names.size(); ++g) {
        if (group_names[g] == name) return static_cast<std::int32_t>(g);
    }
    return -1;
}

double true_disparity(const Population& population, std::int32_t group_id) {
    CompensatedSum in_sum;
    CompensatedSum out_sum;
    std::int64_t n_in = 0;
    std::int64_t n_out = 0;
    for (std::size_t i = 0; i < population.size(); ++i) {
        if (population.group_ids[i] == group_id) {
            in_sum.add(population.costs[i]);
            ++n_in;
        } else {
            out_sum.add(population.costs[i]);
            ++n_out;
        }
    }
    if (n_in == 0) {
        throw EmptyGroupError("population group " + std::to_string(group_id) + " is empty");
    }
    if (n_out == 0) {
        throw EmptyGroupError("population group " + std::to_string(group_id) + " has an empty complement");
    }
    return in_sum.value() / static_cast<double>(n_in) - out_sum.value() / static_cast<double>(n_out);
}

std::vector<CostTableRow> cost_table(const Population& population) {
    if (population.group_count() < 2) {
        throw EmptyGroupError("cost table needs at least two groups");
    }
    std::vector<CostTableRow> rows;
    rows.reserve(population.group_count());
    for (std::size_t g = 0; g < population.group_count(); ++g) {
        const auto id = static_cast<std::int32_t>(g);
        CompensatedSum in_sum;
        CompensatedSum out_sum;
        std::int64_t n_in = 0;
        std::int64_t n_out = 0;
        for (std::size_t i = 0; i < population.size(); ++i) {
            if (population.group_ids[i] == id) {
                in_sum.add(population.costs[i]);
                ++n_in;
            } else {
                out_sum.add(population.costs[i]);
                ++n_out;
            }
        }
        if (n_in == 0 || n_out == 0) {
            throw EmptyGroupError("group '" + population.group_names[g] +
                                  "' or its complement is empty");
        }
        CostTableRow row;
        row.group = population.group_names[g];
        row.in_group_mean = in_sum.value() / static_cast<double>(n_in);
        row.out_group_mean = out_sum.value() / static_cast<double>(n_out);
        row.delta = row.in_group_mean - row.out_group_mean;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<AnnotatedExample> annotate(const Population& population,
                                       std::int32_t protected_group_id) {
    std::vector<AnnotatedExample> examples;
    examples.reserve(population.size());
    for (std::size_t i = 0; i < population.size(); ++i) {
        AnnotatedExample ex;
        ex.id = std::to_string(i);
        ex.group = population.group_ids[i] == protected_group_id ? GroupTag::Protected
                                                                 : GroupTag::Unprotected;
        ex.raw_cost = population.costs[i];
        examples.push_back(std::move(ex));
    }
    return examples;
}

}  // namespace bbu
