// bbu: groupwise-disparity auditing with Bernstein-bound confidence intervals.
//
// Subcommands: audit (estimate disparity on an annotated sample), plan
// (annotation budget for a bias claim), simulate (interval coverage on
// synthetic populations), table (per-group cost table).

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bbu/bounds.hpp"
#include "bbu/data_io.hpp"
#include "bbu/disparity.hpp"
#include "bbu/measures.hpp"
#include "bbu/simulate.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitEmptyGroup = 3;
constexpr int kExitPlannerInfeasible = 4;
constexpr int kExitIo = 5;

// delta_bar and t are reported at 4 significant figures; --json carries full
// precision.
std::string fmt4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string fmt3f(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string full(double v) {
    char buf[40];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

struct AuditOptions {
    std::string input;
    std::string measure;
    double rho = 0.95;
    std::optional<double> gamma;
    double max_cost = 1.0;
    std::string variance = "empirical";
    bool json = false;
};

struct PlanOptions {
    double delta = 0.0;
    double rho = 0.95;
    double gamma = 0.5;
    double max_cost = 1.0;
    std::string variance = "worst-case";
    std::optional<std::int64_t> reference;
    bool json = false;
};

struct SimulateOptions {
    std::string population;
    std::vector<std::int64_t> n_grid;
    std::vector<double> gamma_grid;
    std::int64_t trials = 20;
    std::uint64_t seed = 0;
    std::string out;
    double rho = 0.95;
    std::string variance = "worst-case";
    std::string sampling = "stratified";
    std::vector<std::string> groups;
    bool json = false;
};

struct TableOptions {
    std::string input;
    bool json = false;
};

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int run_audit(const AuditOptions& o) {
    const auto kind = bbu::try_measure_kind(o.measure);
    if (!kind) throw bbu::InvalidConfigError("unknown measure '" + o.measure + "'");
    const bbu::MeasureSpec spec{*kind, bbu::CostDirection::CostIsFailure};

    const auto raw = bbu::load_examples(o.input, bbu::format_from_extension(o.input));
    const auto examples = bbu::apply_measure(raw, spec);
    const auto estimate =
        bbu::estimate_groupwise_disparity(examples, bbu::make_cost_fn(spec), o.max_cost);

    const auto freqs = bbu::empirical_frequencies(examples);
    const double minority = std::min(freqs.protected_frequency, freqs.unprotected_frequency);

    std::vector<std::string> warnings;
    double gamma = minority;
    if (o.gamma) {
        gamma = *o.gamma;
        // gamma is the assumed population lower bound; the sample can
        // contradict it.
        if (minority < gamma) {
            warnings.push_back("sample minority frequency " + fmt4(minority) +
                               " is below the assumed gamma " + fmt4(gamma));
        }
    }

    bbu::BoundParams params;
    params.max_cost = o.max_cost;
    params.gamma = gamma;
    params.confidence = o.rho;
    params.sample_size = estimate.total();
    params.variance = o.variance == "worst-case" ? params.worst_case_variance()
                                                 : estimate.empirical_variance;
    const double t = bbu::interval_half_width(params);
    const bbu::ConfidenceInterval interval{estimate.delta_bar, t, o.rho,
                                           bbu::BoundFamily::Bernstein};
    const auto verdict = bbu::bias_claim(interval);

    print_warnings(warnings);
    if (o.json) {
        ordered_json j;
        j["command"] = "audit";
        j["input"] = o.input;
        j["measure"] = o.measure;
        j["variance_mode"] = o.variance;
        j["rho"] = o.rho;
        j["gamma"] = gamma;
        j["max_cost"] = o.max_cost;
        j["n"] = estimate.total();
        j["n_protected"] = estimate.n_protected;
        j["n_unprotected"] = estimate.n_unprotected;
        j["n_neither"] = estimate.n_neither;
        j["sigma2"] = params.variance;
        j["delta_bar"] = estimate.delta_bar;
        j["half_width"] = t;
        j["interval"] = {interval.lower(), interval.upper()};
        j["family"] = bbu::to_string(interval.family);
        j["verdict"] = bbu::to_string(verdict);
        j["warnings"] = warnings;
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }

    std::cout << "input=" << o.input << "\n"
              << "measure=" << o.measure << "\n"
              << "variance_mode=" << o.variance << "\n"
              << "rho=" << fmt4(o.rho) << "\n"
              << "gamma=" << fmt4(gamma) << "\n"
              << "max_cost=" << fmt4(o.max_cost) << "\n"
              << "n=" << estimate.total() << "\n"
              << "n_protected=" << estimate.n_protected << "\n"
              << "n_unprotected=" << estimate.n_unprotected << "\n"
              << "n_neither=" << estimate.n_neither << "\n"
              << "sigma2=" << fmt4(params.variance) << "\n"
              << "delta_bar=" << fmt4(estimate.delta_bar) << "\n"
              << "half_width=" << fmt4(t) << "\n"
              << "interval_low=" << fmt4(interval.lower()) << "\n"
              << "interval_high=" << fmt4(interval.upper()) << "\n"
              << "family=" << bbu::to_string(interval.family) << "\n"
              << "verdict=" << bbu::to_string(verdict) << "\n"
              << "# delta_bar " << fmt4(estimate.delta_bar) << " with " << fmt4(o.rho * 100.0)
              << "% interval [" << fmt4(interval.lower()) << ", " << fmt4(interval.upper())
              << "]: " << bbu::to_string(verdict) << "\n";
    return kExitOk;
}

int run_plan(const PlanOptions& o) {
    if (!(o.delta > 0.0)) {
        std::cerr << "error: no finite sample size certifies bias\n";
        return kExitPlannerInfeasible;
    }
    bbu::BoundParams params;
    params.max_cost = o.max_cost;
    params.gamma = o.gamma;
    params.confidence = o.rho;
    if (o.variance == "worst-case") {
        params.variance = params.worst_case_variance();
    } else {
        double v = 0.0;
        const char* first = o.variance.data();
        const char* last = o.variance.data() + o.variance.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last) {
            throw bbu::InvalidConfigError("--variance must be 'worst-case' or a number, got '" +
                                          o.variance + "'");
        }
        params.variance = v;
    }

    const std::int64_t n = bbu::required_sample_size(o.delta, params);
    std::optional<double> ratio;
    if (o.reference) {
        if (*o.reference < 1) throw bbu::InvalidConfigError("--reference must be positive");
        ratio = static_cast<double>(n) / static_cast<double>(*o.reference);
    }

    if (o.json) {
        ordered_json j;
        j["command"] = "plan";
        j["delta_bar"] = o.delta;
        j["rho"] = o.rho;
        j["gamma"] = o.gamma;
        j["max_cost"] = o.max_cost;
        j["variance_mode"] = o.variance;
        j["sigma2"] = params.variance;
        j["required_n"] = n;
        if (o.reference) {
            j["reference_n"] = *o.reference;
            j["ratio"] = *ratio;
        }
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }

    std::cout << "delta_bar=" << fmt4(o.delta) << "\n"
              << "rho=" << fmt4(o.rho) << "\n"
              << "gamma=" << fmt4(o.gamma) << "\n"
              << "max_cost=" << fmt4(o.max_cost) << "\n"
              << "variance_mode=" << o.variance << "\n"
              << "sigma2=" << fmt4(params.variance) << "\n"
              << "required_n=" << n << "\n";
    if (o.reference) {
        char human[40];
        std::snprintf(human, sizeof(human), "%.2g", *ratio);
        std::cout << "reference_n=" << *o.reference << "\n"
                  << "ratio=" << fmt4(*ratio) << "\n"
                  << "# need at least " << n << " annotated examples (" << human
                  << "x the reference of " << *o.reference << ")\n";
    } else {
        std::cout << "# need at least " << n << " annotated examples to claim bias at "
                  << fmt4(o.rho * 100.0) << "% confidence\n";
    }
    return kExitOk;
}

int run_simulate(const SimulateOptions& o) {
    if (o.trials < 1) throw bbu::InvalidConfigError("--trials must be at least 1");
    if (o.n_grid.empty() || o.gamma_grid.empty()) {
        throw bbu::InvalidConfigError("--n-grid and --gamma-grid must be nonempty");
    }

    const auto population = bbu::load_population(o.population);
    print_warnings(population.warnings);

    std::vector<std::int32_t> group_ids;
    if (o.groups.empty()) {
        for (std::size_t g = 0; g < population.group_count(); ++g) {
            group_ids.push_back(static_cast<std::int32_t>(g));
        }
    } else {
        for (const auto& name : o.groups) {
            const auto id = population.group_index(name);
            if (id < 0) throw bbu::InvalidConfigError("unknown group '" + name + "'");
            group_ids.push_back(id);
        }
    }

    bbu::CoverageConfig config;
    config.rho = o.rho;
    config.trials = o.trials;
    config.variance =
        o.variance == "worst-case" ? bbu::VarianceMode::WorstCase : bbu::VarianceMode::Empirical;
    config.sampling =
        o.sampling == "stratified" ? bbu::SamplingMode::Stratified : bbu::SamplingMode::Iid;

    const auto report = bbu::run_coverage_grid(population, group_ids, o.n_grid, o.gamma_grid,
                                               config, o.seed);

    std::error_code ec;
    std::filesystem::create_directories(o.out, ec);
    if (ec) throw bbu::IoError("cannot create output directory " + o.out + ": " + ec.message());
    const auto coverage_path = std::filesystem::path(o.out) / "coverage.csv";
    const auto half_width_path = std::filesystem::path(o.out) / "half_width.csv";
    bbu::emit_plot_data(report, coverage_path);
    bbu::emit_plot_data(report, half_width_path);

    double min_coverage = 1.0;
    for (const auto& cell : report.cells) min_coverage = std::min(min_coverage, cell.coverage());

    if (o.json) {
        ordered_json j;
        j["command"] = "simulate";
        j["population"] = o.population;
        j["groups"] = population.group_count();
        j["population_size"] = population.size();
        j["rho"] = o.rho;
        j["trials_per_group"] = o.trials;
        j["sampling"] = o.sampling;
        j["variance_mode"] = o.variance;
        j["seed"] = o.seed;
        j["cells"] = ordered_json::array();
        for (const auto& cell : report.cells) {
            ordered_json c;
            c["n"] = cell.n;
            c["gamma"] = cell.gamma;
            c["trials"] = cell.trials;
            c["hits"] = cell.hits;
            c["coverage"] = cell.coverage();
            c["mean_half_width"] = cell.mean_half_width;
            j["cells"].push_back(c);
        }
        j["min_coverage"] = min_coverage;
        j["coverage_csv"] = coverage_path.string();
        j["half_width_csv"] = half_width_path.string();
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }

    std::cout << "population=" << o.population << "\n"
              << "groups=" << population.group_count() << "\n"
              << "population_size=" << population.size() << "\n"
              << "rho=" << fmt4(o.rho) << "\n"
              << "trials_per_group=" << o.trials << "\n"
              << "sampling=" << o.sampling << "\n"
              << "variance_mode=" << o.variance << "\n"
              << "seed=" << o.seed << "\n"
              << "cells=" << report.cells.size() << "\n"
              << "min_coverage=" << full(min_coverage) << "\n"
              << "coverage_csv=" << coverage_path.string() << "\n"
              << "half_width_csv=" << half_width_path.string() << "\n"
              << "# minimum observed coverage " << full(min_coverage) << " across "
              << report.cells.size() << " cells at " << fmt4(o.rho * 100.0) << "% confidence\n";
    return kExitOk;
}

int run_table(const TableOptions& o) {
    const auto population = bbu::load_population(o.input);
    print_warnings(population.warnings);
    const auto rows = bbu::cost_table(population);

    if (o.json) {
        ordered_json j;
        j["command"] = "table";
        j["input"] = o.input;
        j["population_size"] = population.size();
        j["groups"] = ordered_json::array();
        for (const auto& row : rows) {
            ordered_json r;
            r["name"] = row.group;
            r["in_group_mean"] = row.in_group_mean;
            r["out_group_mean"] = row.out_group_mean;
            r["delta"] = row.delta;
            j["groups"].push_back(r);
        }
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }

    std::cout << "input=" << o.input << "\n"
              << "groups=" << rows.size() << "\n"
              << "population_size=" << population.size() << "\n";
    for (const auto& row : rows) {
        std::cout << "in_mean." << row.group << "=" << fmt3f(row.in_group_mean) << "\n"
                  << "out_mean." << row.group << "=" << fmt3f(row.out_group_mean) << "\n"
                  << "delta." << row.group << "=" << fmt3f(row.delta) << "\n";
    }
    std::size_t width = 5;
    for (const auto& row : rows) width = std::max(width, row.group.size());
    std::cout << "# " << std::string("group") << std::string(width - 5 + 2, ' ')
              << "in      out     delta\n";
    for (const auto& row : rows) {
        std::cout << "# " << row.group << std::string(width - row.group.size() + 2, ' ')
                  << fmt3f(row.in_group_mean) << "   " << fmt3f(row.out_group_mean) << "   "
                  << fmt3f(row.delta) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"groupwise-disparity auditing with Bernstein-bound confidence intervals"};
    app.require_subcommand(1);

    AuditOptions audit;
    auto* audit_cmd = app.add_subcommand("audit", "estimate disparity on an annotated sample");
    audit_cmd->add_option("--input", audit.input, "CSV or JSONL sample")->required();
    audit_cmd->add_option("--measure", audit.measure, "fairness measure")
        ->required()
        ->check(CLI::IsMember({"dp", "eo", "eodds", "custom"}));
    audit_cmd->add_option("--rho", audit.rho, "confidence in [0,1)")->required();
    audit_cmd->add_option("--gamma", audit.gamma,
                          "assumed lower bound on both group proportions "
                          "(default: sample minority frequency)");
    audit_cmd->add_option("--max-cost", audit.max_cost, "maximum cost C");
    audit_cmd->add_option("--variance", audit.variance, "sigma^2 estimator")
        ->check(CLI::IsMember({"empirical", "worst-case"}));
    audit_cmd->add_flag("--json", audit.json, "emit one JSON object");

    PlanOptions plan;
    auto* plan_cmd = app.add_subcommand("plan", "annotation budget needed to claim bias");
    plan_cmd->add_option("--delta", plan.delta, "anticipated sample disparity")->required();
    plan_cmd->add_option("--rho", plan.rho, "confidence in [0,1)")->required();
    plan_cmd->add_option("--gamma", plan.gamma, "lower bound on group proportions")->required();
    plan_cmd->add_option("--max-cost", plan.max_cost, "maximum cost C")->required();
    plan_cmd->add_option("--variance", plan.variance, "'worst-case' or a numeric sigma^2");
    plan_cmd->add_option("--reference", plan.reference, "reference dataset size for the ratio");
    plan_cmd->add_flag("--json", plan.json, "emit one JSON object");

    SimulateOptions sim;
    auto* sim_cmd = app.add_subcommand("simulate", "interval coverage on a synthetic population");
    sim_cmd->add_option("--population", sim.population,
                        "population CSV or synthetic-config JSON")
        ->required();
    sim_cmd->add_option("--n-grid", sim.n_grid, "sample sizes")->required()->delimiter(',');
    sim_cmd->add_option("--gamma-grid", sim.gamma_grid, "gamma values")->required()->delimiter(',');
    sim_cmd->add_option("--trials", sim.trials, "trials per (group, cell)");
    sim_cmd->add_option("--seed", sim.seed, "RNG seed")->envname("BBU_SEED");
    sim_cmd->add_option("--out", sim.out, "output directory")->required();
    sim_cmd->add_option("--rho", sim.rho, "confidence in [0,1)");
    sim_cmd->add_option("--variance", sim.variance, "sigma^2 estimator")
        ->check(CLI::IsMember({"empirical", "worst-case"}));
    sim_cmd->add_option("--sampling", sim.sampling, "sampling scheme")
        ->check(CLI::IsMember({"stratified", "iid"}));
    sim_cmd->add_option("--group", sim.groups, "restrict to named groups (default: all)");
    sim_cmd->add_flag("--json", sim.json, "emit one JSON object");

    TableOptions table;
    auto* table_cmd = app.add_subcommand("table", "per-group in/out mean costs and deltas");
    table_cmd->add_option("--input", table.input,
                          "population CSV or synthetic-config JSON")
        ->required();
    table_cmd->add_flag("--json", table.json, "emit one JSON object");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (audit_cmd->parsed()) return run_audit(audit);
        if (plan_cmd->parsed()) return run_plan(plan);
        if (sim_cmd->parsed()) return run_simulate(sim);
        return run_table(table);
    } catch (const bbu::EmptyGroupError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEmptyGroup;
    } catch (const bbu::NonPositiveDeltaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPlannerInfeasible;
    } catch (const bbu::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const bbu::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
