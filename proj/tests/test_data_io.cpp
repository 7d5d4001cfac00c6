#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "bbu/data_io.hpp"
#include "bbu/disparity.hpp"
#include "util.hpp"

using bbu::AnnotatedExample;
using bbu::Format;
using bbu::GroupTag;
using bbu::PopulationConfig;
using testutil::TempDir;

namespace {

PopulationConfig table_analog_config(std::uint64_t seed) {
    PopulationConfig config;
    config.population_size = 20000;
    config.seed = seed;
    config.groups = {
        {"facetoface", 0.116, 0.1, 0.1}, {"fiction", 0.122, 0.1, 0.1},
        {"government", 0.154, 0.1, 0.1}, {"letters", 0.105, 0.1, 0.1},
        {"nineeleven", 0.115, 0.1, 0.1}, {"oup", 0.132, 0.1, 0.1},
        {"slate", 0.147, 0.1, 0.1},      {"telephone", 0.125, 0.1, 0.1},
        {"travel", 0.111, 0.1, 0.1},     {"verbatim", 0.146, 0.1, 0.1},
    };
    return config;
}

}  // namespace

TEST_SUITE("data_io") {

TEST_CASE("csv rows are echoed with their groups and costs") {
    TempDir dir;
    const auto path = dir.file("sample.csv");
    testutil::write_file(path,
                         "id,group,gold_label,prediction,raw_cost\n"
                         "a,1,,,0.2\n"
                         "b,-1,,,0.1\n"
                         "c,0,,,0.9\n");
    const auto examples = bbu::load_examples(path, Format::Csv);
    REQUIRE(examples.size() == 3);
    CHECK(examples[0].group == GroupTag::Protected);
    CHECK(examples[1].group == GroupTag::Unprotected);
    CHECK(examples[2].group == GroupTag::Neither);
    CHECK(examples[0].raw_cost == 0.2);
    CHECK(!examples[0].gold_label.has_value());
    std::int64_t neither = 0;
    for (const auto& ex : examples) neither += ex.group == GroupTag::Neither ? 1 : 0;
    CHECK(neither == 1);
}

TEST_CASE("empty files are rejected") {
    TempDir dir;
    const auto path = dir.file("empty.csv");
    testutil::write_file(path, "");
    CHECK_THROWS_AS(bbu::load_examples(path, Format::Csv), bbu::EmptyDatasetError);
    const auto header_only = dir.file("header.csv");
    testutil::write_file(header_only, "id,group,gold_label,prediction,raw_cost\n");
    CHECK_THROWS_AS(bbu::load_examples(header_only, Format::Csv), bbu::EmptyDatasetError);
    const auto jsonl = dir.file("empty.jsonl");
    testutil::write_file(jsonl, "\n\n");
    CHECK_THROWS_AS(bbu::load_examples(jsonl, Format::Jsonl), bbu::EmptyDatasetError);
}

TEST_CASE("missing files raise IoError") {
    CHECK_THROWS_AS(bbu::load_examples("/nonexistent/sample.csv", Format::Csv), bbu::IoError);
}

TEST_CASE("group means match an independent line scan") {
    std::mt19937 gen(808);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    TempDir dir;
    const auto path = dir.file("scan.csv");
    std::ostringstream csv;
    csv << "id,group,gold_label,prediction,raw_cost\n";
    for (int i = 0; i < 500; ++i) {
        const int group = i % 2 == 0 ? 1 : -1;
        csv << i << ',' << group << ",,," << unit(gen) << "\n";
    }
    testutil::write_file(path, csv.str());

    // independent scan of the text file
    std::istringstream in(testutil::read_file(path));
    std::string line;
    std::getline(in, line);
    double sum_p = 0.0, sum_u = 0.0;
    std::int64_t n_p = 0, n_u = 0;
    while (std::getline(in, line)) {
        const auto first = line.find(',');
        const auto last = line.rfind(',');
        const double cost = std::stod(line.substr(last + 1));
        if (line.substr(first + 1, 1) == "1") {
            sum_p += cost;
            ++n_p;
        } else {
            sum_u += cost;
            ++n_u;
        }
    }

    const auto examples = bbu::load_examples(path, Format::Csv);
    const auto est = bbu::estimate_groupwise_disparity(examples, testutil::raw_cost_fn());
    CHECK(est.n_protected == n_p);
    CHECK(est.n_unprotected == n_u);
    CHECK(std::abs(est.delta_bar - (sum_p / n_p - sum_u / n_u)) < 1e-12);
}

TEST_CASE("schema violations name the line and field") {
    TempDir dir;
    const auto path = dir.file("bad.csv");

    testutil::write_file(path, "id,group,gold,prediction,raw_cost\na,1,,,0.2\n");
    CHECK_THROWS_AS(bbu::load_examples(path, Format::Csv), bbu::ParseError);

    testutil::write_file(path, "id,group,gold_label,prediction,raw_cost\na,2,,,0.2\n");
    try {
        bbu::load_examples(path, Format::Csv);
        FAIL("expected SchemaError");
    } catch (const bbu::SchemaError& e) {
        CHECK(e.line == 2);
        CHECK(e.field == "group");
    }

    testutil::write_file(path, "id,group,gold_label,prediction,raw_cost\na,1,,,1.5\n");
    try {
        bbu::load_examples(path, Format::Csv);
        FAIL("expected SchemaError");
    } catch (const bbu::SchemaError& e) {
        CHECK(e.field == "raw_cost");
    }

    testutil::write_file(path, "id,group,gold_label,prediction,raw_cost\na,1,2,1,\n");
    CHECK_THROWS_AS(bbu::load_examples(path, Format::Csv), bbu::SchemaError);

    testutil::write_file(path, "id,group,gold_label,prediction,raw_cost\na,1,0.2\n");
    CHECK_THROWS_AS(bbu::load_examples(path, Format::Csv), bbu::ParseError);

    // a row with neither the label pair nor a cost
    testutil::write_file(path, "id,group,gold_label,prediction,raw_cost\na,1,1,,\n");
    CHECK_THROWS_AS(bbu::load_examples(path, Format::Csv), bbu::SchemaError);
}

TEST_CASE("jsonl loads objects and reports bad lines") {
    TempDir dir;
    const auto path = dir.file("rows.jsonl");
    testutil::write_file(path,
                         "{\"id\":\"a\",\"group\":1,\"gold_label\":1,\"prediction\":0}\n"
                         "{\"id\":\"b\",\"group\":-1,\"raw_cost\":0.25}\n");
    const auto examples = bbu::load_examples(path, Format::Jsonl);
    REQUIRE(examples.size() == 2);
    CHECK(examples[0].gold_label == 1);
    CHECK(examples[0].prediction == 0);
    CHECK(examples[1].raw_cost == 0.25);

    testutil::write_file(path, "{\"id\":\"a\",\"group\":1,\"raw_cost\":0.2}\nnot json\n");
    try {
        bbu::load_examples(path, Format::Jsonl);
        FAIL("expected ParseError");
    } catch (const bbu::ParseError& e) {
        CHECK(e.line == 2);
    }

    testutil::write_file(path, "{\"id\":\"a\",\"raw_cost\":0.2}\n");
    CHECK_THROWS_AS(bbu::load_examples(path, Format::Jsonl), bbu::SchemaError);
}

TEST_CASE("write then load round-trips the sample in both formats") {
    std::mt19937 gen(4141);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);
    std::vector<AnnotatedExample> examples;
    for (int i = 0; i < 200; ++i) {
        AnnotatedExample ex;
        ex.id = "ex-" + std::to_string(i);
        ex.group = i % 3 == 0 ? GroupTag::Protected
                              : (i % 3 == 1 ? GroupTag::Unprotected : GroupTag::Neither);
        if (coin(gen) == 1) {
            ex.gold_label = coin(gen);
            ex.prediction = coin(gen);
            if (coin(gen) == 1) ex.raw_cost = unit(gen);
        } else {
            ex.raw_cost = unit(gen);
        }
        examples.push_back(std::move(ex));
    }

    TempDir dir;
    for (const Format format : {Format::Csv, Format::Jsonl}) {
        const auto path = dir.file(format == Format::Csv ? "round.csv" : "round.jsonl");
        bbu::write_examples(path, examples, format);
        const auto loaded = bbu::load_examples(path, format);
        CHECK(loaded == examples);
    }
}

TEST_CASE("generation is deterministic in the seed") {
    const auto config = table_analog_config(99);
    const auto a = bbu::generate_population(config);
    const auto b = bbu::generate_population(config);
    CHECK(a.group_ids == b.group_ids);
    CHECK(a.costs == b.costs);

    auto other = config;
    other.seed = 100;
    const auto c = bbu::generate_population(other);
    CHECK(a.costs != c.costs);
}

TEST_CASE("group counts follow the frequencies to within rounding") {
    PopulationConfig config;
    config.population_size = 1003;
    config.seed = 5;
    config.groups = {
        {"a", 0.5, 0.1, 0.32},
        {"b", 0.5, 0.1, 0.33},
        {"c", 0.5, 0.1, 0.35},
    };
    const auto pop = bbu::generate_population(config);
    CHECK(pop.size() == 1003);
    for (std::size_t g = 0; g < config.groups.size(); ++g) {
        const double quota = config.groups[g].frequency * 1003.0;
        const auto count = static_cast<double>(pop.group_size(static_cast<std::int32_t>(g)));
        CHECK(std::abs(count - quota) < 1.0);
    }
}

TEST_CASE("symmetric groups have zero disparity and every cost is in range") {
    PopulationConfig config;
    config.population_size = 5000;
    config.seed = 21;
    config.groups = {
        {"a", 0.3, 0.2, 0.5},
        {"b", 0.3, 0.2, 0.5},
    };
    const auto pop = bbu::generate_population(config);
    CHECK(std::abs(bbu::true_disparity(pop, 0)) < 1e-12);
    for (const double c : pop.costs) {
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
    }
}

TEST_CASE("planted disparities are realized on large populations") {
    const auto config = table_analog_config(7);
    const auto pop = bbu::generate_population(config);
    CHECK(pop.warnings.empty());
    const std::int32_t government = pop.group_index("government");
    REQUIRE(government >= 0);
    // antithetic pairing pins group means, so the planted value is hit almost
    // exactly, far inside the 3-standard-error fidelity contract
    const double planted = (10.0 * 0.154 - 1.273) / 9.0;
    CHECK(std::abs(bbu::true_disparity(pop, government) - planted) < 1e-9);
}

TEST_CASE("boundary-leaking configs clamp and warn") {
    PopulationConfig config;
    config.population_size = 2000;
    config.seed = 3;
    config.groups = {
        {"edge", 0.02, 0.1, 0.5},
        {"mid", 0.5, 0.1, 0.5},
    };
    const auto pop = bbu::generate_population(config);
    REQUIRE(!pop.warnings.empty());
    CHECK(pop.warnings.front().find("edge") != std::string::npos);
    for (const double c : pop.costs) {
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
    }
}

TEST_CASE("invalid configs are rejected") {
    PopulationConfig config;
    config.population_size = 100;
    config.groups = {{"a", 0.5, 0.1, 0.6}, {"b", 0.5, 0.1, 0.6}};
    CHECK_THROWS_AS(bbu::generate_population(config), bbu::InvalidConfigError);
    config.groups = {{"a", 0.5, 0.1, 1.0}};
    config.population_size = 0;
    CHECK_THROWS_AS(bbu::generate_population(config), bbu::InvalidConfigError);
    config.population_size = 100;
    config.groups = {{"a", 1.5, 0.1, 1.0}};
    CHECK_THROWS_AS(bbu::generate_population(config), bbu::InvalidConfigError);
}

TEST_CASE("true disparity over hand-built members") {
    bbu::Population pop;
    pop.group_names = {"in", "out"};
    pop.group_ids = {0, 0, 1, 1};
    pop.costs = {0.4, 0.2, 0.1, 0.1};
    CHECK(bbu::true_disparity(pop, 0) == doctest::Approx(0.2).epsilon(1e-15));

    bbu::Population flat;
    flat.group_names = {"in", "out"};
    flat.group_ids = {0, 1, 0, 1};
    flat.costs = {0.3, 0.3, 0.3, 0.3};
    CHECK(bbu::true_disparity(flat, 0) == 0.0);

    CHECK_THROWS_AS(bbu::true_disparity(pop, 7), bbu::EmptyGroupError);
}

TEST_CASE("true disparity agrees exactly with the sample estimator") {
    const auto pop = bbu::generate_population(table_analog_config(13));
    for (std::int32_t g = 0; g < static_cast<std::int32_t>(pop.group_count()); ++g) {
        const auto annotated = bbu::annotate(pop, g);
        const auto est = bbu::estimate_groupwise_disparity(annotated, testutil::raw_cost_fn());
        CHECK(est.delta_bar == bbu::true_disparity(pop, g));
    }
}

TEST_CASE("cost table rows are antisymmetric for two groups") {
    PopulationConfig config;
    config.population_size = 4000;
    config.seed = 9;
    config.groups = {
        {"a", 0.4, 0.1, 0.5},
        {"b", 0.2, 0.1, 0.5},
    };
    const auto pop = bbu::generate_population(config);
    const auto rows = bbu::cost_table(pop);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].delta == doctest::Approx(-rows[1].delta).epsilon(1e-15));
    CHECK(rows[0].delta == rows[0].in_group_mean - rows[0].out_group_mean);
}

TEST_CASE("cost table reproduces the planted deltas") {
    const auto pop = bbu::generate_population(table_analog_config(7));
    const auto rows = bbu::cost_table(pop);
    REQUIRE(rows.size() == 10);
    const double mean_sum = 1.273;
    const std::vector<double> in_means = {0.116, 0.122, 0.154, 0.105, 0.115,
                                          0.132, 0.147, 0.125, 0.111, 0.146};
    for (std::size_t g = 0; g < rows.size(); ++g) {
        const double planted = (10.0 * in_means[g] - mean_sum) / 9.0;
        CHECK(std::abs(rows[g].delta - planted) < 0.001);
        CHECK(rows[g].delta == bbu::true_disparity(pop, static_cast<std::int32_t>(g)));
    }
}

TEST_CASE("single-group populations cannot build a table") {
    bbu::Population pop;
    pop.group_names = {"only"};
    pop.group_ids = {0, 0};
    pop.costs = {0.1, 0.2};
    CHECK_THROWS_AS(bbu::cost_table(pop), bbu::EmptyGroupError);
}

TEST_CASE("populations round-trip through csv and configs load from json") {
    TempDir dir;
    const auto pop = bbu::generate_population(table_analog_config(31));
    const auto csv_path = dir.file("pop.csv");
    bbu::write_population_csv(csv_path, pop);
    const auto loaded = bbu::load_population(csv_path);
    CHECK(loaded.group_names == pop.group_names);
    CHECK(loaded.group_ids == pop.group_ids);
    CHECK(loaded.costs == pop.costs);

    const auto json_path = dir.file("config.json");
    testutil::write_file(json_path, R"({
      "population_size": 1000,
      "seed": 11,
      "groups": [
        {"name": "a", "mean_cost": 0.3, "spread": 0.05, "frequency": 0.5},
        {"name": "b", "mean_cost": 0.2, "spread": 0.05, "frequency": 0.5}
      ]
    })");
    const auto generated = bbu::load_population(json_path);
    CHECK(generated.size() == 1000);
    CHECK(generated.group_names == std::vector<std::string>{"a", "b"});
    CHECK(std::abs(bbu::true_disparity(generated, 0) - 0.1) < 1e-9);

    testutil::write_file(json_path, "{\"groups\": \"oops\"}");
    CHECK_THROWS_AS(bbu::load_population(json_path), bbu::InvalidConfigError);
}

}  // TEST_SUITE
