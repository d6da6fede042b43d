#include "humble/config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace humble;

TEST_CASE("minimal document gets every default") {
    const Scenario s = parse_config("model: {mean0: -1, mean1: 1}\ncosts: {c01: 9, c10: 1}\n");
    Scenario expected;
    expected.costs = CostSpec(9, 1);
    CHECK(s == expected);
    CHECK(s.seed == 20220801);
    CHECK(s.feedback.q_alpha == 5.0);
    CHECK(s.feedback.q_beta == 2.0);
    CHECK(s.policy.kind == PolicyKind::point);
    CHECK_FALSE(s.policy.band.lower.has_value());
    CHECK(s.output.formats == std::vector<std::string>{"csv", "json"});
    CHECK(parse_config("") == Scenario{});
}

TEST_CASE("full document") {
    const Scenario s = parse_config(R"(
# comment
model:
  mean0: -0.5
  mean1: 1.5
  stddev0: 0.8
  stddev1: 0.8
  prior0: 0.7
  prior1: 0.3
  groups:
    - {id: a, weight: 0.4}
    - {id: b, weight: 0.6, mean1: 1.0}
costs: {c01: 3, c10: 2}
believed_prior0: 0.9
policy:
  kind: band
  threshold: 0.25
  band: {lower: -0.1, upper: 0.9, action: defer, oracle_accuracy: 0.8}
  schedule: {start: 0, end: 1, rounds: 4, shape: geometric_gap}
  acquisition: {confidence_floor: 0.95, sharpen_factor: 0.5, max_steps: 3, step_cost: 0.1}
feedback:
  rounds: 7
  cohort_size: 123
  delta_up: 0.01
  delta_down: 0.02
  chain_weight: 0.5
  initial_q: prior
seed: 18446744073709551615
mc_samples: 0
output: {directory: results, formats: [json], figures: [1, 8]}
)");
    CHECK(s.model.stddev0 == 0.8);
    REQUIRE(s.model.groups.size() == 2);
    CHECK(s.model.groups[0].mean0 == -0.5);  // inherited from the top-level model
    CHECK(s.model.groups[1].mean1 == 1.0);
    CHECK(s.model.groups[1].prior0 == 0.7);
    CHECK(s.costs.c01 == 3.0);
    CHECK(s.believed_prior0 == 0.9);
    CHECK(s.policy.kind == PolicyKind::band);
    CHECK(s.policy.band.action == BandAction::defer);
    CHECK(s.policy.schedule.shape == ScheduleShape::geometric_gap);
    CHECK(s.policy.schedule.rounds == 4u);
    CHECK(s.policy.acquisition.max_steps == 3);
    CHECK(s.feedback.initial_q == InitialQ::prior);
    CHECK(s.seed == 18446744073709551615ull);
    CHECK(s.mc_samples == 0);
    CHECK(s.output.figures == std::vector<int>{1, 8});
    CHECK(s.grouped_population().has_value());
    CHECK(s.wants_format("json"));
    CHECK_FALSE(s.wants_format("csv"));
}

TEST_CASE("priors must sum to 1") {
    try {
        parse_config("model: {prior0: 0.6, prior1: 0.6}\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("priors must sum to 1") != std::string::npos);
        CHECK(e.key_path() == "model");
    }
}

TEST_CASE("band lower > upper names the key path") {
    try {
        parse_config("policy: {kind: band, band: {lower: 1.0, upper: 0.0}}\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key_path() == "policy.band");
        CHECK(std::string(e.what()).find("policy.band") != std::string::npos);
    }
}

TEST_CASE("constraint violations name the key") {
    const auto path_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return e.key_path();
        }
        return std::string("<none>");
    };
    CHECK(path_of("costs: {c01: 0}\n") == "costs.c01");
    CHECK(path_of("model: {stddev1: -1}\n") == "model.stddev1");
    CHECK(path_of("feedback: {rounds: 0}\n") == "feedback.rounds");
    CHECK(path_of("policy: {band: {p_trust: 2}}\n") == "policy.band.p_trust");
    CHECK(path_of("output: {figures: [9]}\n") == "output.figures");
    CHECK(path_of("output: {formats: [xml]}\n") == "output.formats");
    CHECK(path_of("model: {groups: [{id: a, weight: 0.5}]}\n") == "model.groups");
    CHECK(path_of("model: {groups: [{id: a, weight: 0.5}, {id: a, weight: 0.5}]}\n") == "model.groups[1].id");
    CHECK(path_of("policy: {kind: hedge}\n") == "policy.kind");
    CHECK(path_of("feedback: {rounds: many}\n") == "feedback.rounds");
    CHECK(path_of("believed_prior0: 1.0\n") == "believed_prior0");
    CHECK(path_of("feedback: {recalibrate: true}\npolicy: {kind: band}\n") == "feedback.recalibrate");
}

TEST_CASE("unknown keys are rejected") {
    try {
        parse_config("model: {mean0: -1}\ncosts: {c01: 1, c01x: 2}\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key_path() == "costs.c01x");
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_config("sead: 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("policy: {band: {width: 3}}\n"), ConfigError);
}

TEST_CASE("syntax errors carry line and column") {
    try {
        parse_config("model:\n  mean0: [1, 2\ncosts: {c01: 1}\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() > 0);
        CHECK(e.column() > 0);
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
}

TEST_CASE("emit_config round-trips") {
    Scenario s;
    s.model.mean0 = -0.3;
    s.model.stddev1 = 1.0 / 3.0;
    s.model.stddev0 = 1.0 / 3.0;
    s.model.prior0 = 0.1;
    s.model.prior1 = 0.9;
    s.model.groups = {{"x", 0.25, -0.3, 1, 1.0 / 3.0, 1.0 / 3.0, 0.1, 0.9}, {"y", 0.75, -1, 2, 0.5, 0.5, 0.5, 0.5}};
    s.costs = CostSpec(27.0, 0.1);
    s.believed_prior0 = 0.123456789012345678;
    s.policy.kind = PolicyKind::schedule;
    s.policy.schedule.start = -0.25;
    s.policy.schedule.rounds = 12;
    s.policy.band.upper = 0.7;
    s.feedback.rounds = 5;
    s.feedback.initial_q = InitialQ::prior;
    s.feedback.chain_weight = 0.1;
    s.seed = 0xFFFFFFFFFFFFFFFFull;
    s.output.formats = {"json"};
    s.output.figures = {3, 1};
    const std::string text = emit_config(s);
    CHECK(parse_config(text) == s);
    CHECK(emit_config(parse_config(text)) == text);
    CHECK(parse_config(emit_config(Scenario{})) == Scenario{});
    CHECK(scenario_to_json(s)["seed"].get<std::uint64_t>() == s.seed);
}

TEST_CASE("load_config") {
    const auto path = std::filesystem::temp_directory_path() / "humble_config_test.yaml";
    std::ofstream(path) << "costs: {c01: 9, c10: 1}\n";
    CHECK(load_config(path).costs.c01 == 9.0);
    CHECK_THROWS_AS(load_config(path.string() + ".missing"), ConfigError);
}
