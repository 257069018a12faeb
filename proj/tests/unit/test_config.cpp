#include <gtest/gtest.h>

#include "cournot/config.hpp"
#include "cournot/errors.hpp"
#include "test_util.hpp"

using namespace cournot;

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Presets, Markets) {
  EXPECT_EQ(preset_market("two_firm").baseline_quantities, (std::vector<double>{150, 150}));
  EXPECT_EQ(preset_market("five_firm").baseline_quantities, (std::vector<double>{350, 250, 200, 150, 50}));
  EXPECT_EQ(preset_market("six_firm").baseline_quantities.size(), 6u);
  EXPECT_EQ(preset_market("five_firm_percent").baseline_quantities, (std::vector<double>{35, 25, 20, 15, 5}));
  EXPECT_THROW(preset_market("seven_firm"), ConfigError);
  const ExperimentConfig e = load_config_or_preset("preset:five_firm");
  EXPECT_EQ(e.run.roster.size(), 5u);
  EXPECT_TRUE(std::holds_alternative<NashKind>(e.run.roster[0]));
}

TEST(Roster, Entries) {
  EXPECT_EQ(parse_agent_kind("nash"), AgentKind{NashKind{}});
  EXPECT_EQ(parse_agent_kind("br"), AgentKind{BestResponseKind{}});
  EXPECT_EQ(parse_agent_kind("best_response+check"), AgentKind{BestResponseKind{true}});
  EXPECT_EQ(parse_agent_kind("llm"), AgentKind{LlmKind{}});
  const auto inline_kind = std::get<ScriptedKind>(parse_agent_kind("scripted:@75/20;0.5x/max"));
  ASSERT_EQ(inline_kind.steps.size(), 2u);
  EXPECT_EQ(inline_kind.steps[0], (ScriptStep{75, 20, false, false}));
  EXPECT_EQ(inline_kind.steps[1], (ScriptStep{0.5, 0, true, true}));
  const auto colluder = std::get<ScriptedKind>(parse_agent_kind("colluder"));
  EXPECT_EQ(colluder.steps[0], (ScriptStep{0.5, 0, true, true}));
  EXPECT_EQ(parse_roster("nash, br").size(), 2u);
  EXPECT_THROW(parse_agent_kind("oracle"), ConfigError);
  EXPECT_THROW(parse_agent_kind("scripted:@abc/1"), ConfigError);
}

TEST(Roster, ScriptFile) {
  test_util::TempDir dir;
  test_util::write(dir.path() / "s.json",
                   R"([{"quantity": 75, "invest_percent": 20}, {"quantity_multiple": 0.5, "invest_percent": "max"}])");
  const auto k = std::get<ScriptedKind>(parse_agent_kind("scripted:s.json", dir.path()));
  ASSERT_EQ(k.steps.size(), 2u);
  EXPECT_TRUE(k.steps[1].relative);
  EXPECT_TRUE(k.steps[1].max_invest);
  test_util::write(dir.path() / "bad.json", R"([{"qty": 1}])");
  EXPECT_THROW(parse_agent_kind("scripted:bad.json", dir.path()), ConfigError);
}

TEST(ConfigDoc, ParsesSections) {
  const ExperimentConfig e = parse_config(R"({
    "market": {"baseline_quantities": [100, 200], "baseline_price": 2, "elasticity": -1, "invest_fraction_cap": 0.1},
    "run": {"roster": ["nash", "br"], "max_periods": 30, "stall_window": 0, "seed": 9},
    "llm": {"model": "m", "temperature": 0.5, "max_retries": 1},
    "analysis": {"window": 20, "band": 0.05}
  })");
  EXPECT_EQ(e.run.market.baseline_price, 2);
  EXPECT_EQ(e.run.max_periods, 30u);
  EXPECT_EQ(e.run.seed, 9u);
  EXPECT_EQ(e.run.llm.model_name, "m");
  EXPECT_EQ(e.run.llm.max_retries, 1);
  EXPECT_EQ(e.analysis.window, 20u);
  EXPECT_EQ(e.analysis.band, 0.05);
}

TEST(ConfigDoc, RejectsBadInput) {
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config(R"({"market": {"preset": "two_firm"}, "extra": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"market": {"preset": "two_firm"}, "run": {"max_period": 3}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"market": {"preset": "two_firm"}, "run": {"roster": ["nash"]}})").run.validate(),
               ConfigError);
  EXPECT_THROW(load_config("/nonexistent.json"), std::exception);
}

TEST(Digest, StableAndSensitive) {
  ExperimentConfig a = load_config_or_preset("preset:two_firm");
  ExperimentConfig b = a;
  b.run.output_path = "elsewhere.jsonl";
  EXPECT_EQ(config_digest(a.run), config_digest(b.run));
  EXPECT_EQ(config_digest(a.run).size(), 16u);
  b.run.seed = 1;
  EXPECT_EQ(config_digest(a.run), config_digest(b.run));
  EXPECT_NE(run_id(a.run), run_id(b.run));
  b.run.max_periods = 10;
  EXPECT_NE(config_digest(a.run), config_digest(b.run));
  b = a;
  b.run.roster[1] = BestResponseKind{};
  EXPECT_NE(config_digest(a.run), config_digest(b.run));
}
