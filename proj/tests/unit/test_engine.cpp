#include <gtest/gtest.h>

#include <cmath>
#include <mutex>
#include <thread>

#include "cournot/config.hpp"
#include "cournot/engine.hpp"
#include "cournot/errors.hpp"
#include "cournot/run_log.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace cournot;

namespace {

MarketSpec spec_of(std::vector<double> q) {
  MarketSpec s;
  s.baseline_quantities = std::move(q);
  return s;
}

ScriptedKind constant(double q, double pct) { return ScriptedKind{{ScriptStep{q, pct}}, "test"}; }

RunConfig base_config(std::vector<double> q, std::vector<AgentKind> roster) {
  RunConfig c;
  c.market = spec_of(std::move(q));
  c.roster = std::move(roster);
  return c;
}

}  // namespace

TEST(Step, NashPairResolvesToBaseline) {
  const MarketModel m = derive_model(spec_of({150, 150}));
  const PeriodRecord r = step(m, {nash_decide(m, 0), nash_decide(m, 1)});
  EXPECT_DOUBLE_EQ(r.total_quantity, 300);
  EXPECT_DOUBLE_EQ(r.price, 1.0);
  EXPECT_NEAR(r.unit_costs[0], 0.5, 1e-12);
  EXPECT_NEAR(r.profits[0], 60, 1e-9);
  EXPECT_NEAR(r.profits[1], 60, 1e-9);
}

TEST(Step, AsymmetricExample) {
  const MarketModel m = derive_model(spec_of({150, 150}));
  const PeriodRecord r = step(m, {Decision::make(m, 0, 100, 0), Decision::make(m, 1, 200, 20)});
  EXPECT_DOUBLE_EQ(r.price, 1.0);
  EXPECT_DOUBLE_EQ(r.unit_costs[0], 1.0);
  EXPECT_NEAR(r.profits[0], 0.0, 1e-12);
  EXPECT_NEAR(r.profits[1], 200 * 0.5 - 15, 1e-9);
}

TEST(Step, ZeroQuantityLosesInvestment) {
  const MarketModel m = derive_model(spec_of({150, 150}));
  const PeriodRecord r = step(m, {Decision::make(m, 0, 0, 10), nash_decide(m, 1)});
  EXPECT_DOUBLE_EQ(r.profits[0], -7.5);
  EXPECT_THROW(step(m, {Decision::make(m, 0, 0, 0), Decision::make(m, 1, 0, 0)}), DomainError);
}

TEST(Step, ConservesRevenue) {
  const oracle::Market om = oracle::five_firm();
  const MarketModel m = derive_model(spec_of(om.q_hat));
  oracle::Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Decision> d;
    for (std::size_t i = 0; i < 5; ++i) {
      d.push_back(Decision::make(m, i, rng.uniform(0, 2) * om.q_hat[i], rng.uniform(0, 20)));
    }
    const PeriodRecord r = step(m, d);
    double lhs = 0.0;
    for (std::size_t i = 0; i < 5; ++i) lhs += r.profits[i] + r.unit_costs[i] * d[i].quantity + d[i].investment;
    // With eps = -1 revenue p * Q is the constant A.
    EXPECT_NEAR(lhs, m.scale(), 1e-9 * m.scale());
    for (std::size_t i = 0; i < 5; ++i) {
      double others = r.total_quantity - d[i].quantity;
      EXPECT_NEAR(r.profits[i], om.profit(i, others, d[i].quantity, d[i].investment), 1e-9);
    }
  }
}

TEST(Step, PermutationInvariance) {
  const MarketModel m = derive_model(spec_of({100, 100, 100, 100}));
  oracle::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Decision> d;
    for (std::size_t i = 0; i < 4; ++i) d.push_back(Decision::make(m, i, rng.uniform(10, 200), rng.uniform(0, 20)));
    const PeriodRecord a = step(m, d);
    std::vector<std::size_t> perm{2, 0, 3, 1};
    std::vector<Decision> pd;
    for (auto k : perm) pd.push_back(d[k]);
    const PeriodRecord b = step(m, pd);
    EXPECT_EQ(a.total_quantity, b.total_quantity);
    EXPECT_EQ(a.price, b.price);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(b.profits[j], a.profits[perm[j]]);
  }
}

TEST(Run, NashPairStallsAfterWindow) {
  const RunResult r = run(base_config({150, 150}, {NashKind{}, NashKind{}}));
  EXPECT_EQ(r.termination, Termination::Stalled);
  EXPECT_EQ(r.history.size(), 11u);
  for (const auto& rec : r.history) EXPECT_DOUBLE_EQ(rec.price, 1.0);
}

TEST(Run, StallDisabledRunsToMax) {
  RunConfig c = base_config({150, 150}, {NashKind{}, NashKind{}});
  c.stall_window = 0;
  c.max_periods = 40;
  const RunResult r = run(c);
  EXPECT_EQ(r.termination, Termination::MaxPeriods);
  EXPECT_EQ(r.history.size(), 40u);
}

TEST(Run, BestResponseAgainstNashHoldsNash) {
  RunConfig c = base_config({150, 150}, {constant(150, 20), BestResponseKind{}});
  c.stall_window = 0;
  const RunResult r = run(c);
  ASSERT_EQ(r.history.size(), 150u);
  for (std::size_t t = 1; t < r.history.size(); ++t) {
    EXPECT_NEAR(r.history[t].price, 1.0, 1e-6);
    EXPECT_NEAR(r.history[t].decisions[1].quantity, 150, 1e-6);
  }
}

TEST(Run, BestResponseToUnderproducer) {
  RunConfig c = base_config({150, 150}, {constant(75, 20), BestResponseKind{}});
  c.max_periods = 5;
  const RunResult r = run(c);
  const Decision& d = r.history[1].decisions[1];
  EXPECT_NEAR(d.quantity, std::sqrt(300.0 * 75 / 0.5) - 75, 1e-6);
  EXPECT_NEAR(d.quantity, 137.132, 1e-3);
  EXPECT_DOUBLE_EQ(d.invest_percent, 20);
  const oracle::Point g = oracle::grid_best_response(oracle::two_firm(), 1, 75);
  EXPECT_NEAR(d.quantity, g.q, 1e-3);
}

TEST(Run, LogsAreByteIdentical) {
  test_util::TempDir dir;
  RunConfig c = base_config({350, 250, 200, 150, 50},
                            {constant(300, 10), BestResponseKind{}, NashKind{}, BestResponseKind{true}, NashKind{}});
  c.max_periods = 30;
  c.seed = 4;
  c.output_path = dir.path() / "a.jsonl";
  run(c);
  c.output_path = dir.path() / "b.jsonl";
  run(c);
  const std::string a = test_util::read(dir.path() / "a.jsonl");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, test_util::read(dir.path() / "b.jsonl"));
}

TEST(Run, LogMatchesInMemoryHistory) {
  test_util::TempDir dir;
  RunConfig c = base_config({150, 150}, {constant(100, 5), BestResponseKind{}});
  c.max_periods = 12;
  c.output_path = dir.path() / "h.jsonl";
  const RunResult r = run(c);
  const RunLog log = read_run_log(c.output_path);
  EXPECT_EQ(log.records, r.history);
  EXPECT_EQ(log.header.run_id, r.run_id);
  ASSERT_TRUE(log.trailer.has_value());
  EXPECT_EQ(log.trailer->periods, r.history.size());
}

namespace {
class FailingAfter : public LlmTransport {
 public:
  explicit FailingAfter(std::size_t ok_periods) : ok_(ok_periods) {}
  std::string complete(const LlmRequest& r) override {
    if (r.period >= ok_) throw TransportError("down");
    return test_util::reply(140, 10);
  }

 private:
  std::size_t ok_;
};

class Deterministic : public LlmTransport {
 public:
  std::string complete(const LlmRequest& r) override {
    return test_util::reply(100.0 + static_cast<double>(r.period % 7) * 5 + static_cast<double>(r.firm), 10.0 + static_cast<double>(r.firm));
  }
};
}  // namespace

TEST(Run, TransportFailureKeepsCompletedPeriods) {
  test_util::TempDir dir;
  RunConfig c = base_config({150, 150}, {LlmKind{}, NashKind{}});
  c.output_path = dir.path() / "h.jsonl";
  RunHooks hooks{std::make_shared<FailingAfter>(3)};
  EXPECT_THROW(run(c, hooks), TransportError);
  const RunLog log = read_run_log(c.output_path);
  EXPECT_EQ(log.records.size(), 3u);
  EXPECT_FALSE(log.trailer.has_value());
}

TEST(Run, ConcurrentAndSequentialLlmCallsAgree) {
  RunConfig c = base_config({350, 250, 200, 150, 50}, {LlmKind{}, LlmKind{}, LlmKind{}, LlmKind{}, NashKind{}});
  c.max_periods = 20;
  RunHooks hooks{std::make_shared<Deterministic>()};
  const RunResult a = run(c, hooks);
  c.concurrent_llm = false;
  const RunResult b = run(c, hooks);
  EXPECT_EQ(a.history, b.history);
}

TEST(Run, ValidatesConfig) {
  RunConfig c = base_config({150, 150}, {NashKind{}});
  EXPECT_THROW(run(c), ConfigError);
  c.roster = {NashKind{}, NashKind{}};
  c.max_periods = 0;
  EXPECT_THROW(run(c), ConfigError);
}

TEST(Regulation, TopKByShare) {
  const RunConfig base = base_config({50, 350, 150, 250, 200}, {NashKind{}, NashKind{}, NashKind{}, NashKind{}, NashKind{}});
  const RunConfig r2 = regulation_roster(base, 2);
  EXPECT_TRUE(std::holds_alternative<BestResponseKind>(r2.roster[1]));
  EXPECT_TRUE(std::holds_alternative<BestResponseKind>(r2.roster[3]));
  EXPECT_TRUE(std::holds_alternative<NashKind>(r2.roster[4]));
  EXPECT_TRUE(std::holds_alternative<NashKind>(r2.roster[0]));
  const RunConfig r0 = regulation_roster(base, 0);
  EXPECT_EQ(r0.roster, base.roster);
  EXPECT_THROW(regulation_roster(base, 6), ConfigError);
  const RunConfig ties = regulation_roster(base_config({100, 100, 100}, {NashKind{}, NashKind{}, NashKind{}}), 1);
  EXPECT_TRUE(std::holds_alternative<BestResponseKind>(ties.roster[0]));
  EXPECT_TRUE(std::holds_alternative<NashKind>(ties.roster[1]));
}

TEST(Regulation, FullRegulationPinsPriceAgainstColluders) {
  RunConfig base = base_config({350, 250, 200, 150, 50}, {});
  for (int i = 0; i < 5; ++i) base.roster.push_back(parse_agent_kind("colluder"));
  base.stall_window = 0;
  base.max_periods = 60;
  const RunResult free = run(base);
  EXPECT_NEAR(free.history.back().price, 2.0, 1e-9);
  const RunResult all = run(regulation_roster(base, 5));
  EXPECT_NEAR(all.history.back().price, 1.0, 1e-6);
}
