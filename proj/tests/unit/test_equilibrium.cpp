#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "cournot/equilibrium.hpp"
#include "cournot/errors.hpp"
#include "oracles.hpp"

using namespace cournot;

namespace {
MarketModel model_of(std::vector<double> q) {
  MarketSpec s;
  s.baseline_quantities = std::move(q);
  return derive_model(s);
}
}  // namespace

TEST(VerifyNash, PassesOnShippedMarkets) {
  for (auto q : {std::vector<double>{150, 150}, std::vector<double>{350, 250, 200, 150, 50},
                 std::vector<double>{314, 202, 169, 145, 125, 46}}) {
    const DeviationReport r = verify_nash(model_of(q));
    EXPECT_TRUE(r.passed);
    for (const auto& f : r.firms) EXPECT_LE(f.max_gain, 1e-9);
  }
}

TEST(VerifyNash, FailsWhenTheCostCurveIsCorrupted) {
  const MarketModel m = model_of({150, 150});
  CostCurve c = m.cost_curve();
  c.k1 *= 1.5;
  EXPECT_FALSE(verify_nash(m.with_cost_curve(c)).passed);
}

TEST(VerifyNash, RejectsBadGrids) {
  const MarketModel m = model_of({150, 150});
  EXPECT_THROW(verify_nash(m, 0.5, 2), std::invalid_argument);
  EXPECT_THROW(verify_nash(m, 0.0), std::invalid_argument);
  EXPECT_THROW(verify_nash(m, 1.5), std::invalid_argument);
}

TEST(ProofH, MatchesOracleAndClosedFormMinimum) {
  oracle::Rng rng(9);
  for (int k = 0; k < 1000; ++k) {
    const double Q = rng.uniform(5, 100), q = rng.uniform(0, 200);
    EXPECT_NEAR(proof_h(Q, q), oracle::h(Q, q), 1e-13);
  }
  for (double Q : {5.0, 20.0, 31.7, 60.0, 89.0}) {
    const double qs = proof_h_critical_quantity(Q);
    ASSERT_GE(qs, 0.0);
    // Brute-force minimum over a fine grid agrees with the critical point.
    double best = 1e300;
    for (int j = 0; j <= 200000; ++j) best = std::min(best, oracle::h(Q, 100.0 * j / 200000));
    EXPECT_NEAR(proof_h(Q, qs), best, 1e-9);
    EXPECT_NEAR(proof_h(Q, qs), 0.75 * std::cbrt(Q) - 0.025 * Q - 1.0, 1e-12);
  }
  // Past Q-i = 20^(3/2) the stationary point is negative and the minimum over
  // q >= 0 sits at q = 0.
  EXPECT_LT(proof_h_critical_quantity(94.0), 0.0);
  double best94 = 1e300;
  for (int j = 0; j <= 20000; ++j) best94 = std::min(best94, oracle::h(94.0, 100.0 * j / 20000));
  EXPECT_NEAR(best94, proof_h(94.0, 0.0), 1e-15);
  EXPECT_THROW(proof_h(0.0, 0.0), DomainError);
}

TEST(ProofH, SweepIsPositive) {
  const auto t0 = std::chrono::steady_clock::now();
  const HSweep s = sweep_proof_h();
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(1));
  EXPECT_TRUE(s.all_positive);
  EXPECT_GT(s.min_value, 0.0);
  EXPECT_EQ(s.points, 190u * 401u);
}
