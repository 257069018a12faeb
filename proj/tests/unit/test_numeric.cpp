#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cournot/numeric.hpp"
#include "oracles.hpp"

using namespace cournot;

TEST(OrderedSum, IsPermutationInvariantBitForBit) {
  oracle::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(2 + rng.index(8));
    for (double& x : v) x = rng.uniform(0.0, 1e3) * std::pow(10.0, rng.uniform(-6, 6));
    const double s = ordered_sum(v);
    for (int k = 0; k < 10; ++k) {
      for (std::size_t i = v.size() - 1; i > 0; --i) std::swap(v[i], v[rng.index(i + 1)]);
      EXPECT_EQ(ordered_sum(v), s);
    }
  }
}

TEST(GoldenSection, FindsInteriorAndBoundaryMaxima) {
  const Maximum m = golden_section_max([](double x) { return -(x - 1.3) * (x - 1.3); }, 0.0, 4.0, 1e-10);
  EXPECT_NEAR(m.x, 1.3, 1e-8);
  const Maximum edge = golden_section_max([](double x) { return x; }, 0.0, 2.0, 1e-10);
  EXPECT_EQ(edge.x, 2.0);
  EXPECT_THROW(golden_section_max([](double x) { return x; }, 1.0, 0.0, 1e-6), std::invalid_argument);
}

TEST(Percentile, MatchesSortOracleOnRandomSeries) {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + rng.index(150));
    for (double& x : v) x = rng.uniform(-5, 5);
    for (double p : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0}) {
      EXPECT_DOUBLE_EQ(percentile(v, p), oracle::percentile(v, p));
    }
  }
}

TEST(Percentile, RejectsEmptyAndOutOfRange) {
  std::vector<double> empty;
  EXPECT_THROW(percentile(empty, 0.5), std::invalid_argument);
  std::vector<double> one{1.0};
  EXPECT_THROW(percentile(one, 1.5), std::invalid_argument);
  EXPECT_THROW(mean(empty), std::invalid_argument);
}
