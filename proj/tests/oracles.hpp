#pragma once

// Independent reference implementations used by the tests. Nothing here calls
// into the library: every value is recomputed from the market primitives with
// plain loops, sorting and grids.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

struct Market {
  std::vector<double> q_hat;
  double p_hat = 1.0;
  double eps = -1.0;
  double c = 0.2;

  double total() const { return std::accumulate(q_hat.begin(), q_hat.end(), 0.0); }
  double scale() const { return std::pow(total(), -eps) * p_hat; }
  double price(double Q) const { return scale() * std::pow(Q, eps); }

  // First-order condition of the baseline: p + p'(Q) q = w.
  double w_hat(std::size_t i) const { return p_hat + eps * p_hat * q_hat[i] / total(); }
  double pi_hat(std::size_t i) const { return (p_hat - w_hat(i)) * q_hat[i]; }
  double cap(std::size_t i) const { return c * pi_hat(i); }

  // Fitted through firm 0's baseline point: w(b_hat) = w_hat with k3 = p_hat.
  double k1() const { return (w_hat(0) - p_hat) / std::sqrt(cap(0)); }
  double cost(double b) const { return k1() * std::sqrt(b) + p_hat; }

  double profit(std::size_t i, double others, double q, double b) const {
    if (q == 0.0) return -b;
    return (price(others + q) - cost(b)) * q - b;
  }
};

inline Market two_firm() { return Market{{150, 150}}; }
inline Market five_firm() { return Market{{350, 250, 200, 150, 50}}; }

struct Point {
  double q = 0.0;
  double b = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

// Best quantity for a fixed investment by repeated zooming grids.
inline Point grid_best_quantity(const Market& m, std::size_t i, double others, double b, double q_max) {
  double lo = 0.0, hi = q_max;
  Point best;
  for (int round = 0; round < 12; ++round) {
    constexpr int kN = 400;
    const double h = (hi - lo) / kN;
    for (int k = 0; k <= kN; ++k) {
      const double q = lo + h * k;
      const double v = m.profit(i, others, q, b);
      if (v > best.value) best = {q, b, v};
    }
    lo = std::max(0.0, best.q - 2 * h);
    hi = best.q + 2 * h;
  }
  return best;
}

// Brute-force best response: 201 investment levels, each with a zooming
// quantity grid.
inline Point grid_best_response(const Market& m, std::size_t i, double others) {
  Point best;
  for (int k = 0; k <= 200; ++k) {
    const double b = m.cap(i) * k / 200.0;
    const Point p = grid_best_quantity(m, i, others, b, 3.0 * m.total());
    if (p.value > best.value) best = p;
  }
  return best;
}

// Argmax of profit over a uniform b grid for fixed (others, q).
inline Point grid_best_investment(const Market& m, std::size_t i, double others, double q, int points = 2000) {
  Point best;
  for (int k = 0; k < points; ++k) {
    const double b = m.cap(i) * k / (points - 1);
    const double v = m.profit(i, others, q, b);
    if (v > best.value) best = {q, b, v};
  }
  return best;
}

// Sort-based percentile, linear interpolation at p (n - 1).
inline double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Percent-space diagnostic, written out term by term.
inline double h(double Q, double q) {
  const double S = Q + q;
  return 100.0 / S + q / (2.0 * 0.2 * 100.0) - 1.0 - 100.0 * q / (S * S);
}

// Sequential best-response replay using the grid best response; returns
// the number of sweeps until every quantity is within tol * q_hat.
inline int replay_sequential(const Market& m, std::vector<double> q, double tol, int max_iter) {
  auto done = [&] {
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (std::abs(q[i] - m.q_hat[i]) > tol * m.q_hat[i]) return false;
    }
    return true;
  };
  if (done()) return 0;
  std::vector<std::size_t> order(q.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return m.q_hat[a] > m.q_hat[b]; });
  for (int k = 1; k <= max_iter; ++k) {
    for (std::size_t i : order) {
      double others = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) others += j == i ? 0.0 : q[j];
      q[i] = grid_best_response(m, i, others).q;
    }
    if (done()) return k;
  }
  return -1;
}

// Small deterministic generator for hand-rolled property tests.
struct Rng {
  std::uint64_t s;
  explicit Rng(std::uint64_t seed) : s(seed * 0x9e3779b97f4a7c15ULL + 1) {}
  std::uint64_t next() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

}  // namespace oracle
