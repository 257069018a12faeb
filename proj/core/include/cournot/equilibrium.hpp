#pragma once

#include <cstddef>
#include <vector>

#include "cournot/market.hpp"

namespace cournot {

struct FirmDeviation {
  std::size_t firm = 0;
  double nash_profit = 0.0;  // profit at the status-quo pair

  double best_grid_quantity = 0.0;
  double best_grid_investment = 0.0;
  double best_grid_profit = 0.0;

  double refined_quantity = 0.0;
  double refined_investment = 0.0;
  double refined_profit = 0.0;

  // Largest improvement over nash_profit found on the grid or after refinement.
  double max_gain = 0.0;
  bool passed = false;
};

struct DeviationReport {
  double grid_radius = 0.0;
  int grid_points = 0;
  double tolerance = 0.0;
  std::vector<FirmDeviation> firms;
  bool passed = false;
};

// Checks that no firm can gain by deviating unilaterally from (q_hat, b_hat)
// while every opponent stays at its baseline. Each firm's deviation space is
// gridded over q in [(1 - r) q_hat, (1 + r) q_hat] x b in [0, cap]; the best grid
// point is then refined by nested golden-section search within one cell.
// Requires grid_points >= 3 and 0 < grid_radius <= 1.
DeviationReport verify_nash(const MarketModel& model, double grid_radius = 0.5,
                            int grid_points = 201, double tolerance = 1e-9);

// Diagnostic from the no-interior-optimum argument, in percent space
// (Q_hat = A = 100, c = 0.2):
//   h(Q-i, q) = 100/(Q-i + q) + q/40 - 1 - 100 q/(Q-i + q)^2
// A joint stationary point of profit in (q, b) requires h = 0.
double proof_h(double others_quantity, double quantity);

// Minimiser of proof_h in q for fixed Q-i: 20 * Q-i^(1/3) - Q-i.
double proof_h_critical_quantity(double others_quantity);

struct HSweep {
  std::size_t points = 0;
  double min_value = 0.0;
  double argmin_others = 0.0;
  double argmin_quantity = 0.0;
  bool all_positive = false;
};

// Evaluates proof_h on the grid Q-i = others_lo, others_lo + step, ... < others_hi
// crossed with q = 0, step, ..., quantity_hi.
HSweep sweep_proof_h(double others_lo = 5.0, double others_hi = 100.0,
                     double quantity_hi = 200.0, double step = 0.5);

}  // namespace cournot
