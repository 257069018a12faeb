#include "cournot/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cournot/errors.hpp"
#include "cournot/numeric.hpp"

namespace cournot {

namespace {

double others_baseline(const MarketModel& model, std::size_t firm) {
  std::vector<double> others;
  others.reserve(model.firm_count() - 1);
  for (std::size_t j = 0; j < model.firm_count(); ++j) {
    if (j != firm) others.push_back(model.baseline_quantity(j));
  }
  return ordered_sum(others);
}

FirmDeviation check_firm(const MarketModel& model, std::size_t firm, double radius, int points,
                         double tolerance) {
  const double q_hat = model.baseline_quantity(firm);
  const double cap = model.investment_cap(firm);
  const double others = others_baseline(model, firm);
  auto eval = [&](double q, double b) {
    return profit(model, ProfitQuery{firm, others, q, b});
  };

  FirmDeviation out;
  out.firm = firm;
  out.nash_profit = eval(q_hat, model.baseline_investment(firm));

  const double q_lo = (1.0 - radius) * q_hat;
  const double q_hi = (1.0 + radius) * q_hat;
  const double steps = static_cast<double>(points - 1);
  out.best_grid_profit = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < points; ++a) {
    const double q = q_hat * (1.0 - radius + 2.0 * radius * a / steps);
    for (int k = 0; k < points; ++k) {
      const double b = cap * (k / steps);
      const double v = eval(q, b);
      if (v > out.best_grid_profit) {
        out.best_grid_profit = v;
        out.best_grid_quantity = q;
        out.best_grid_investment = b;
      }
    }
  }

  // Refine within one grid cell around the best point.
  const double dq = (q_hi - q_lo) / steps;
  const double db = cap / steps;
  const double rq_lo = std::max(q_lo, out.best_grid_quantity - dq);
  const double rq_hi = std::min(q_hi, out.best_grid_quantity + dq);
  const double rb_lo = std::max(0.0, out.best_grid_investment - db);
  const double rb_hi = std::min(cap, out.best_grid_investment + db);
  const double q_tol = 1e-10 * std::max(1.0, q_hat);
  const double b_tol = 1e-10 * std::max(1.0, cap);

  double refined_q = out.best_grid_quantity;
  auto profile = [&](double b) {
    const Maximum inner = golden_section_max([&](double q) { return eval(q, b); }, rq_lo, rq_hi, q_tol);
    refined_q = inner.x;
    return inner.value;
  };
  const Maximum outer = golden_section_max(profile, rb_lo, rb_hi, b_tol);
  profile(outer.x);
  out.refined_investment = outer.x;
  out.refined_quantity = refined_q;
  out.refined_profit = outer.value;

  out.max_gain = std::max(out.best_grid_profit, out.refined_profit) - out.nash_profit;
  out.passed = out.max_gain <= tolerance;
  return out;
}

}  // namespace

DeviationReport verify_nash(const MarketModel& model, double grid_radius, int grid_points,
                            double tolerance) {
  if (grid_points < 3) throw std::invalid_argument("verify_nash needs at least 3 grid points per axis");
  if (!(grid_radius > 0.0 && grid_radius <= 1.0)) {
    throw std::invalid_argument("verify_nash grid radius must lie in (0, 1]");
  }
  DeviationReport report;
  report.grid_radius = grid_radius;
  report.grid_points = grid_points;
  report.tolerance = tolerance;
  report.passed = true;
  for (std::size_t i = 0; i < model.firm_count(); ++i) {
    report.firms.push_back(check_firm(model, i, grid_radius, grid_points, tolerance));
    report.passed = report.passed && report.firms.back().passed;
  }
  return report;
}

double proof_h(double others_quantity, double quantity) {
  const double total = others_quantity + quantity;
  if (total == 0.0) throw DomainError("proof_h is undefined when Q-i + q = 0");
  return 100.0 / total + quantity / (2.0 * 0.2 * 100.0) - 1.0 - 100.0 * quantity / (total * total);
}

double proof_h_critical_quantity(double others_quantity) {
  return 20.0 * std::cbrt(others_quantity) - others_quantity;
}

HSweep sweep_proof_h(double others_lo, double others_hi, double quantity_hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("sweep step must be positive");
  HSweep out;
  out.min_value = std::numeric_limits<double>::infinity();
  for (long a = 0;; ++a) {
    const double others = others_lo + step * static_cast<double>(a);
    if (others >= others_hi) break;
    for (long k = 0;; ++k) {
      const double q = step * static_cast<double>(k);
      if (q > quantity_hi) break;
      const double h = proof_h(others, q);
      ++out.points;
      if (h < out.min_value) {
        out.min_value = h;
        out.argmin_others = others;
        out.argmin_quantity = q;
      }
    }
  }
  out.all_positive = out.points > 0 && out.min_value > 0.0;
  return out;
}

}  // namespace cournot
