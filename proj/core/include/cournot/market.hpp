#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cournot {

// Exogenous description of a market at its status-quo equilibrium.
struct MarketSpec {
  std::vector<double> baseline_quantities;  // per-firm production at status quo
  double baseline_price = 1.0;
  double elasticity = -1.0;
  double invest_fraction_cap = 0.2;  // investment cap as a fraction of baseline profit

  std::size_t firm_count() const { return baseline_quantities.size(); }

  // Throws SpecError when an invariant does not hold.
  void validate() const;
};

// Largest admissible market share; at or above this a firm is a monopolist.
inline constexpr double kMaxMarketShare = 0.95;

// Unit production cost as a function of investment: k1 * b^k2 + k3.
struct CostCurve {
  double k1 = 0.0;
  double k2 = 0.5;
  double k3 = 1.0;

  double operator()(double investment) const;
};

struct ProfitQuery {
  std::size_t firm_index = 0;
  double others_quantity = 0.0;
  double quantity = 0.0;
  double investment = 0.0;
};

// Derived, immutable market: price scale, baseline costs and profits, and the
// investment-cost curve fitted through every firm's baseline point.
class MarketModel {
 public:
  const MarketSpec& spec() const { return spec_; }
  std::size_t firm_count() const { return spec_.firm_count(); }

  double total_baseline() const { return total_baseline_; }
  double scale() const { return scale_; }
  double baseline_price() const { return spec_.baseline_price; }
  double elasticity() const { return spec_.elasticity; }
  double invest_fraction_cap() const { return spec_.invest_fraction_cap; }
  const CostCurve& cost_curve() const { return curve_; }

  double baseline_quantity(std::size_t firm) const { return spec_.baseline_quantities.at(firm); }
  double baseline_cost(std::size_t firm) const { return baseline_costs_.at(firm); }
  double baseline_profit(std::size_t firm) const { return baseline_profits_.at(firm); }
  // Also the investment cap c * pi_hat.
  double baseline_investment(std::size_t firm) const { return baseline_investments_.at(firm); }
  double investment_cap(std::size_t firm) const { return baseline_investment(firm); }

  std::span<const double> baseline_costs() const { return baseline_costs_; }
  std::span<const double> baseline_profits() const { return baseline_profits_; }
  std::span<const double> baseline_investments() const { return baseline_investments_; }

  // Profit at the status-quo decision pair, (1 - c) * pi_hat.
  double nash_profit(std::size_t firm) const;
  double share(std::size_t firm) const { return baseline_quantity(firm) / total_baseline_; }

  // Smallest total production a period may resolve with (price is undefined at 0).
  double min_total_quantity() const { return 1e-6 * total_baseline_; }

  // Copy with a replaced cost curve. Used for negative controls and
  // sensitivity checks; baseline values are left untouched.
  MarketModel with_cost_curve(const CostCurve& curve) const;

 private:
  friend MarketModel derive_model(const MarketSpec& spec);
  MarketModel() = default;

  MarketSpec spec_;
  double total_baseline_ = 0.0;
  double scale_ = 0.0;
  std::vector<double> baseline_costs_;
  std::vector<double> baseline_profits_;
  std::vector<double> baseline_investments_;
  CostCurve curve_;
};

MarketModel derive_model(const MarketSpec& spec);

// A * Q^eps. Throws DomainError for Q <= 0.
double price(const MarketModel& model, double total_quantity);

// Unit cost after investing `investment`; throws DomainError outside [0, cap].
double unit_cost(const MarketModel& model, std::size_t firm, double investment);

// [price(Q-i + q) - unit_cost(b)] * q - b; exactly -b when q = 0.
double profit(const MarketModel& model, const ProfitQuery& query);

}  // namespace cournot
