#include "cournot/market.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "cournot/errors.hpp"
#include "cournot/numeric.hpp"

namespace cournot {

namespace {

// Relative slack on the investment cap so that percent -> amount conversions
// (pct / 100 * pi_hat) are not rejected for the last ulp.
constexpr double kCapSlack = 1e-12;

}  // namespace

void MarketSpec::validate() const {
  if (baseline_quantities.size() < 2) {
    throw SpecError("a market needs at least 2 firms");
  }
  for (std::size_t i = 0; i < baseline_quantities.size(); ++i) {
    const double q = baseline_quantities[i];
    if (!std::isfinite(q) || q <= 0.0) {
      throw SpecError(fmt::format("baseline quantity of firm {} must be positive, got {}", i, q));
    }
  }
  if (!std::isfinite(baseline_price) || baseline_price <= 0.0) {
    throw SpecError(fmt::format("baseline price must be positive, got {}", baseline_price));
  }
  if (!std::isfinite(elasticity) || elasticity >= 0.0) {
    throw SpecError(fmt::format("elasticity must be negative, got {}", elasticity));
  }
  if (!(invest_fraction_cap > 0.0 && invest_fraction_cap < 1.0)) {
    throw SpecError(fmt::format("investment cap fraction must lie in (0, 1), got {}",
                                invest_fraction_cap));
  }
  const double total = ordered_sum(baseline_quantities);
  for (std::size_t i = 0; i < baseline_quantities.size(); ++i) {
    const double share = baseline_quantities[i] / total;
    if (share >= kMaxMarketShare) {
      throw SpecError(fmt::format("firm {} holds {:.4g}% of the market; shares must stay below {}%",
                                  i, 100.0 * share, 100.0 * kMaxMarketShare));
    }
  }
}

double CostCurve::operator()(double investment) const {
  const double scaled = k2 == 0.5 ? std::sqrt(investment) : std::pow(investment, k2);
  return k1 * scaled + k3;
}

double MarketModel::nash_profit(std::size_t firm) const {
  return (1.0 - spec_.invest_fraction_cap) * baseline_profit(firm);
}

MarketModel MarketModel::with_cost_curve(const CostCurve& curve) const {
  MarketModel copy = *this;
  copy.curve_ = curve;
  return copy;
}

MarketModel derive_model(const MarketSpec& spec) {
  spec.validate();

  MarketModel m;
  m.spec_ = spec;
  const double p_hat = spec.baseline_price;
  const double eps = spec.elasticity;
  const double c = spec.invest_fraction_cap;

  m.total_baseline_ = ordered_sum(spec.baseline_quantities);
  m.scale_ = std::pow(m.total_baseline_, -eps) * p_hat;

  // First-order condition at the status quo: w = p + q * dp/dq = p + eps * p * q / Q.
  const std::size_t n = spec.firm_count();
  m.baseline_costs_.resize(n);
  m.baseline_profits_.resize(n);
  m.baseline_investments_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = spec.baseline_quantities[i];
    const double w = p_hat + eps * p_hat * (q / m.total_baseline_);
    if (!(w > 0.0 && w < p_hat)) {
      throw SpecError(fmt::format(
          "degenerate baseline: firm {} cost {} is outside (0, {}); lower the share or |elasticity|",
          i, w, p_hat));
    }
    m.baseline_costs_[i] = w;
    m.baseline_profits_[i] = (p_hat - w) * q;
    m.baseline_investments_[i] = c * m.baseline_profits_[i];
  }

  m.curve_.k1 = -std::sqrt(-eps * p_hat / (m.total_baseline_ * c));
  m.curve_.k2 = 0.5;
  m.curve_.k3 = p_hat;
  return m;
}

double price(const MarketModel& model, double total_quantity) {
  if (!(total_quantity > 0.0) || !std::isfinite(total_quantity)) {
    throw DomainError(fmt::format("price is undefined for total quantity {}", total_quantity));
  }
  if (model.elasticity() == -1.0) return model.scale() / total_quantity;
  return model.scale() * std::pow(total_quantity, model.elasticity());
}

double unit_cost(const MarketModel& model, std::size_t firm, double investment) {
  const double cap = model.investment_cap(firm);
  if (!(investment >= 0.0)) {
    throw DomainError(fmt::format("firm {} investment {} is negative", firm, investment));
  }
  if (investment > cap * (1.0 + kCapSlack)) {
    throw DomainError(fmt::format("firm {} investment {} exceeds its cap {}", firm, investment, cap));
  }
  return model.cost_curve()(std::min(investment, cap));
}

double profit(const MarketModel& model, const ProfitQuery& query) {
  if (!(query.quantity >= 0.0) || !std::isfinite(query.quantity)) {
    throw DomainError(fmt::format("quantity must be a finite non-negative number, got {}", query.quantity));
  }
  if (!(query.others_quantity >= 0.0)) {
    throw DomainError(fmt::format("others' quantity must be non-negative, got {}", query.others_quantity));
  }
  const double w = unit_cost(model, query.firm_index, query.investment);
  const double b = std::min(query.investment, model.investment_cap(query.firm_index));
  if (query.quantity == 0.0) return -b;
  const double p = price(model, query.others_quantity + query.quantity);
  return (p - w) * query.quantity - b;
}

}  // namespace cournot
