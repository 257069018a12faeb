#include "cournot/decision.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cournot/errors.hpp"

namespace cournot {

double max_invest_percent(const MarketModel& model) {
  return 100.0 * model.invest_fraction_cap();
}

Decision Decision::make(const MarketModel& model, std::size_t firm, double quantity,
                        double invest_percent) {
  if (firm >= model.firm_count()) {
    throw DomainError(fmt::format("firm index {} out of range for {} firms", firm, model.firm_count()));
  }
  if (!std::isfinite(quantity) || quantity < 0.0) {
    throw DomainError(fmt::format("firm {} quantity must be finite and non-negative, got {}", firm, quantity));
  }
  const double max_pct = max_invest_percent(model);
  if (!std::isfinite(invest_percent) || invest_percent < 0.0 ||
      invest_percent > max_pct * (1.0 + 1e-12)) {
    throw DomainError(fmt::format("firm {} investment percent {} outside [0, {}]", firm,
                                  invest_percent, max_pct));
  }
  Decision d;
  d.quantity = quantity;
  d.invest_percent = invest_percent;
  d.investment = std::min(invest_percent / 100.0 * model.baseline_profit(firm),
                          model.investment_cap(firm));
  return d;
}

}  // namespace cournot
