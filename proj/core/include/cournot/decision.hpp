#pragma once

#include <cstddef>
#include <string>

#include "cournot/market.hpp"

namespace cournot {

// One firm's action for one period. Investment is carried both as the percent
// of baseline profit an agent chose and as the resulting amount.
struct Decision {
  double quantity = 0.0;
  double invest_percent = 0.0;
  double investment = 0.0;

  // Validates 0 <= invest_percent <= 100 * c and quantity >= 0 (finite), and
  // derives investment = invest_percent / 100 * pi_hat. Throws DomainError.
  static Decision make(const MarketModel& model, std::size_t firm, double quantity,
                       double invest_percent);

  // Same pair compared exactly; used by the stall rule.
  bool same_action(const Decision& other) const {
    return quantity == other.quantity && invest_percent == other.invest_percent;
  }

  friend bool operator==(const Decision&, const Decision&) = default;
};

// Largest admissible investment percent, 100 * c.
double max_invest_percent(const MarketModel& model);

// Feedback a firm receives after a period: its own actions and outcomes plus
// the market aggregates. Never carries opponent identities or decisions.
struct Observation {
  std::size_t period_index = 0;
  double own_quantity = 0.0;
  double own_invest_percent = 0.0;
  double own_unit_cost = 0.0;
  double total_quantity = 0.0;
  double market_price = 0.0;
  double own_profit = 0.0;
};

}  // namespace cournot
