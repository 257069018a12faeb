#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "cournot/decision.hpp"
#include "cournot/market.hpp"

namespace cournot {

// Everything the strategy prompt is instantiated from. The baseline fields
// describe the firm's own status quo; nothing here identifies opponents.
struct PromptContext {
  std::size_t n_firms = 0;
  double initial_profit = 0.0;          // pi_hat
  double max_multiplier_percent = 0.0;  // 100 * c
  double baseline_cost = 0.0;           // w_hat
  double baseline_units = 0.0;          // q_hat
  double baseline_price = 1.0;
  std::string plans_text;
  std::string insights_text;
  std::string market_history_text;
};

// Context for `firm` with empty scratch files and no history.
PromptContext initial_prompt_context(const MarketModel& model, std::size_t firm);

// Precision used when rendering history rows, recorded in run metadata.
struct HistoryPrecision {
  int quantity_decimals = 2;
  int profit_decimals = 2;
  int percent_decimals = 2;
  int price_significant = 4;
  int cost_significant = 4;
};

inline constexpr HistoryPrecision kHistoryPrecision{};

// One line per observation: period, own production and investment percent,
// own unit cost, total market production, price, own profit.
std::string render_market_history(std::span<const Observation> history,
                                  const HistoryPrecision& precision = kHistoryPrecision);

// Instantiates the strategy-planning template. Throws std::invalid_argument
// when a placeholder has no usable value.
std::string render_prompt(const PromptContext& ctx);

// The raw template with {placeholders}.
std::string_view prompt_template();

inline constexpr std::string_view kQuantityLabel = "My chosen production quantity:";
inline constexpr std::string_view kInvestLabel = "My chosen investment (in percent):";
inline constexpr std::string_view kPlansLabel = "New content for PLANS.txt:";
inline constexpr std::string_view kInsightsLabel = "New content for INSIGHTS.txt:";

struct ParsedReply {
  Decision decision;
  std::optional<std::string> plans;     // absent when the reply has no PLANS section
  std::optional<std::string> insights;  // absent when the reply has no INSIGHTS section
  double requested_percent = 0.0;
  bool clamped = false;
};

// Extracts the first number on the first non-empty line after each decision
// label. Thousands separators are ignored; the investment percent is clamped
// into [0, 100 * c]. Throws ParseFailure on a missing label, a non-numeric
// payload or a negative quantity.
ParsedReply parse_response(std::string_view text, const MarketModel& model, std::size_t firm);

// A well-formed reply carrying `decision` with full round-trip precision.
std::string format_reply(const Decision& decision, std::string_view plans = {},
                         std::string_view insights = {});

}  // namespace cournot
