#include "cournot/prompt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <regex>
#include <stdexcept>

#include <fmt/format.h>

#include "cournot/errors.hpp"

namespace cournot {

namespace {

constexpr std::string_view kTemplate =
    "Your task is to assist a firm with its strategy planning, which involves both the production "
    "and capital investment decisions. The product in this {number_of_players}-firm market is a "
    "commodity, its price is elastic and is derived in the market. Your capital investment will "
    "help in adjusting your production cost. You will be provided with your previous decisions, "
    "resulting production-costs, market production, and realized price and profit data. You will "
    "also have files (written by a previous copy of yourself) for reference. Consider demand, "
    "costs, and competitors. Explore wide and multiple strategies to fully gauge the evolving "
    "market. Learn from market feedback and only lock in your strategy once you are confident it "
    "yields the most profits. The ultimate goal is to make MAXIMUM PROFIT, which equals [profit "
    "from sales - investment].\n"
    "\n"
    "Here's the market and firm information:\n"
    "\n"
    "- Your fixed initial surplus is {initial_profit}, of which you can invest AT MOST "
    "{max_multiplier} percent into capital.\n"
    "- Using {max_multiplier} percent investment last time, your average cost of production was "
    "{production_cost}.\n"
    "- Last time, you produced about {production_units} units, at price = {baseline_price}.\n"
    "\n"
    "Following are the resources you have. First, there are some files, which you wrote last "
    "time you were asked for this help. Here is a high-level description of what these files "
    "contain:\n"
    "\n"
    "- PLANS.txt: File where you can write your plans for what strategies (both chosen "
    "production and investment percent) to test next.\n"
    "- INSIGHTS.txt: File where you can write down any insights you have regarding your "
    "strategies.\n"
    "\n"
    "Here is the current content of these files.\n"
    "\n"
    "Filename: PLANS.txt\n"
    "++++++++++++++++++\n"
    "{plans}\n"
    "++++++++++++++++++\n"
    "\n"
    "Filename: INSIGHTS.txt\n"
    "++++++++++++++++++\n"
    "{insights}\n"
    "++++++++++++++++++\n"
    "\n"
    "Finally, I will show you the market data you have access to.\n"
    "\n"
    "Filename: MARKET_DATA (read-only)\n"
    "++++++++++++++++++\n"
    "{market_history}\n"
    "++++++++++++++++++\n"
    "\n"
    "Now you have all the necessary information to complete the task. Here is how the "
    "conversation will work:\n"
    "\n"
    "First, carefully read through the information provided. Reminder that investment percent is "
    "at most {max_multiplier}. Then, fill in the following template to respond. Keep it very "
    "brief and succinct and don’t repeat yourself.\n"
    "\n"
    "My observations and thoughts:\n"
    "<fill in here>\n"
    "\n"
    "New content for PLANS.txt:\n"
    "<fill in here>\n"
    "\n"
    "New content for INSIGHTS.txt:\n"
    "<fill in here>\n"
    "\n"
    "My chosen production quantity:\n"
    "<ONLY the NUMBER, nothing else>\n"
    "\n"
    "My chosen investment (in percent):\n"
    "<ONLY the NUMBER, nothing else>\n"
    "\n"
    "Note whatever content you write in PLANS.txt and INSIGHTS.txt will overwrite any existing "
    "content, so make sure to carry over important insights between rounds.\n";

std::string compact(double v) { return fmt::format("{:.6g}", v); }

std::string excerpt_of(std::string_view text) {
  std::string s(text.substr(0, 80));
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

const std::string_view kAllLabels[] = {kPlansLabel, kInsightsLabel, kQuantityLabel, kInvestLabel,
                                       "My observations and thoughts:"};

// Text after the first occurrence of `label`, up to the next known label.
std::optional<std::string_view> section_after(std::string_view text, std::string_view label) {
  const auto at = text.find(label);
  if (at == std::string_view::npos) return std::nullopt;
  std::string_view rest = text.substr(at + label.size());
  std::size_t end = rest.size();
  for (std::string_view other : kAllLabels) {
    const auto pos = rest.find(other);
    if (pos != std::string_view::npos) end = std::min(end, pos);
  }
  return rest.substr(0, end);
}

// Strips markdown decoration models like to wrap labels and answers in.
std::string_view strip_decoration(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r*_`>#");
  if (first == std::string_view::npos) return {};
  return s.substr(first);
}

double first_number(std::string_view text, std::string_view label) {
  const auto section = section_after(text, label);
  if (!section) throw ParseFailure(fmt::format("missing label '{}'", label), excerpt_of(text));

  std::string_view rest = *section;
  std::string_view line;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    line = strip_decoration(rest.substr(0, nl));
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (!trim(line).empty()) break;
    line = {};
  }
  if (trim(line).empty()) {
    throw ParseFailure(fmt::format("no value after '{}'", label), excerpt_of(*section));
  }

  static const std::regex kNumber(
      R"([-+]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?(?:[eE][-+]?\d+)?|[-+]?\.\d+(?:[eE][-+]?\d+)?)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(line.begin(), line.end(), m, kNumber)) {
    throw ParseFailure(fmt::format("non-numeric payload after '{}'", label), excerpt_of(line));
  }
  std::string token = m.str();
  token.erase(std::remove(token.begin(), token.end(), ','), token.end());
  if (!token.empty() && token.front() == '+') token.erase(token.begin());

  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw ParseFailure(fmt::format("unreadable number after '{}'", label), excerpt_of(line));
  }
  return value;
}

std::string shortest_fixed(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view prompt_template() { return kTemplate; }

PromptContext initial_prompt_context(const MarketModel& model, std::size_t firm) {
  PromptContext ctx;
  ctx.n_firms = model.firm_count();
  ctx.initial_profit = model.baseline_profit(firm);
  ctx.max_multiplier_percent = max_invest_percent(model);
  ctx.baseline_cost = model.baseline_cost(firm);
  ctx.baseline_units = model.baseline_quantity(firm);
  ctx.baseline_price = model.baseline_price();
  return ctx;
}

std::string render_market_history(std::span<const Observation> history,
                                  const HistoryPrecision& precision) {
  std::string out;
  for (const Observation& o : history) {
    if (!out.empty()) out += '\n';
    out += fmt::format(
        "Period {}: production {:.{}f} units, investment {:.{}f} percent, production cost {:#.{}g}, "
        "total market production {:.{}f} units, price {:#.{}g}, profit {:.{}f}",
        o.period_index + 1, o.own_quantity, precision.quantity_decimals, o.own_invest_percent,
        precision.percent_decimals, o.own_unit_cost, precision.cost_significant, o.total_quantity,
        precision.quantity_decimals, o.market_price, precision.price_significant, o.own_profit,
        precision.profit_decimals);
  }
  return out;
}

std::string render_prompt(const PromptContext& ctx) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (ctx.n_firms < 2) throw std::invalid_argument("prompt needs number_of_players >= 2");
  if (!positive(ctx.initial_profit)) throw std::invalid_argument("prompt needs a positive initial_profit");
  if (!positive(ctx.max_multiplier_percent)) throw std::invalid_argument("prompt needs a positive max_multiplier");
  if (!positive(ctx.baseline_cost)) throw std::invalid_argument("prompt needs a positive production_cost");
  if (!positive(ctx.baseline_units)) throw std::invalid_argument("prompt needs positive production_units");
  if (!positive(ctx.baseline_price)) throw std::invalid_argument("prompt needs a positive baseline_price");

  const std::map<std::string_view, std::string> values{
      {"number_of_players", std::to_string(ctx.n_firms)},
      {"initial_profit", compact(ctx.initial_profit)},
      {"max_multiplier", compact(ctx.max_multiplier_percent)},
      {"production_cost", compact(ctx.baseline_cost)},
      {"production_units", compact(ctx.baseline_units)},
      {"baseline_price", compact(ctx.baseline_price)},
      {"plans", ctx.plans_text},
      {"insights", ctx.insights_text},
      {"market_history", ctx.market_history_text},
  };

  std::string out;
  out.reserve(kTemplate.size() + ctx.market_history_text.size() + 256);
  std::size_t pos = 0;
  while (pos < kTemplate.size()) {
    const auto open = kTemplate.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(kTemplate.substr(pos));
      break;
    }
    const auto close = kTemplate.find('}', open);
    out.append(kTemplate.substr(pos, open - pos));
    const std::string_view key = kTemplate.substr(open + 1, close - open - 1);
    const auto it = values.find(key);
    if (it == values.end()) throw std::invalid_argument(fmt::format("no value for placeholder '{}'", key));
    out.append(it->second);
    pos = close + 1;
  }
  return out;
}

ParsedReply parse_response(std::string_view text, const MarketModel& model, std::size_t firm) {
  const double quantity = first_number(text, kQuantityLabel);
  const double percent = first_number(text, kInvestLabel);
  if (quantity < 0.0) {
    throw ParseFailure("negative production quantity", excerpt_of(*section_after(text, kQuantityLabel)));
  }

  ParsedReply reply;
  reply.requested_percent = percent;
  const double max_pct = max_invest_percent(model);
  const double clamped = std::clamp(percent, 0.0, max_pct);
  reply.clamped = clamped != percent;
  reply.decision = Decision::make(model, firm, quantity, clamped);
  if (auto s = section_after(text, kPlansLabel)) reply.plans = std::string(trim(*s));
  if (auto s = section_after(text, kInsightsLabel)) reply.insights = std::string(trim(*s));
  return reply;
}

std::string format_reply(const Decision& decision, std::string_view plans, std::string_view insights) {
  return fmt::format(
      "My observations and thoughts:\nHolding course.\n\n"
      "{}\n{}\n\n{}\n{}\n\n{}\n{}\n\n{}\n{}\n",
      kPlansLabel, plans, kInsightsLabel, insights, kQuantityLabel, shortest_fixed(decision.quantity),
      kInvestLabel, shortest_fixed(decision.invest_percent));
}

}  // namespace cournot
