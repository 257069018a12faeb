#include "cournot/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "cournot/errors.hpp"
#include "cournot/numeric.hpp"

namespace cournot {

namespace {

constexpr int kInvestmentGridPoints = 21;
constexpr int kClosedFormGridPoints = 201;

double eval_profit(const MarketModel& model, std::size_t firm, double others, double q, double b) {
  return profit(model, ProfitQuery{firm, others, q, b});
}

Decision decision_for(const MarketModel& model, std::size_t firm, double quantity, double investment) {
  const double cap = model.investment_cap(firm);
  const double pct = investment >= cap ? max_invest_percent(model)
                                       : std::min(100.0 * investment / model.baseline_profit(firm),
                                                  max_invest_percent(model));
  return Decision::make(model, firm, quantity, pct);
}

// Bracketed search over q for a fixed investment; works for any elasticity
// where profit is unimodal in q.
Maximum best_quantity_numeric(const MarketModel& model, std::size_t firm, double others, double b) {
  auto f = [&](double q) { return eval_profit(model, firm, others, q, b); };
  double hi = std::max(model.total_baseline(), others);
  const double limit = 1e6 * model.total_baseline();
  while (hi < limit && f(2.0 * hi) > f(hi)) hi *= 2.0;
  return golden_section_max(f, 0.0, 2.0 * hi, 1e-10 * std::max(1.0, model.total_baseline()));
}

struct Candidate {
  double quantity;
  double investment;
  double profit;
};

// Higher profit wins; ties go to higher investment, then higher quantity.
bool better(const Candidate& a, const Candidate& b) {
  if (a.profit != b.profit) return a.profit > b.profit;
  if (a.investment != b.investment) return a.investment > b.investment;
  return a.quantity > b.quantity;
}

Candidate numeric_best(const MarketModel& model, std::size_t firm, double others) {
  const double cap = model.investment_cap(firm);
  auto profile = [&](double b) { return best_quantity_numeric(model, firm, others, b); };

  Candidate best{0.0, 0.0, -std::numeric_limits<double>::infinity()};
  int best_k = 0;
  for (int k = 0; k < kInvestmentGridPoints; ++k) {
    const double b = cap * k / (kInvestmentGridPoints - 1);
    const Maximum m = profile(b);
    const Candidate c{m.x, b, m.value};
    if (better(c, best)) {
      best = c;
      best_k = k;
    }
  }
  const double step = cap / (kInvestmentGridPoints - 1);
  const double lo = std::max(0.0, cap * best_k / (kInvestmentGridPoints - 1) - step);
  const double hi = std::min(cap, cap * best_k / (kInvestmentGridPoints - 1) + step);
  const Maximum outer = golden_section_max([&](double b) { return profile(b).value; }, lo, hi,
                                           1e-10 * std::max(1.0, cap));
  const Maximum inner = profile(outer.x);
  const Candidate refined{inner.x, outer.x, inner.value};
  if (better(refined, best)) best = refined;
  return best;
}

// Epsilon = -1: closed-form quantity for each investment, so only b is searched.
Candidate closed_form_best(const MarketModel& model, std::size_t firm, double others) {
  const double cap = model.investment_cap(firm);
  auto at = [&](double b) {
    const double q = best_quantity_for_investment(model, firm, others, b);
    return Candidate{q, b, eval_profit(model, firm, others, q, b)};
  };
  constexpr int n = kClosedFormGridPoints - 1;
  Candidate best = at(cap);
  int best_k = n;
  for (int k = n - 1; k >= 0; --k) {
    const Candidate c = at(k == 0 ? 0.0 : cap * k / n);
    if (better(c, best)) {
      best = c;
      best_k = k;
    }
  }
  if (best_k == 0 || best_k == n) return best;
  const Maximum m = golden_section_max([&](double b) { return at(b).profit; }, cap * (best_k - 1) / n,
                                       cap * (best_k + 1) / n, 1e-12 * std::max(1.0, cap));
  const Candidate refined = at(m.x);
  return better(refined, best) ? refined : best;
}

}  // namespace

const char* to_string(BestResponsePath path) {
  switch (path) {
    case BestResponsePath::ClosedFormCap: return "closed_form_cap";
    case BestResponsePath::ClosedFormZero: return "closed_form_zero";
    case BestResponsePath::ClosedFormInterior: return "closed_form_interior";
    case BestResponsePath::Numeric: return "numeric";
  }
  return "unknown";
}

Decision nash_decide(const MarketModel& model, std::size_t firm) {
  return Decision::make(model, firm, model.baseline_quantity(firm), max_invest_percent(model));
}

double min_others_quantity(const MarketModel& model) { return 1e-3 * model.total_baseline(); }

double best_quantity_for_investment(const MarketModel& model, std::size_t firm,
                                    double others_quantity, double investment) {
  if (model.elasticity() != -1.0) {
    throw DomainError("closed-form quantity reply requires elasticity -1");
  }
  const double w = unit_cost(model, firm, investment);
  if (!(w > 0.0)) {
    throw DomainError(fmt::format("firm {} unit cost {} is not positive; profit is unbounded in q", firm, w));
  }
  const double q = std::sqrt(model.scale() * others_quantity / w) - others_quantity;
  return std::max(0.0, q);
}

BestResponse best_response(const MarketModel& model, std::size_t firm, double others_quantity,
                           const BestResponseOptions& options) {
  if (firm >= model.firm_count()) {
    throw DomainError(fmt::format("firm index {} out of range", firm));
  }
  if (!(others_quantity >= min_others_quantity(model))) {
    throw DomainError(fmt::format(
        "best response undefined: opponents' quantity {} is below the floor {} (monopoly regime)",
        others_quantity, min_others_quantity(model)));
  }

  BestResponse out;
  if (model.elasticity() == -1.0) {
    const Candidate best = closed_form_best(model, firm, others_quantity);
    out.decision = decision_for(model, firm, best.quantity, best.investment);
    out.profit = best.profit;
    out.path = best.investment == model.investment_cap(firm) ? BestResponsePath::ClosedFormCap
               : best.investment == 0.0                      ? BestResponsePath::ClosedFormZero
                                                             : BestResponsePath::ClosedFormInterior;
    if (options.cross_check) {
      out.cross_check_gap = numeric_best(model, firm, others_quantity).profit - best.profit;
    }
    return out;
  }

  const Candidate best = numeric_best(model, firm, others_quantity);
  out.decision = decision_for(model, firm, best.quantity, best.investment);
  out.profit = best.profit;
  out.path = BestResponsePath::Numeric;
  return out;
}

Decision scripted_decide(std::span<const Decision> script, std::size_t period_index) {
  if (script.empty()) throw std::invalid_argument("scripted agent has an empty script");
  return script[std::min(period_index, script.size() - 1)];
}

NashAgent::NashAgent(const MarketModel& model, std::size_t firm)
    : decision_(nash_decide(model, firm)) {}

AgentDecision NashAgent::decide(std::size_t) { return {decision_, {}}; }

BestResponseAgent::BestResponseAgent(const MarketModel& model, std::size_t firm,
                                     BestResponseOptions options)
    : model_(&model),
      firm_(firm),
      options_(options),
      others_prev_(model.total_baseline() - model.baseline_quantity(firm)) {}

AgentDecision BestResponseAgent::decide(std::size_t) {
  const BestResponse br = best_response(*model_, firm_, others_prev_, options_);
  AgentDecision out{br.decision, {}};
  EventFlag flag{firm_, "best_response", to_string(br.path), 0};
  if (br.cross_check_gap) flag.detail += fmt::format(";gap={:.3e}", *br.cross_check_gap);
  out.flags.push_back(std::move(flag));
  return out;
}

void BestResponseAgent::observe(const Observation& observation) {
  others_prev_ = observation.total_quantity - observation.own_quantity;
}

ScriptedAgent::ScriptedAgent(std::vector<Decision> script) : script_(std::move(script)) {
  if (script_.empty()) throw std::invalid_argument("scripted agent has an empty script");
}

AgentDecision ScriptedAgent::decide(std::size_t period_index) {
  return {scripted_decide(script_, period_index), {}};
}

}  // namespace cournot
