#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cournot/decision.hpp"
#include "cournot/market.hpp"

namespace cournot {

// ---------------------------------------------------------------------------
// Stateless decision rules
// ---------------------------------------------------------------------------

// Status-quo pair (q_hat, 100 * c percent), every period.
Decision nash_decide(const MarketModel& model, std::size_t firm);

enum class BestResponsePath {
  ClosedFormCap,   // epsilon = -1, full investment won
  ClosedFormZero,  // epsilon = -1, zero investment won
  ClosedFormInterior,  // epsilon = -1, an interior investment won (near-monopoly opponents' totals)
  Numeric,         // general elasticity: nested bracketed search
};

const char* to_string(BestResponsePath path);

struct BestResponseOptions {
  // For epsilon = -1 also runs the nested numeric search and records its
  // profit gap against the closed-form solution.
  bool cross_check = false;
};

struct BestResponse {
  Decision decision;
  double profit = 0.0;
  BestResponsePath path = BestResponsePath::ClosedFormCap;
  // Numeric optimum minus returned profit; only set when cross-checking.
  std::optional<double> cross_check_gap;
};

// Smallest opponents' quantity a best response is defined for, 1e-3 * Q_hat.
double min_others_quantity(const MarketModel& model);

// Profit-maximising (q, b) against the opponents' previous total quantity.
// For epsilon = -1 the quantity has the closed form sqrt(A * Q-i / w(b)) - Q-i
// (clamped at 0) and investment is chosen on a 201-point grid over [0, cap],
// refined by golden-section search when the best grid point is interior. The
// optimum is on the boundary {0, cap} unless Q-i is a small fraction of Q_hat.
// Ties go to the higher investment, then the higher quantity.
// Throws DomainError when others_quantity is below min_others_quantity().
BestResponse best_response(const MarketModel& model, std::size_t firm, double others_quantity,
                           const BestResponseOptions& options = {});

// Closed-form quantity reply for a fixed investment (epsilon = -1 only).
double best_quantity_for_investment(const MarketModel& model, std::size_t firm,
                                    double others_quantity, double investment);

// Scripted decision for a period; past the end the last entry repeats.
// Throws std::invalid_argument on an empty script.
Decision scripted_decide(std::span<const Decision> script, std::size_t period_index);

// ---------------------------------------------------------------------------
// Stateful agents driven by the simulation engine
// ---------------------------------------------------------------------------

// Side events attached to a decision and written to the run log.
struct EventFlag {
  std::size_t firm = 0;
  std::string kind;  // "clamp", "fallback", "retry", "best_response"
  std::string detail;
  int count = 0;

  friend bool operator==(const EventFlag&, const EventFlag&) = default;
};

struct AgentDecision {
  Decision decision;
  std::vector<EventFlag> flags;
};

class Agent {
 public:
  virtual ~Agent() = default;

  // Label for logs. Never shown to other agents.
  virtual std::string kind_name() const = 0;

  // Decide for `period_index` using only what observe() delivered so far.
  virtual AgentDecision decide(std::size_t period_index) = 0;

  // Feedback after the period barrier.
  virtual void observe(const Observation& observation) = 0;
};

class NashAgent final : public Agent {
 public:
  NashAgent(const MarketModel& model, std::size_t firm);

  std::string kind_name() const override { return "nash"; }
  AgentDecision decide(std::size_t period_index) override;
  void observe(const Observation&) override {}

 private:
  Decision decision_;
};

// Responds to last period's opponents' total (total - own quantity). In the
// first period it responds to the baseline Q_hat - q_hat.
class BestResponseAgent final : public Agent {
 public:
  BestResponseAgent(const MarketModel& model, std::size_t firm, BestResponseOptions options = {});

  std::string kind_name() const override { return "best_response"; }
  AgentDecision decide(std::size_t period_index) override;
  void observe(const Observation& observation) override;

 private:
  const MarketModel* model_;
  std::size_t firm_;
  BestResponseOptions options_;
  double others_prev_;
};

class ScriptedAgent final : public Agent {
 public:
  explicit ScriptedAgent(std::vector<Decision> script);

  std::string kind_name() const override { return "scripted"; }
  AgentDecision decide(std::size_t period_index) override;
  void observe(const Observation&) override {}

 private:
  std::vector<Decision> script_;
};

}  // namespace cournot
