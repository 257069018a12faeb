#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cournot/engine.hpp"
#include "cournot/market.hpp"

namespace cournot {

// ---------------------------------------------------------------------------
// Convergence
// ---------------------------------------------------------------------------

enum class ConvergenceRule {
  Containment,  // [p10, p90] inside [(1 - band) N, (1 + band) N]
  Width,        // p90 - p10 <= band * N
};

const char* to_string(ConvergenceRule rule);

struct ConvergenceVerdict {
  bool converged = false;
  double p10 = 0.0;
  double p90 = 0.0;
  double nash_value = 0.0;
  std::size_t window = 0;
  double band = 0.0;
  ConvergenceRule rule = ConvergenceRule::Containment;
};

// Percentiles over the last `window` values. Throws std::invalid_argument when
// the series is shorter than the window, the window is 0 or nash_value <= 0.
ConvergenceVerdict converged(std::span<const double> series, double nash_value, std::size_t window = 100,
                             double band = 0.10, ConvergenceRule rule = ConvergenceRule::Containment);

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

// Per-period values in raw or Nash-normalized units.
struct PeriodValues {
  std::size_t period_index = 0;
  std::vector<double> quantities;
  std::vector<double> investments;
  std::vector<double> profits;
  double price = 0.0;
};

std::vector<PeriodValues> raw_values(std::span<const PeriodRecord> history);

// Quantities / q_hat, investments / b_hat, profits / Nash profit, price / p_hat.
std::vector<PeriodValues> normalize(const MarketModel& model, std::span<const PeriodRecord> history);
std::vector<PeriodValues> denormalize(const MarketModel& model, std::span<const PeriodValues> normalized);

// ---------------------------------------------------------------------------
// Best-response convergence probe
// ---------------------------------------------------------------------------

enum class ProbeUpdate {
  GaussSeidel,  // firms respond one after another, largest baseline first
  Jacobi,       // all firms respond to the previous iterate at once
};

const char* to_string(ProbeUpdate update);

struct BrProbeOptions {
  double tolerance = 0.01;  // fraction of q_hat
  std::size_t max_iter = 50;
  ProbeUpdate update = ProbeUpdate::GaussSeidel;
};

struct BrProbeResult {
  std::size_t iterations = 0;  // sweeps until every firm is within tolerance
  bool converged = false;
  std::vector<double> final_quantities;
  std::string failure;  // why iteration stopped early, if it did
};

// Replaces every firm by a best responder and iterates from the given state.
// Throws DomainError for an infeasible start (size mismatch, negative
// quantity, investment outside [0, cap]).
BrProbeResult br_convergence_probe(const MarketModel& model, std::span<const double> start_quantities,
                                   std::span<const double> start_investments,
                                   const BrProbeOptions& options = {});

// Seeded uniform states: q in [lo, hi] * q_hat, b in [0, cap].
struct ProbeState {
  std::vector<double> quantities;
  std::vector<double> investments;
};

std::vector<ProbeState> random_states(const MarketModel& model, std::size_t count, std::uint64_t seed,
                                      double lo = 0.3, double hi = 2.0);

// ---------------------------------------------------------------------------
// Probe reports
// ---------------------------------------------------------------------------

struct ProbeReport {
  std::size_t states_checked = 0;
  double investment_optimal_fraction = 0.0;
  double br_iterations_mean = 0.0;
  std::size_t br_iterations_max = 0;
  // BR probe: fraction of starts that reached the tolerance band.
  // Investment probe: fraction of decisions investing within 1% of b_hat.
  double within_pct_of_nash = 0.0;
};

ProbeReport br_probe_report(const MarketModel& model, std::span<const ProbeState> starts,
                            const BrProbeOptions& options = {});

// Profit-maximising investment with (Q-i, q) held fixed, clamped to [0, cap].
// Independent of Q-i: b* = (-k1 k2 q)^(1 / (1 - k2)); 0 when q = 0.
double optimal_investment(const MarketModel& model, std::size_t firm, double quantity);

// Unclamped stationary point of the same problem.
double unconstrained_investment(const MarketModel& model, double quantity);

// True when investing the full cap is the profit maximiser for this quantity.
bool cap_optimal(const MarketModel& model, std::size_t firm, double quantity);

// Every (firm, period) decision: is the cap the optimal investment given the
// realised quantities?
ProbeReport investment_optimality_probe(const MarketModel& model, std::span<const PeriodRecord> history);

// ---------------------------------------------------------------------------
// Summaries and exports
// ---------------------------------------------------------------------------

struct Stat {
  double mean = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
};

struct FirmSummary {
  std::size_t firm = 0;
  Stat quantity;    // normalized
  Stat investment;  // normalized
  Stat profit;      // normalized
};

struct SummaryStats {
  std::size_t window = 0;
  std::vector<FirmSummary> firms;
  Stat price;  // normalized
  double raw_price_mean = 0.0;
};

// Throws std::invalid_argument when the history is shorter than last_n.
SummaryStats summary_stats(const MarketModel& model, std::span<const PeriodRecord> history,
                           std::size_t last_n = 50);

// One row per firm per statistic: scope,firm,variable,statistic,value.
void write_summary_csv(std::ostream& out, const SummaryStats& stats);
std::string summary_json(const SummaryStats& stats);

struct NamedVerdict {
  std::string variable;  // quantity, investment, profit, price
  std::optional<std::size_t> firm;
  ConvergenceVerdict verdict;
};

// Verdicts on every firm's quantity, investment and profit and on the price.
std::vector<NamedVerdict> convergence_report(const MarketModel& model, std::span<const PeriodRecord> history,
                                             std::size_t window = 100, double band = 0.10,
                                             ConvergenceRule rule = ConvergenceRule::Containment);

void write_verdicts_csv(std::ostream& out, std::span<const NamedVerdict> verdicts);
std::string probe_json(const ProbeReport& report);

// Plot data over the last `last_n` periods, long format:
// run_id,period,firm,value (firm empty for price).
enum class Family { Quantity, Investment, Profit, Price };
const char* to_string(Family family);
void write_family_csv(std::ostream& out, const std::string& run_id, const MarketModel& model,
                      std::span<const PeriodRecord> history, Family family, std::size_t last_n,
                      bool header = true);

// Box-plot statistics of the normalized last-`last_n` values, keyed by run:
// run_id,firm,variable,min,p10,p25,median,p75,p90,max,mean.
void write_boxplot_csv(std::ostream& out, const std::string& run_id, const MarketModel& model,
                       std::span<const PeriodRecord> history, std::size_t last_n, bool header = true);

}  // namespace cournot
