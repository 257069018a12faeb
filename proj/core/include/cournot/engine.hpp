#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cournot/agents.hpp"
#include "cournot/decision.hpp"
#include "cournot/llm.hpp"
#include "cournot/market.hpp"

namespace cournot {

// One scripted action. With `relative` set, quantity is a multiple of the
// firm's baseline quantity; with `max_invest` set, invest_percent is ignored
// and the firm invests 100 * c percent.
struct ScriptStep {
  double quantity = 0.0;
  double invest_percent = 0.0;
  bool relative = false;
  bool max_invest = false;

  friend bool operator==(const ScriptStep&, const ScriptStep&) = default;
};

struct NashKind {
  friend bool operator==(const NashKind&, const NashKind&) = default;
};
struct BestResponseKind {
  bool cross_check = false;
  friend bool operator==(const BestResponseKind&, const BestResponseKind&) = default;
};
struct ScriptedKind {
  std::vector<ScriptStep> steps;
  std::string source;  // label for logs: file name or inline text
  friend bool operator==(const ScriptedKind&, const ScriptedKind&) = default;
};
struct LlmKind {
  friend bool operator==(const LlmKind&, const LlmKind&) = default;
};

using AgentKind = std::variant<NashKind, BestResponseKind, ScriptedKind, LlmKind>;

// "nash", "best_response", "scripted:<source>", "llm".
std::string kind_label(const AgentKind& kind);

// Resolves scripted steps against the model. Throws DomainError on an
// invalid action.
std::vector<Decision> resolve_script(const MarketModel& model, std::size_t firm,
                                     const std::vector<ScriptStep>& steps);

struct RunConfig {
  MarketSpec market;
  std::vector<AgentKind> roster;
  std::size_t max_periods = 150;
  std::size_t stall_window = 10;  // 0 disables stall termination
  std::uint64_t seed = 0;
  std::filesystem::path output_path;  // JSONL log; empty writes nothing

  LlmEndpointConfig llm;
  std::optional<std::filesystem::path> mock_llm_dir;  // replay canned replies instead of HTTP
  bool concurrent_llm = true;                         // issue LLM calls of one period in parallel

  // Throws ConfigError (or SpecError for the market).
  void validate() const;
};

struct PeriodRecord {
  std::size_t period_index = 0;
  std::vector<Decision> decisions;
  std::vector<double> unit_costs;
  double total_quantity = 0.0;
  double price = 0.0;
  std::vector<double> profits;
  std::vector<EventFlag> flags;

  friend bool operator==(const PeriodRecord&, const PeriodRecord&) = default;
};

enum class Termination { MaxPeriods, Stalled };

const char* to_string(Termination termination);

struct RunResult {
  std::string run_id;
  std::string config_digest;
  MarketModel model;
  std::vector<std::string> roster_labels;
  std::vector<PeriodRecord> history;
  Termination termination = Termination::MaxPeriods;
  std::chrono::nanoseconds wall_clock{0};  // in memory only, never logged
};

// Resolves one period: unit costs, price, profits. Pure.
// Throws DomainError when total production is below the model's floor.
PeriodRecord step(const MarketModel& model, const std::vector<Decision>& decisions,
                  std::size_t period_index = 0);

struct RunHooks {
  // Overrides the transport LLM agents use (tests, shared clients).
  std::shared_ptr<LlmTransport> transport;
};

// Runs periods until max_periods or a stall. Every record is appended to the
// log and flushed before the next period starts, so a TransportError leaves
// the completed periods on disk.
RunResult run(const RunConfig& config, const RunHooks& hooks = {});

// Config where the top_k largest-share firms play best response. Equal shares
// keep roster order. Throws ConfigError when top_k > n_firms.
RunConfig regulation_roster(const RunConfig& base, std::size_t top_k);

}  // namespace cournot
