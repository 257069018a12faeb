#include "cournot/engine.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include <fmt/format.h>

#include "cournot/config.hpp"
#include "cournot/errors.hpp"
#include "cournot/numeric.hpp"
#include "cournot/run_log.hpp"

namespace cournot {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool has_llm(const RunConfig& config) {
  return std::any_of(config.roster.begin(), config.roster.end(),
                     [](const AgentKind& k) { return std::holds_alternative<LlmKind>(k); });
}

std::shared_ptr<LlmTransport> make_transport(const RunConfig& config, const RunHooks& hooks) {
  if (hooks.transport) return hooks.transport;
  if (config.mock_llm_dir) return std::make_shared<ReplayTransport>(*config.mock_llm_dir);
  return std::make_shared<HttpChatTransport>(config.llm);
}

std::unique_ptr<Agent> make_agent(const AgentKind& kind, const MarketModel& model, std::size_t firm,
                                  const RunConfig& config,
                                  const std::shared_ptr<LlmTransport>& transport,
                                  const std::string& run_key) {
  return std::visit(
      overloaded{
          [&](const NashKind&) -> std::unique_ptr<Agent> {
            return std::make_unique<NashAgent>(model, firm);
          },
          [&](const BestResponseKind& br) -> std::unique_ptr<Agent> {
            return std::make_unique<BestResponseAgent>(model, firm, BestResponseOptions{br.cross_check});
          },
          [&](const ScriptedKind& s) -> std::unique_ptr<Agent> {
            return std::make_unique<ScriptedAgent>(resolve_script(model, firm, s.steps));
          },
          [&](const LlmKind&) -> std::unique_ptr<Agent> {
            return std::make_unique<LlmAgent>(model, firm, config.llm, transport, run_key);
          },
      },
      kind);
}

bool same_profile(const std::vector<Decision>& a, const std::vector<Decision>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].same_action(b[i])) return false;
  }
  return true;
}

}  // namespace

std::string kind_label(const AgentKind& kind) {
  return std::visit(overloaded{
                        [](const NashKind&) { return std::string("nash"); },
                        [](const BestResponseKind& b) {
                          return std::string(b.cross_check ? "best_response+check" : "best_response");
                        },
                        [](const ScriptedKind& s) { return "scripted:" + s.source; },
                        [](const LlmKind&) { return std::string("llm"); },
                    },
                    kind);
}

std::vector<Decision> resolve_script(const MarketModel& model, std::size_t firm,
                                     const std::vector<ScriptStep>& steps) {
  if (steps.empty()) throw ConfigError(fmt::format("firm {} has an empty script", firm));
  std::vector<Decision> out;
  out.reserve(steps.size());
  for (const ScriptStep& s : steps) {
    const double q = s.relative ? s.quantity * model.baseline_quantity(firm) : s.quantity;
    out.push_back(Decision::make(model, firm, q, s.max_invest ? max_invest_percent(model) : s.invest_percent));
  }
  return out;
}

void RunConfig::validate() const {
  market.validate();
  if (roster.size() != market.firm_count()) {
    throw ConfigError(fmt::format("roster has {} agents for {} firms", roster.size(), market.firm_count()));
  }
  if (max_periods < 1) throw ConfigError("max_periods must be at least 1");
  if (!std::isfinite(llm.temperature) || llm.temperature < 0.0) {
    throw ConfigError("llm temperature must be a non-negative number");
  }
  if (llm.max_retries < 0) throw ConfigError("llm max_retries must be >= 0");
  if (llm.timeout.count() <= 0) throw ConfigError("llm timeout must be positive");
  for (std::size_t i = 0; i < roster.size(); ++i) {
    if (const auto* s = std::get_if<ScriptedKind>(&roster[i]); s && s->steps.empty()) {
      throw ConfigError(fmt::format("firm {} has an empty script", i));
    }
  }
}

const char* to_string(Termination termination) {
  switch (termination) {
    case Termination::MaxPeriods: return "max_periods";
    case Termination::Stalled: return "stalled";
  }
  return "unknown";
}

PeriodRecord step(const MarketModel& model, const std::vector<Decision>& decisions,
                  std::size_t period_index) {
  const std::size_t n = model.firm_count();
  if (decisions.size() != n) {
    throw DomainError(fmt::format("{} decisions for {} firms", decisions.size(), n));
  }
  PeriodRecord rec;
  rec.period_index = period_index;
  rec.decisions = decisions;
  rec.unit_costs.resize(n);
  rec.profits.resize(n);

  std::vector<double> quantities(n);
  for (std::size_t i = 0; i < n; ++i) {
    quantities[i] = decisions[i].quantity;
    rec.unit_costs[i] = unit_cost(model, i, decisions[i].investment);
  }
  rec.total_quantity = ordered_sum(quantities);
  if (!(rec.total_quantity >= model.min_total_quantity())) {
    throw DomainError(fmt::format("period {}: total production {} is below the floor {}", period_index,
                                  rec.total_quantity, model.min_total_quantity()));
  }
  rec.price = price(model, rec.total_quantity);
  for (std::size_t i = 0; i < n; ++i) {
    const Decision& d = decisions[i];
    rec.profits[i] = d.quantity == 0.0 ? -d.investment
                                       : (rec.price - rec.unit_costs[i]) * d.quantity - d.investment;
  }
  return rec;
}

RunResult run(const RunConfig& config, const RunHooks& hooks) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  const MarketModel model = derive_model(config.market);
  const std::size_t n = model.firm_count();

  std::shared_ptr<LlmTransport> transport;
  if (has_llm(config)) transport = make_transport(config, hooks);
  const std::string run_key = fmt::format("seed-{}", config.seed);

  std::vector<std::unique_ptr<Agent>> agents;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    agents.push_back(make_agent(config.roster[i], model, i, config, transport, run_key));
    labels.push_back(kind_label(config.roster[i]));
  }

  RunResult result{run_id(config), config_digest(config), model, labels, {}, Termination::MaxPeriods, {}};

  std::optional<RunLogWriter> writer;
  if (!config.output_path.empty()) {
    RunLogHeader header;
    header.run_id = result.run_id;
    header.config_digest = result.config_digest;
    header.seed = config.seed;
    header.market = config.market;
    header.roster = labels;
    header.max_periods = config.max_periods;
    header.stall_window = config.stall_window;
    writer.emplace(config.output_path, header);
  }

  std::size_t unchanged = 0;
  for (std::size_t t = 0; t < config.max_periods; ++t) {
    std::vector<AgentDecision> chosen(n);
    std::vector<std::future<AgentDecision>> pending(n);
    std::size_t llm_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::holds_alternative<LlmKind>(config.roster[i])) ++llm_count;
    }
    const bool parallel = config.concurrent_llm && llm_count > 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (parallel && std::holds_alternative<LlmKind>(config.roster[i])) {
        pending[i] = std::async(std::launch::async, [&agents, i, t] { return agents[i]->decide(t); });
      } else {
        chosen[i] = agents[i]->decide(t);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (pending[i].valid()) chosen[i] = pending[i].get();
    }

    std::vector<Decision> decisions;
    decisions.reserve(n);
    std::vector<EventFlag> flags;
    for (auto& c : chosen) {
      decisions.push_back(c.decision);
      for (auto& f : c.flags) flags.push_back(std::move(f));
    }
    PeriodRecord rec = step(model, decisions, t);
    rec.flags = std::move(flags);
    if (writer) writer->append(rec);

    for (std::size_t i = 0; i < n; ++i) {
      agents[i]->observe(Observation{t, rec.decisions[i].quantity, rec.decisions[i].invest_percent,
                                     rec.unit_costs[i], rec.total_quantity, rec.price, rec.profits[i]});
    }

    if (!result.history.empty() && same_profile(result.history.back().decisions, rec.decisions)) {
      ++unchanged;
    } else {
      unchanged = 0;
    }
    result.history.push_back(std::move(rec));
    if (config.stall_window > 0 && unchanged >= config.stall_window) {
      result.termination = Termination::Stalled;
      break;
    }
  }

  if (writer) writer->finish(RunLogTrailer{result.termination, result.history.size()});
  result.wall_clock = std::chrono::steady_clock::now() - started;
  return result;
}

RunConfig regulation_roster(const RunConfig& base, std::size_t top_k) {
  const std::size_t n = base.market.firm_count();
  if (top_k > n) throw ConfigError(fmt::format("regulate-top {} exceeds {} firms", top_k, n));
  if (base.roster.size() != n) {
    throw ConfigError(fmt::format("roster has {} agents for {} firms", base.roster.size(), n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto& q = base.market.baseline_quantities;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return q[a] > q[b]; });

  RunConfig out = base;
  for (std::size_t k = 0; k < top_k; ++k) out.roster[order[k]] = BestResponseKind{};
  return out;
}

}  // namespace cournot
