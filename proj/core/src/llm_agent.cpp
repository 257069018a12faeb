#include <fmt/format.h>

#include "cournot/errors.hpp"
#include "cournot/llm.hpp"

namespace cournot {

LlmOutcome llm_decide(LlmTransport& transport, const LlmEndpointConfig& endpoint,
                      const PromptContext& ctx, const LlmCall& call) {
  if (!call.model) throw std::invalid_argument("llm_decide needs a market model");
  if (endpoint.max_retries < 0) throw ConfigError("max_retries must be >= 0");

  const std::string prompt = render_prompt(ctx);
  const int budget = 1 + endpoint.max_retries;
  LlmOutcome out;
  std::string last_error;
  bool last_was_transport = false;

  for (int attempt = 0; attempt < budget; ++attempt) {
    ++out.attempts;
    std::string reply;
    try {
      reply = transport.complete(LlmRequest{prompt, call.run_key, call.period, call.firm, attempt});
    } catch (const TransportError& e) {
      ++out.transport_failures;
      last_error = e.what();
      last_was_transport = true;
      continue;
    }
    try {
      ParsedReply parsed = parse_response(reply, *call.model, call.firm);
      out.decision = parsed.decision;
      out.plans = std::move(parsed.plans);
      out.insights = std::move(parsed.insights);
      out.clamped = parsed.clamped;
      out.requested_percent = parsed.requested_percent;
      last_was_transport = false;
      break;
    } catch (const ParseFailure& e) {
      ++out.parse_failures;
      last_error = e.what();
      last_was_transport = false;
      if (attempt + 1 == budget) out.fallback = true;
    } catch (const DomainError& e) {
      // Parsable but not a valid action (e.g. an absurdly large exponent).
      ++out.parse_failures;
      last_error = e.what();
      last_was_transport = false;
      if (attempt + 1 == budget) out.fallback = true;
    }
  }

  if (last_was_transport) {
    throw TransportError(fmt::format("firm {} period {}: {} attempts failed, last: {}", call.firm,
                                     call.period, out.attempts, last_error));
  }

  const int retries = out.attempts - 1;
  if (retries > 0) out.flags.push_back({call.firm, "retry", last_error, retries});
  if (out.fallback) {
    out.decision = call.previous;
    out.requested_percent = call.previous.invest_percent;
    out.flags.push_back({call.firm, "fallback", last_error, 1});
  }
  if (out.clamped) {
    out.flags.push_back(
        {call.firm, "clamp", fmt::format("requested={}", out.requested_percent), 1});
  }
  return out;
}

LlmAgent::LlmAgent(const MarketModel& model, std::size_t firm, LlmEndpointConfig endpoint,
                   std::shared_ptr<LlmTransport> transport, std::string run_key)
    : model_(&model),
      firm_(firm),
      endpoint_(std::move(endpoint)),
      transport_(std::move(transport)),
      run_key_(std::move(run_key)),
      previous_(nash_decide(model, firm)) {
  if (!transport_) throw std::invalid_argument("LlmAgent needs a transport");
}

AgentDecision LlmAgent::decide(std::size_t period_index) {
  PromptContext ctx = initial_prompt_context(*model_, firm_);
  ctx.plans_text = plans_;
  ctx.insights_text = insights_;
  ctx.market_history_text = render_market_history(history_);
  last_prompt_ = render_prompt(ctx);

  LlmOutcome outcome =
      llm_decide(*transport_, endpoint_, ctx, LlmCall{model_, firm_, period_index, run_key_, previous_});
  if (outcome.plans) plans_ = std::move(*outcome.plans);
  if (outcome.insights) insights_ = std::move(*outcome.insights);
  previous_ = outcome.decision;
  return {outcome.decision, std::move(outcome.flags)};
}

void LlmAgent::observe(const Observation& observation) { history_.push_back(observation); }

}  // namespace cournot
