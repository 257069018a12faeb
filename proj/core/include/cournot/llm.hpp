#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cournot/agents.hpp"
#include "cournot/prompt.hpp"

namespace cournot {

struct LlmEndpointConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_name = "gpt-4o";
  double temperature = 1.0;
  std::chrono::milliseconds timeout{120000};
  int max_retries = 2;
  // Name of the environment variable holding the bearer token. The key
  // itself is never stored in configs or logs.
  std::string api_key_env = "OPENAI_API_KEY";
};

struct LlmRequest {
  std::string prompt;
  std::string run_key;
  std::size_t period = 0;
  std::size_t firm = 0;
  int attempt = 0;
};

class LlmTransport {
 public:
  virtual ~LlmTransport() = default;
  // Returns the model's reply text. Throws TransportError. Must be safe to
  // call concurrently for different firms.
  virtual std::string complete(const LlmRequest& request) = 0;
};

// Headers carrying the request key; the mock server keys canned replies on them.
inline constexpr const char* kRunHeader = "X-Cournot-Run";
inline constexpr const char* kPeriodHeader = "X-Cournot-Period";
inline constexpr const char* kFirmHeader = "X-Cournot-Firm";
inline constexpr const char* kAttemptHeader = "X-Cournot-Attempt";

// JSON body for one single-message chat completion.
std::string chat_request_body(const LlmEndpointConfig& endpoint, std::string_view prompt);

// Content of the first choice. Throws TransportError on a malformed body.
std::string chat_reply_content(std::string_view body);

// POST {base_url}/chat/completions, one user message per call.
class HttpChatTransport final : public LlmTransport {
 public:
  explicit HttpChatTransport(LlmEndpointConfig endpoint);
  std::string complete(const LlmRequest& request) override;

 private:
  LlmEndpointConfig endpoint_;
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // path part of base_url, no trailing slash
};

// Directory of canned replies. Lookup order, first in <dir>/<run_key>/ and
// then in <dir>/:
//   p<period>_f<firm>_a<attempt>.txt, p<period>_f<firm>.txt, f<firm>.txt, default.txt
class ReplayLibrary {
 public:
  explicit ReplayLibrary(std::filesystem::path dir);

  std::optional<std::string> find(std::string_view run_key, std::size_t period, std::size_t firm,
                                  int attempt) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

// In-process mock endpoint. A missing reply is a TransportError.
class ReplayTransport final : public LlmTransport {
 public:
  explicit ReplayTransport(std::filesystem::path dir);
  std::string complete(const LlmRequest& request) override;

 private:
  ReplayLibrary library_;
};

struct LlmOutcome {
  Decision decision;
  std::optional<std::string> plans;
  std::optional<std::string> insights;
  int attempts = 0;          // calls made, including the successful one
  int parse_failures = 0;
  int transport_failures = 0;
  bool fallback = false;     // every attempt failed to parse; previous decision reused
  bool clamped = false;
  double requested_percent = 0.0;
  std::vector<EventFlag> flags;
};

struct LlmCall {
  const MarketModel* model = nullptr;
  std::size_t firm = 0;
  std::size_t period = 0;
  std::string run_key;
  Decision previous;  // fallback decision
};

// Renders the prompt, asks the endpoint up to 1 + max_retries times with the
// same prompt and parses the reply. Replies that never parse fall back to
// call.previous. Transport failures are retried too; if the last attempt still
// fails on transport, TransportError propagates.
LlmOutcome llm_decide(LlmTransport& transport, const LlmEndpointConfig& endpoint,
                      const PromptContext& ctx, const LlmCall& call);

// LLM-backed firm. PLANS/INSIGHTS are its only memory across periods; the
// prompt shows it its own history and market aggregates only.
class LlmAgent final : public Agent {
 public:
  LlmAgent(const MarketModel& model, std::size_t firm, LlmEndpointConfig endpoint,
           std::shared_ptr<LlmTransport> transport, std::string run_key);

  std::string kind_name() const override { return "llm"; }
  AgentDecision decide(std::size_t period_index) override;
  void observe(const Observation& observation) override;

  const std::string& plans() const { return plans_; }
  const std::string& insights() const { return insights_; }
  // Prompt sent most recently; empty before the first decision.
  const std::string& last_prompt() const { return last_prompt_; }

 private:
  const MarketModel* model_;
  std::size_t firm_;
  LlmEndpointConfig endpoint_;
  std::shared_ptr<LlmTransport> transport_;
  std::string run_key_;
  std::string plans_;
  std::string insights_;
  std::vector<Observation> history_;
  Decision previous_;
  std::string last_prompt_;
};

}  // namespace cournot
