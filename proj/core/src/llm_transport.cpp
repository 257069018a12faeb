#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cournot/errors.hpp"
#include "cournot/llm.hpp"

namespace cournot {

namespace {

std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string chat_request_body(const LlmEndpointConfig& endpoint, std::string_view prompt) {
  nlohmann::json body = {
      {"model", endpoint.model_name},
      {"temperature", endpoint.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
  };
  return body.dump();
}

std::string chat_reply_content(std::string_view body) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw TransportError("chat reply is not JSON");
  const auto* choices = doc.contains("choices") ? &doc["choices"] : nullptr;
  if (!choices || !choices->is_array() || choices->empty()) {
    throw TransportError("chat reply has no choices");
  }
  const auto& first = (*choices)[0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    throw TransportError("chat reply has no message content");
  }
  return first["message"]["content"].get<std::string>();
}

HttpChatTransport::HttpChatTransport(LlmEndpointConfig endpoint) : endpoint_(std::move(endpoint)) {
  const auto scheme_end = endpoint_.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError(fmt::format("base_url '{}' has no scheme", endpoint_.base_url));
  }
  const auto path_start = endpoint_.base_url.find('/', scheme_end + 3);
  origin_ = endpoint_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : endpoint_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpChatTransport::complete(const LlmRequest& request) {
  httplib::Client client(origin_);
  if (!client.is_valid()) throw TransportError(fmt::format("cannot create client for {}", origin_));
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers{
      {kRunHeader, request.run_key},
      {kPeriodHeader, std::to_string(request.period)},
      {kFirmHeader, std::to_string(request.firm)},
      {kAttemptHeader, std::to_string(request.attempt)},
  };
  if (!endpoint_.api_key_env.empty()) {
    if (const char* key = std::getenv(endpoint_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const std::string path = path_prefix_ + "/chat/completions";
  auto res = client.Post(path, headers, chat_request_body(endpoint_, request.prompt), "application/json");
  if (!res) {
    throw TransportError(fmt::format("POST {}{} failed: {}", origin_, path, httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw TransportError(fmt::format("POST {}{} returned HTTP {}", origin_, path, res->status));
  }
  return chat_reply_content(res->body);
}

ReplayLibrary::ReplayLibrary(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir_, ec)) {
    throw ConfigError(fmt::format("mock reply directory '{}' does not exist", dir_.string()));
  }
}

std::optional<std::string> ReplayLibrary::find(std::string_view run_key, std::size_t period,
                                               std::size_t firm, int attempt) const {
  const std::string names[] = {
      fmt::format("p{}_f{}_a{}.txt", period, firm, attempt),
      fmt::format("p{}_f{}.txt", period, firm),
      fmt::format("f{}.txt", firm),
      "default.txt",
  };
  std::vector<std::filesystem::path> roots;
  if (!run_key.empty()) roots.push_back(dir_ / std::string(run_key));
  roots.push_back(dir_);
  for (const auto& root : roots) {
    for (const auto& name : names) {
      if (auto text = read_file(root / name)) return text;
    }
  }
  return std::nullopt;
}

ReplayTransport::ReplayTransport(std::filesystem::path dir) : library_(std::move(dir)) {}

std::string ReplayTransport::complete(const LlmRequest& request) {
  auto text = library_.find(request.run_key, request.period, request.firm, request.attempt);
  if (!text) {
    throw TransportError(fmt::format("no canned reply for run '{}' period {} firm {} in {}",
                                     request.run_key, request.period, request.firm,
                                     library_.dir().string()));
  }
  return *text;
}

}  // namespace cournot
