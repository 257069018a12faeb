#include "mock_server.hpp"

#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cournot/llm.hpp"

namespace cournot::mock {

struct MockChatServer::Impl {
  explicit Impl(std::filesystem::path dir) : library(std::move(dir)) {}
  ReplayLibrary library;
  httplib::Server server;
  std::thread thread;
};

std::string chat_completion_body(const std::string& content) {
  nlohmann::json body = {
      {"object", "chat.completion"},
      {"choices", nlohmann::json::array({{{"index", 0},
                                          {"finish_reason", "stop"},
                                          {"message", {{"role", "assistant"}, {"content", content}}}}})},
  };
  return body.dump();
}

MockChatServer::MockChatServer(std::filesystem::path replies) : impl_(std::make_unique<Impl>(std::move(replies))) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    const auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("messages") || !body["messages"].is_array() ||
        body["messages"].size() != 1 || body["messages"][0].value("role", "") != "user") {
      res.status = 400;
      res.set_content(R"({"error":"expected one user message"})", "application/json");
      return;
    }
    std::size_t period = 0, firm = 0;
    int attempt = 0;
    try {
      auto header = [&](const char* key) {
        return req.has_header(key) ? req.get_header_value(key) : std::string("0");
      };
      period = std::stoul(header(kPeriodHeader));
      firm = std::stoul(header(kFirmHeader));
      attempt = std::stoi(header(kAttemptHeader));
    } catch (const std::exception&) {
      res.status = 400;
      res.set_content(R"({"error":"bad request key headers"})", "application/json");
      return;
    }
    const auto reply = impl_->library.find(req.get_header_value(kRunHeader), period, firm, attempt);
    if (!reply) {
      res.status = 404;
      res.set_content(R"({"error":"no canned reply"})", "application/json");
      return;
    }
    res.set_content(chat_completion_body(*reply), "application/json");
  };
  impl_->server.Post("/chat/completions", handler);
  impl_->server.Post("/v1/chat/completions", handler);
}

MockChatServer::~MockChatServer() { stop(); }

int MockChatServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("mock server could not bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

bool MockChatServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

void MockChatServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace cournot::mock
