#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <string>

namespace cournot::mock {

// Chat-completions endpoint that answers from a ReplayLibrary directory.
// Requests are keyed by the X-Cournot-* headers; a missing reply is HTTP 404
// and a body that is not a single user message is HTTP 400.
class MockChatServer {
 public:
  explicit MockChatServer(std::filesystem::path replies);
  ~MockChatServer();

  MockChatServer(const MockChatServer&) = delete;
  MockChatServer& operator=(const MockChatServer&) = delete;

  // Binds and serves on a background thread. Port 0 picks a free port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();

  int requests() const { return requests_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<int> requests_{0};
};

// Minimal chat-completions response body carrying `content`.
std::string chat_completion_body(const std::string& content);

}  // namespace cournot::mock
