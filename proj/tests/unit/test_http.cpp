#include <gtest/gtest.h>

#include <mutex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cournot/engine.hpp"
#include "cournot/errors.hpp"
#include "cournot/llm.hpp"
#include "mock/mock_server.hpp"
#include "test_util.hpp"

using namespace cournot;

namespace {

LlmEndpointConfig endpoint_at(int port) {
  LlmEndpointConfig e;
  e.base_url = fmt::format("http://127.0.0.1:{}/v1", port);
  e.timeout = std::chrono::milliseconds(5000);
  e.api_key_env = "COURNOT_TEST_KEY";
  return e;
}

}  // namespace

TEST(MockServer, ServesCannedReplies) {
  test_util::TempDir dir;
  test_util::write(dir.path() / "default.txt", "hello");
  mock::MockChatServer server(dir.path());
  const int port = server.start();
  ASSERT_GT(port, 0);
  HttpChatTransport t(endpoint_at(port));
  EXPECT_EQ(t.complete(LlmRequest{"prompt", "seed-0", 0, 0, 0}), "hello");
  EXPECT_EQ(server.requests(), 1);
  server.stop();
}

TEST(MockServer, MissingReplyIsTransportError) {
  test_util::TempDir dir;
  mock::MockChatServer server(dir.path());
  const int port = server.start();
  HttpChatTransport t(endpoint_at(port));
  EXPECT_THROW(t.complete(LlmRequest{"prompt", "seed-0", 0, 0, 0}), TransportError);
}

TEST(HttpTransport, UnreachableEndpoint) {
  LlmEndpointConfig e = endpoint_at(1);
  e.timeout = std::chrono::milliseconds(500);
  HttpChatTransport t(e);
  EXPECT_THROW(t.complete(LlmRequest{"prompt", "seed-0", 0, 0, 0}), TransportError);
}

TEST(HttpTransport, SendsBearerAndSingleMessage) {
  httplib::Server server;
  std::mutex mu;
  std::string auth, body, period;
  server.Post("/api/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mu);
    auth = req.get_header_value("Authorization");
    period = req.get_header_value(kPeriodHeader);
    body = req.body;
    res.set_content(mock::chat_completion_body("ok"), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("COURNOT_TEST_KEY", "secret-token", 1);
  LlmEndpointConfig e = endpoint_at(port);
  e.base_url = fmt::format("http://127.0.0.1:{}/api/v1/", port);
  e.model_name = "m1";
  HttpChatTransport t(e);
  EXPECT_EQ(t.complete(LlmRequest{"the prompt", "seed-0", 7, 1, 0}), "ok");
  unsetenv("COURNOT_TEST_KEY");
  server.stop();
  th.join();

  EXPECT_EQ(auth, "Bearer secret-token");
  EXPECT_EQ(period, "7");
  const auto j = nlohmann::json::parse(body);
  EXPECT_EQ(j["model"], "m1");
  ASSERT_EQ(j["messages"].size(), 1u);
  EXPECT_EQ(j["messages"][0]["content"], "the prompt");
}

TEST(HttpTransport, HttpRunEqualsInProcessReplay) {
  const std::filesystem::path replies = COURNOT_FIXTURES_DIR "/replies";
  mock::MockChatServer server(replies);
  const int port = server.start();

  RunConfig c;
  c.market.baseline_quantities = {150, 150};
  c.roster = {LlmKind{}, LlmKind{}};
  c.max_periods = 15;
  c.stall_window = 0;
  c.seed = 2;
  c.llm = endpoint_at(port);
  const RunResult over_http = run(c);
  c.mock_llm_dir = replies;
  const RunResult replayed = run(c);
  EXPECT_EQ(over_http.history, replayed.history);
  EXPECT_GT(server.requests(), 30);

  bool fallback = false, clamp = false;
  for (const auto& rec : replayed.history) {
    for (const auto& f : rec.flags) {
      fallback = fallback || (f.kind == "fallback" && rec.period_index == 1 && f.firm == 0);
      clamp = clamp || (f.kind == "clamp" && rec.period_index == 2 && f.firm == 1);
    }
  }
  EXPECT_TRUE(fallback);
  EXPECT_TRUE(clamp);
}
