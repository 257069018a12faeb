#include <unistd.h>

#include <csignal>
#include <cstdio>

#include <CLI11.hpp>

#include "mock_server.hpp"

namespace {
volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replays canned chat-completion replies from a directory"};
  std::string dir;
  std::string host = "127.0.0.1";
  int port = 8089;
  app.add_option("--dir", dir, "Directory of canned replies")->required()->check(CLI::ExistingDirectory);
  app.add_option("--host", host, "Interface to bind");
  app.add_option("--port", port, "Port to bind (0 picks a free port)");
  CLI11_PARSE(app, argc, argv);

  try {
    cournot::mock::MockChatServer server(dir);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const int bound = server.start(host, port);
    std::printf("listening on http://%s:%d/v1\n", host.c_str(), bound);
    std::fflush(stdout);
    while (!g_stop) pause();
    server.stop();
    std::printf("served %d requests\n", server.requests());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mock_llm_server: %s\n", e.what());
    return 1;
  }
  return 0;
}
