#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cournot::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,      // bad config, spec, flags or input values
  kExitIo = 3,          // unreadable or unwritable files, bad run logs
  kExitTransport = 4,   // LLM endpoint failed after retries
  kExitValidation = 5,  // validate found a failing check
  kExitStalled = 10,    // run ended by the stall rule
};

struct DeriveOptions {
  std::string config;
  std::string out;
  std::optional<double> override_k1;
};

struct RunOptions {
  std::string config;
  std::optional<std::string> roster;
  std::optional<std::size_t> regulate_top;
  std::optional<std::size_t> periods;
  std::optional<std::size_t> stall_window;
  std::optional<unsigned long long> seed;
  std::string out = "runs";
  std::size_t jobs = 1;
  std::size_t repeat = 1;
  std::optional<std::string> mock_llm;
};

struct ValidateOptions {
  std::string config;
  std::optional<std::string> out;
  std::optional<unsigned long long> seed;
  std::optional<double> override_k1;
  std::optional<std::size_t> starts;
  bool jacobi = false;
};

struct AnalyzeOptions {
  std::string history;
  std::optional<std::string> config;
  std::string out = "analysis";
  std::optional<std::size_t> window;
  std::optional<double> band;
  std::optional<std::size_t> last_n;
  std::string rule = "containment";
};

struct ExportOptions {
  std::string history;
  std::string out = "plots";
  std::size_t last_n = 50;
};

int cmd_derive(const DeriveOptions& opts, std::ostream& out);
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_validate(const ValidateOptions& opts, std::ostream& out);
int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out);
int cmd_export(const ExportOptions& opts, std::ostream& out);

// Parses argv, dispatches and maps exceptions to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cournot::cli
