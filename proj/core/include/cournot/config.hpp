#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cournot/engine.hpp"

namespace cournot {

// Settings for `analyze` and `validate` that are not part of a run.
struct AnalysisConfig {
  std::size_t window = 100;     // convergence window
  double band = 0.10;           // convergence band around the Nash level
  std::size_t last_n = 50;      // summary-statistics window
  std::size_t probe_starts = 100;
  double probe_tolerance = 0.01;
  std::size_t probe_max_iter = 50;
  std::size_t investment_states = 500;
};

struct ExperimentConfig {
  RunConfig run;
  AnalysisConfig analysis;
};

// Named markets shipped with the tool: two_firm, five_firm, six_firm,
// five_firm_percent.
std::vector<std::string> preset_names();
MarketSpec preset_market(std::string_view name);

// Parses one roster entry: nash, best_response (br), best_response+check,
// llm, colluder (constant half-baseline quantity at full investment),
// scripted:@<q>/<pct> (append x to q for a multiple of the baseline quantity)
// or scripted:<file.json>. Relative file paths resolve against base_dir.
AgentKind parse_agent_kind(std::string_view text, const std::filesystem::path& base_dir = {});

// Comma separated list of entries as above.
std::vector<AgentKind> parse_roster(std::string_view text, const std::filesystem::path& base_dir = {});

// Script files: [{"quantity": 75, "invest_percent": 20}, ...]; use
// "quantity_multiple" instead of "quantity" for baseline-relative steps.
std::vector<ScriptStep> load_script(const std::filesystem::path& path);

// JSON config document. Sections: market (preset or explicit fields), run,
// llm, analysis. Throws ConfigError.
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// "preset:<name>" or a path to a JSON config.
ExperimentConfig load_config_or_preset(std::string_view ref);

// Canonical JSON of everything that affects a run's numbers, excluding the
// output path and seed.
std::string canonical_config(const RunConfig& config);

// 16 hex digits, FNV-1a 64 over the canonical config.
std::string config_digest(const RunConfig& config);

// 16 hex digits, FNV-1a 64 over the canonical config and seed.
std::string run_id(const RunConfig& config);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace cournot
