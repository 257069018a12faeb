#include "cournot/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cournot/errors.hpp"

namespace cournot {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

double to_number(std::string_view text, std::string_view what) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", what, text));
  }
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    std::string_view section) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(fmt::format("unknown key '{}' in section '{}'", key, section));
  }
}

// "@<q>[x]/<pct|max>" steps separated by ';'.
std::vector<ScriptStep> parse_inline_script(std::string_view text) {
  std::vector<ScriptStep> steps;
  while (!text.empty()) {
    const auto semi = text.find(';');
    std::string_view item = trim(text.substr(0, semi));
    text = semi == std::string_view::npos ? std::string_view{} : text.substr(semi + 1);
    if (item.empty()) continue;
    const auto slash = item.find('/');
    if (slash == std::string_view::npos) {
      throw ConfigError(fmt::format("script step '{}' must look like <quantity>/<percent>", item));
    }
    ScriptStep s;
    std::string_view q = trim(item.substr(0, slash));
    std::string_view pct = trim(item.substr(slash + 1));
    if (!q.empty() && (q.back() == 'x' || q.back() == 'X')) {
      s.relative = true;
      q.remove_suffix(1);
    }
    s.quantity = to_number(q, "script quantity");
    if (pct == "max") {
      s.max_invest = true;
    } else {
      s.invest_percent = to_number(pct, "script invest percent");
    }
    steps.push_back(s);
  }
  if (steps.empty()) throw ConfigError("inline script has no steps");
  return steps;
}

MarketSpec market_from(const json& m) {
  if (!m.is_object()) throw ConfigError("section 'market' must be an object");
  reject_unknown(m, {"preset", "baseline_quantities", "baseline_price", "elasticity", "invest_fraction_cap"},
                 "market");
  MarketSpec spec;
  if (m.contains("preset")) {
    spec = preset_market(m.at("preset").get<std::string>());
  } else if (!m.contains("baseline_quantities")) {
    throw ConfigError("section 'market' needs 'preset' or 'baseline_quantities'");
  }
  if (m.contains("baseline_quantities")) {
    spec.baseline_quantities = m.at("baseline_quantities").get<std::vector<double>>();
  }
  if (m.contains("baseline_price")) spec.baseline_price = m.at("baseline_price").get<double>();
  if (m.contains("elasticity")) spec.elasticity = m.at("elasticity").get<double>();
  if (m.contains("invest_fraction_cap")) spec.invest_fraction_cap = m.at("invest_fraction_cap").get<double>();
  return spec;
}

json steps_json(const std::vector<ScriptStep>& steps) {
  json arr = json::array();
  for (const ScriptStep& s : steps) {
    arr.push_back({{"quantity", s.quantity},
                   {"invest_percent", s.invest_percent},
                   {"relative", s.relative},
                   {"max_invest", s.max_invest}});
  }
  return arr;
}

}  // namespace

std::vector<std::string> preset_names() { return {"two_firm", "five_firm", "six_firm", "five_firm_percent"}; }

MarketSpec preset_market(std::string_view name) {
  MarketSpec spec;
  if (name == "two_firm") {
    spec.baseline_quantities = {150, 150};
  } else if (name == "five_firm") {
    spec.baseline_quantities = {350, 250, 200, 150, 50};
  } else if (name == "six_firm") {
    spec.baseline_quantities = {314, 202, 169, 145, 125, 46};
  } else if (name == "five_firm_percent") {
    spec.baseline_quantities = {35, 25, 20, 15, 5};
  } else {
    throw ConfigError(fmt::format("unknown preset '{}'", name));
  }
  return spec;
}

std::vector<ScriptStep> load_script(const std::filesystem::path& path) {
  const json doc = json::parse(read_text(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_array() || doc.empty()) {
    throw ConfigError(fmt::format("script '{}' must be a non-empty JSON array", path.string()));
  }
  std::vector<ScriptStep> steps;
  try {
    for (const json& item : doc) {
      reject_unknown(item, {"quantity", "quantity_multiple", "invest_percent"}, "script step");
      ScriptStep s;
      if (item.contains("quantity") == item.contains("quantity_multiple")) {
        throw ConfigError("script step needs exactly one of 'quantity' and 'quantity_multiple'");
      }
      if (item.contains("quantity")) {
        s.quantity = item.at("quantity").get<double>();
      } else {
        s.quantity = item.at("quantity_multiple").get<double>();
        s.relative = true;
      }
      const json& pct = item.at("invest_percent");
      if (pct.is_string() && pct.get<std::string>() == "max") {
        s.max_invest = true;
      } else {
        s.invest_percent = pct.get<double>();
      }
      steps.push_back(s);
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("script '{}': {}", path.string(), e.what()));
  }
  return steps;
}

AgentKind parse_agent_kind(std::string_view text, const std::filesystem::path& base_dir) {
  text = trim(text);
  if (text == "nash") return NashKind{};
  if (text == "best_response" || text == "br") return BestResponseKind{};
  if (text == "best_response+check" || text == "br+check") return BestResponseKind{true};
  if (text == "llm") return LlmKind{};
  if (text == "colluder") return ScriptedKind{{ScriptStep{0.5, 0.0, true, true}}, "colluder"};
  constexpr std::string_view kScripted = "scripted:";
  if (text.substr(0, kScripted.size()) == kScripted) {
    std::string_view arg = trim(text.substr(kScripted.size()));
    if (arg.empty()) throw ConfigError("scripted agent needs a script");
    if (arg.front() == '@') return ScriptedKind{parse_inline_script(arg.substr(1)), std::string(arg)};
    std::filesystem::path path{std::string(arg)};
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    return ScriptedKind{load_script(path), std::string(arg)};
  }
  throw ConfigError(fmt::format(
      "unknown agent kind '{}' (expected nash, best_response, llm, colluder or scripted:...)", text));
}

std::vector<AgentKind> parse_roster(std::string_view text, const std::filesystem::path& base_dir) {
  std::vector<AgentKind> roster;
  while (true) {
    const auto comma = text.find(',');
    roster.push_back(parse_agent_kind(text.substr(0, comma), base_dir));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return roster;
}

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  const json doc = json::parse(json_text, nullptr, false, true);
  if (doc.is_discarded() || !doc.is_object()) throw ConfigError("config is not a JSON object");
  ExperimentConfig cfg;
  try {
    reject_unknown(doc, {"market", "run", "llm", "analysis"}, "<root>");
    if (!doc.contains("market")) throw ConfigError("config has no 'market' section");
    cfg.run.market = market_from(doc.at("market"));

    if (doc.contains("llm")) {
      const json& l = doc.at("llm");
      reject_unknown(l, {"base_url", "model", "temperature", "timeout_ms", "max_retries", "api_key_env"}, "llm");
      LlmEndpointConfig& e = cfg.run.llm;
      if (l.contains("base_url")) e.base_url = l.at("base_url").get<std::string>();
      if (l.contains("model")) e.model_name = l.at("model").get<std::string>();
      if (l.contains("temperature")) e.temperature = l.at("temperature").get<double>();
      if (l.contains("timeout_ms")) e.timeout = std::chrono::milliseconds(l.at("timeout_ms").get<long>());
      if (l.contains("max_retries")) e.max_retries = l.at("max_retries").get<int>();
      if (l.contains("api_key_env")) e.api_key_env = l.at("api_key_env").get<std::string>();
    }

    cfg.run.roster.assign(cfg.run.market.firm_count(), NashKind{});
    if (doc.contains("run")) {
      const json& r = doc.at("run");
      reject_unknown(r, {"roster", "max_periods", "stall_window", "seed", "output", "mock_llm_dir", "concurrent_llm"},
                     "run");
      if (r.contains("roster")) {
        const json& roster = r.at("roster");
        if (roster.is_string()) {
          cfg.run.roster = parse_roster(roster.get<std::string>(), base_dir);
        } else {
          cfg.run.roster.clear();
          for (const json& k : roster) cfg.run.roster.push_back(parse_agent_kind(k.get<std::string>(), base_dir));
        }
      }
      if (r.contains("max_periods")) cfg.run.max_periods = r.at("max_periods").get<std::size_t>();
      if (r.contains("stall_window")) cfg.run.stall_window = r.at("stall_window").get<std::size_t>();
      if (r.contains("seed")) cfg.run.seed = r.at("seed").get<std::uint64_t>();
      if (r.contains("output")) cfg.run.output_path = r.at("output").get<std::string>();
      if (r.contains("concurrent_llm")) cfg.run.concurrent_llm = r.at("concurrent_llm").get<bool>();
      if (r.contains("mock_llm_dir")) {
        std::filesystem::path dir = r.at("mock_llm_dir").get<std::string>();
        if (dir.is_relative() && !base_dir.empty()) dir = base_dir / dir;
        cfg.run.mock_llm_dir = dir;
      }
    }

    if (doc.contains("analysis")) {
      const json& a = doc.at("analysis");
      reject_unknown(a, {"window", "band", "last_n", "probe_starts", "probe_tolerance", "probe_max_iter",
                         "investment_states"},
                     "analysis");
      AnalysisConfig& c = cfg.analysis;
      if (a.contains("window")) c.window = a.at("window").get<std::size_t>();
      if (a.contains("band")) c.band = a.at("band").get<double>();
      if (a.contains("last_n")) c.last_n = a.at("last_n").get<std::size_t>();
      if (a.contains("probe_starts")) c.probe_starts = a.at("probe_starts").get<std::size_t>();
      if (a.contains("probe_tolerance")) c.probe_tolerance = a.at("probe_tolerance").get<double>();
      if (a.contains("probe_max_iter")) c.probe_max_iter = a.at("probe_max_iter").get<std::size_t>();
      if (a.contains("investment_states")) c.investment_states = a.at("investment_states").get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text(path), path.parent_path());
}

ExperimentConfig load_config_or_preset(std::string_view ref) {
  constexpr std::string_view kPreset = "preset:";
  if (ref.substr(0, kPreset.size()) == kPreset) {
    ExperimentConfig cfg;
    cfg.run.market = preset_market(ref.substr(kPreset.size()));
    cfg.run.roster.assign(cfg.run.market.firm_count(), NashKind{});
    return cfg;
  }
  return load_config(std::filesystem::path(std::string(ref)));
}

std::string canonical_config(const RunConfig& config) {
  json roster = json::array();
  for (const AgentKind& k : config.roster) {
    json entry = {{"kind", kind_label(k)}};
    if (const auto* s = std::get_if<ScriptedKind>(&k)) entry["steps"] = steps_json(s->steps);
    roster.push_back(entry);
  }
  json doc = {
      {"market",
       {{"baseline_quantities", config.market.baseline_quantities},
        {"baseline_price", config.market.baseline_price},
        {"elasticity", config.market.elasticity},
        {"invest_fraction_cap", config.market.invest_fraction_cap}}},
      {"roster", roster},
      {"max_periods", config.max_periods},
      {"stall_window", config.stall_window},
  };
  const bool any_llm = std::any_of(config.roster.begin(), config.roster.end(),
                                   [](const AgentKind& k) { return std::holds_alternative<LlmKind>(k); });
  if (any_llm) {
    doc["llm"] = {{"source", config.mock_llm_dir ? "mock" : config.llm.base_url},
                  {"model", config.llm.model_name},
                  {"temperature", config.llm.temperature},
                  {"max_retries", config.llm.max_retries}};
  }
  return doc.dump();
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_digest(const RunConfig& config) {
  return fmt::format("{:016x}", fnv1a64(canonical_config(config)));
}

std::string run_id(const RunConfig& config) {
  return fmt::format("{:016x}", fnv1a64(canonical_config(config) + fmt::format("|seed={}", config.seed)));
}

}  // namespace cournot
