#include "cournot/run_log.hpp"

#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cournot/errors.hpp"

namespace cournot {

using json = nlohmann::ordered_json;

namespace {

json market_json(const MarketSpec& m) {
  return {{"baseline_quantities", m.baseline_quantities},
          {"baseline_price", m.baseline_price},
          {"elasticity", m.elasticity},
          {"invest_fraction_cap", m.invest_fraction_cap}};
}

json precision_json(const HistoryPrecision& p) {
  return {{"quantity_decimals", p.quantity_decimals},
          {"profit_decimals", p.profit_decimals},
          {"percent_decimals", p.percent_decimals},
          {"price_significant", p.price_significant},
          {"cost_significant", p.cost_significant}};
}

Termination termination_from(const std::string& s) {
  if (s == "max_periods") return Termination::MaxPeriods;
  if (s == "stalled") return Termination::Stalled;
  throw LogFormatError(fmt::format("unknown termination '{}'", s));
}

RunLogHeader header_from(const json& j) {
  RunLogHeader h;
  h.run_id = j.at("run_id").get<std::string>();
  h.config_digest = j.at("config_digest").get<std::string>();
  h.seed = j.at("seed").get<std::uint64_t>();
  const json& m = j.at("market");
  h.market.baseline_quantities = m.at("baseline_quantities").get<std::vector<double>>();
  h.market.baseline_price = m.at("baseline_price").get<double>();
  h.market.elasticity = m.at("elasticity").get<double>();
  h.market.invest_fraction_cap = m.at("invest_fraction_cap").get<double>();
  h.roster = j.at("roster").get<std::vector<std::string>>();
  h.max_periods = j.at("max_periods").get<std::size_t>();
  h.stall_window = j.at("stall_window").get<std::size_t>();
  const json& p = j.at("precision");
  h.precision.quantity_decimals = p.at("quantity_decimals").get<int>();
  h.precision.profit_decimals = p.at("profit_decimals").get<int>();
  h.precision.percent_decimals = p.at("percent_decimals").get<int>();
  h.precision.price_significant = p.at("price_significant").get<int>();
  h.precision.cost_significant = p.at("cost_significant").get<int>();
  return h;
}

PeriodRecord record_from(const json& j) {
  PeriodRecord r;
  r.period_index = j.at("period").get<std::size_t>();
  for (const json& d : j.at("decisions")) {
    r.decisions.push_back(Decision{d.at("quantity").get<double>(), d.at("invest_percent").get<double>(),
                                   d.at("investment").get<double>()});
  }
  r.unit_costs = j.at("unit_costs").get<std::vector<double>>();
  r.total_quantity = j.at("total_quantity").get<double>();
  r.price = j.at("price").get<double>();
  r.profits = j.at("profits").get<std::vector<double>>();
  for (const json& f : j.at("flags")) {
    r.flags.push_back(EventFlag{f.at("firm").get<std::size_t>(), f.at("kind").get<std::string>(),
                                f.at("detail").get<std::string>(), f.at("count").get<int>()});
  }
  const std::size_t n = r.decisions.size();
  if (r.unit_costs.size() != n || r.profits.size() != n) {
    throw LogFormatError(fmt::format("period {} has inconsistent column counts", r.period_index));
  }
  return r;
}

}  // namespace

std::string header_line(const RunLogHeader& h) {
  json j = {{"schema", kRunLogSchema},
            {"run_id", h.run_id},
            {"config_digest", h.config_digest},
            {"seed", h.seed},
            {"market", market_json(h.market)},
            {"roster", h.roster},
            {"max_periods", h.max_periods},
            {"stall_window", h.stall_window},
            {"precision", precision_json(h.precision)}};
  return j.dump();
}

std::string record_line(const PeriodRecord& r) {
  json decisions = json::array();
  for (const Decision& d : r.decisions) {
    decisions.push_back(
        {{"quantity", d.quantity}, {"invest_percent", d.invest_percent}, {"investment", d.investment}});
  }
  json flags = json::array();
  for (const EventFlag& f : r.flags) {
    flags.push_back({{"firm", f.firm}, {"kind", f.kind}, {"detail", f.detail}, {"count", f.count}});
  }
  json j = {{"period", r.period_index},   {"decisions", decisions},
            {"unit_costs", r.unit_costs}, {"total_quantity", r.total_quantity},
            {"price", r.price},           {"profits", r.profits},
            {"flags", flags}};
  return j.dump();
}

RunLogWriter::RunLogWriter(const std::filesystem::path& path, const RunLogHeader& header) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError(fmt::format("cannot open run log '{}' for writing", path.string()));
  write_line(header_line(header));
}

void RunLogWriter::append(const PeriodRecord& record) { write_line(record_line(record)); }

void RunLogWriter::finish(const RunLogTrailer& trailer) {
  json j = {{"end", {{"termination", to_string(trailer.termination)}, {"periods", trailer.periods}}}};
  write_line(j.dump());
}

void RunLogWriter::write_line(const std::string& line) {
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw IoError(fmt::format("write to run log '{}' failed", path_.string()));
}

RunLog parse_run_log(std::string_view text) {
  RunLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw LogFormatError(fmt::format("line {} is not a JSON object", line_no));
    }
    try {
      if (!have_header) {
        if (!j.contains("schema")) throw LogFormatError("run log has no schema header");
        const auto schema = j.at("schema").get<std::string>();
        if (schema != kRunLogSchema) {
          throw LogFormatError(fmt::format("unsupported run log schema '{}' (expected '{}')", schema,
                                           kRunLogSchema));
        }
        log.header = header_from(j);
        have_header = true;
      } else if (j.contains("end")) {
        const json& e = j.at("end");
        log.trailer = RunLogTrailer{termination_from(e.at("termination").get<std::string>()),
                                    e.at("periods").get<std::size_t>()};
      } else {
        if (log.trailer) throw LogFormatError(fmt::format("line {} follows the end marker", line_no));
        PeriodRecord r = record_from(j);
        if (r.decisions.size() != log.header.market.firm_count()) {
          throw LogFormatError(fmt::format("line {} has {} firms, header has {}", line_no,
                                           r.decisions.size(), log.header.market.firm_count()));
        }
        log.records.push_back(std::move(r));
      }
    } catch (const json::exception& e) {
      throw LogFormatError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  if (!have_header) throw LogFormatError("run log is empty");
  return log;
}

RunLog read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open run log '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_log(ss.str());
}

}  // namespace cournot
