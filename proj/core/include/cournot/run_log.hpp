#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cournot/engine.hpp"
#include "cournot/prompt.hpp"

namespace cournot {

inline constexpr std::string_view kRunLogSchema = "cournot-runlog/1";

// First line of every run log.
struct RunLogHeader {
  std::string run_id;
  std::string config_digest;
  std::uint64_t seed = 0;
  MarketSpec market;
  std::vector<std::string> roster;
  std::size_t max_periods = 0;
  std::size_t stall_window = 0;
  HistoryPrecision precision = kHistoryPrecision;
};

// Optional last line, written once the run ends normally.
struct RunLogTrailer {
  Termination termination = Termination::MaxPeriods;
  std::size_t periods = 0;
};

struct RunLog {
  RunLogHeader header;
  std::vector<PeriodRecord> records;
  std::optional<RunLogTrailer> trailer;
};

// Append-only JSONL writer; each line is flushed as soon as it is written.
class RunLogWriter {
 public:
  RunLogWriter(const std::filesystem::path& path, const RunLogHeader& header);

  void append(const PeriodRecord& record);
  void finish(const RunLogTrailer& trailer);

 private:
  void write_line(const std::string& line);

  std::filesystem::path path_;
  std::ofstream out_;
};

std::string header_line(const RunLogHeader& header);
std::string record_line(const PeriodRecord& record);

// Throws LogFormatError on malformed lines or a schema mismatch, and
// IoError when the file cannot be opened.
RunLog read_run_log(const std::filesystem::path& path);
RunLog parse_run_log(std::string_view text);

}  // namespace cournot
