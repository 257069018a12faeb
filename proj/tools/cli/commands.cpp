#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cournot/analysis.hpp"
#include "cournot/config.hpp"
#include "cournot/engine.hpp"
#include "cournot/equilibrium.hpp"
#include "cournot/errors.hpp"
#include "cournot/market.hpp"
#include "cournot/run_log.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cournot::cli {

namespace {

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(fmt::format("cannot write '{}'", path.string()));
  f << content;
  if (!f) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(fmt::format("cannot write '{}'", path.string()));
  return f;
}

MarketModel model_for(const MarketSpec& spec, const std::optional<double>& override_k1) {
  MarketModel model = derive_model(spec);
  if (override_k1) {
    CostCurve c = model.cost_curve();
    c.k1 = *override_k1;
    model = model.with_cost_curve(c);
  }
  return model;
}

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

// Quantity above which investing the cap is optimal, from b*(q) = cap.
double cap_threshold_quantity(const MarketModel& model, std::size_t firm) {
  const CostCurve& c = model.cost_curve();
  return std::pow(model.investment_cap(firm), 1.0 - c.k2) / (-c.k1 * c.k2);
}

struct GridCheck {
  std::size_t states = 0;
  std::size_t agree = 0;
  double worst_gap = 0.0;
  std::size_t cap_optimal = 0;
};

// Closed-form investment optimum against a 2000-point grid on seeded states.
GridCheck investment_grid_check(const MarketModel& model, std::size_t count, std::uint64_t seed) {
  constexpr int kGrid = 2000;
  GridCheck g;
  const auto states = random_states(model, count, seed);
  for (std::size_t s = 0; s < states.size(); ++s) {
    const std::size_t i = s % model.firm_count();
    double others = 0.0;
    for (std::size_t j = 0; j < model.firm_count(); ++j) {
      if (j != i) others += states[s].quantities[j];
    }
    const double q = states[s].quantities[i];
    const double cap = model.investment_cap(i);
    double best_b = 0.0, best_v = -INFINITY;
    for (int k = 0; k < kGrid; ++k) {
      const double b = cap * k / (kGrid - 1);
      const double v = profit(model, ProfitQuery{i, others, q, b});
      if (v > best_v) best_v = v, best_b = b;
    }
    const double b_star = optimal_investment(model, i, q);
    const double v_star = profit(model, ProfitQuery{i, others, q, b_star});
    const double gap = std::abs(b_star - best_b);
    ++g.states;
    if (gap <= cap / (kGrid - 1) + 1e-12 && v_star >= best_v - 1e-9 * std::max(1.0, std::abs(best_v))) ++g.agree;
    g.worst_gap = std::max(g.worst_gap, gap / cap);
    if (cap_optimal(model, i, q)) ++g.cap_optimal;
  }
  return g;
}

ConvergenceRule rule_from(const std::string& s) {
  if (s == "containment") return ConvergenceRule::Containment;
  if (s == "width") return ConvergenceRule::Width;
  throw ConfigError(fmt::format("unknown convergence rule '{}' (containment or width)", s));
}

std::vector<fs::path> collect_logs(const fs::path& p) {
  std::vector<fs::path> files;
  if (fs::is_directory(p)) {
    for (const auto& e : fs::recursive_directory_iterator(p)) {
      if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError(fmt::format("no .jsonl run logs under '{}'", p.string()));
  } else {
    if (!fs::exists(p)) throw IoError(fmt::format("'{}' does not exist", p.string()));
    files.push_back(p);
  }
  return files;
}

}  // namespace

int cmd_derive(const DeriveOptions& opts, std::ostream& out) {
  const ExperimentConfig cfg = load_config_or_preset(opts.config);
  const MarketModel m = model_for(cfg.run.market, opts.override_k1);

  out << fmt::format("{:>4} {:>12} {:>8} {:>10} {:>12} {:>12} {:>12}\n", "firm", "q_hat", "share", "w_hat",
                     "pi_hat", "b_hat", "nash_profit");
  json firms = json::array();
  for (std::size_t i = 0; i < m.firm_count(); ++i) {
    out << fmt::format("{:>4} {:>12.6g} {:>8.4g} {:>10.6g} {:>12.6g} {:>12.6g} {:>12.6g}\n", i,
                       m.baseline_quantity(i), m.share(i), m.baseline_cost(i), m.baseline_profit(i),
                       m.baseline_investment(i), m.nash_profit(i));
    firms.push_back({{"firm", i},
                     {"q_hat", m.baseline_quantity(i)},
                     {"share", m.share(i)},
                     {"w_hat", m.baseline_cost(i)},
                     {"pi_hat", m.baseline_profit(i)},
                     {"b_hat", m.baseline_investment(i)},
                     {"nash_profit", m.nash_profit(i)}});
  }
  const CostCurve& c = m.cost_curve();
  out << fmt::format("Q_hat = {:.6g}  p_hat = {:.6g}  epsilon = {:.6g}  c = {:.6g}  A = {:.6g}\n",
                     m.total_baseline(), m.baseline_price(), m.elasticity(), m.invest_fraction_cap(), m.scale());
  out << fmt::format("k1 = {:.4f}  k2 = {:.6g}  k3 = {:.6g}\n", c.k1, c.k2, c.k3);

  if (!opts.out.empty()) {
    json doc = {{"total_baseline", m.total_baseline()},
                {"baseline_price", m.baseline_price()},
                {"elasticity", m.elasticity()},
                {"invest_fraction_cap", m.invest_fraction_cap()},
                {"scale", m.scale()},
                {"cost_curve", {{"k1", c.k1}, {"k2", c.k2}, {"k3", c.k3}}},
                {"firms", firms}};
    const fs::path path = fs::path(opts.out) / "model.json";
    write_file(path, doc.dump(2) + "\n");
    out << "wrote " << path.string() << "\n";
  }
  return kExitOk;
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg = load_config_or_preset(opts.config);
  RunConfig base = cfg.run;
  if (opts.roster) base.roster = parse_roster(*opts.roster, fs::current_path());
  if (opts.periods) base.max_periods = *opts.periods;
  if (opts.stall_window) base.stall_window = *opts.stall_window;
  if (opts.seed) base.seed = *opts.seed;
  if (opts.mock_llm) base.mock_llm_dir = fs::path(*opts.mock_llm);
  if (opts.regulate_top) base = regulation_roster(base, *opts.regulate_top);
  if (opts.repeat < 1) throw ConfigError("--repeat must be at least 1");
  base.validate();

  std::vector<RunConfig> configs;
  for (std::size_t r = 0; r < opts.repeat; ++r) {
    RunConfig c = base;
    c.seed = base.seed + r;
    c.output_path = fs::path(opts.out) / run_id(c) / "history.jsonl";
    configs.push_back(std::move(c));
  }

  std::vector<std::optional<RunResult>> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < configs.size(); k = next++) {
      try {
        results[k] = run(configs[k]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(opts.jobs, 1, configs.size());
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kExitOk;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    if (errors[k]) {
      try {
        std::rethrow_exception(errors[k]);
      } catch (const TransportError& e) {
        err << fmt::format("run seed {}: transport failure: {} (partial history in {})\n", configs[k].seed,
                           e.what(), configs[k].output_path.string());
        code = std::max<int>(code, kExitTransport);
      } catch (const std::exception& e) {
        err << fmt::format("run seed {}: {}\n", configs[k].seed, e.what());
        code = std::max<int>(code, kExitConfig);
      }
      continue;
    }
    const RunResult& r = *results[k];
    const std::size_t window = std::min(cfg.analysis.last_n, r.history.size());
    const SummaryStats stats = summary_stats(r.model, r.history, window);
    json doc = {{"run_id", r.run_id},
                {"config_digest", r.config_digest},
                {"seed", configs[k].seed},
                {"roster", r.roster_labels},
                {"termination", to_string(r.termination)},
                {"periods", r.history.size()},
                {"summary", json::parse(summary_json(stats))}};
    write_file(configs[k].output_path.parent_path() / "summary.json", doc.dump(2) + "\n");
    out << fmt::format("run {} seed {}: {} after {} periods; roster {}; mean price (last {}) {:.6g}\n", r.run_id,
                       configs[k].seed, to_string(r.termination), r.history.size(),
                       fmt::join(r.roster_labels, ","), window, stats.raw_price_mean);
    out << fmt::format("  log {}\n", configs[k].output_path.string());
    if (r.termination == Termination::Stalled && code == kExitOk) code = kExitStalled;
  }
  return code;
}

int cmd_validate(const ValidateOptions& opts, std::ostream& out) {
  const ExperimentConfig cfg = load_config_or_preset(opts.config);
  const MarketModel model = model_for(cfg.run.market, opts.override_k1);
  const std::uint64_t seed = opts.seed ? *opts.seed : cfg.run.seed;
  const std::size_t starts = opts.starts ? *opts.starts : cfg.analysis.probe_starts;
  bool ok = true;
  json report;

  const DeviationReport nash = verify_nash(model);
  double worst_gain = -INFINITY;
  for (const auto& f : nash.firms) worst_gain = std::max(worst_gain, f.max_gain);
  ok = ok && nash.passed;
  out << fmt::format("{} verify_nash: {}x{} grid, radius {}, best unilateral gain {:.3e} (tolerance {:.0e})\n",
                     verdict(nash.passed), nash.grid_points, nash.grid_points, nash.grid_radius, worst_gain,
                     nash.tolerance);
  report["verify_nash"] = {{"passed", nash.passed}, {"max_gain", worst_gain}};

  const HSweep h = sweep_proof_h();
  ok = ok && h.all_positive;
  out << fmt::format("{} h-positivity: {} points, min h = {:.6g} at Q-i = {}, q = {}\n", verdict(h.all_positive),
                     h.points, h.min_value, h.argmin_others, h.argmin_quantity);
  report["h_sweep"] = {{"passed", h.all_positive}, {"points", h.points}, {"min", h.min_value}};

  BrProbeOptions po;
  po.tolerance = cfg.analysis.probe_tolerance;
  po.max_iter = cfg.analysis.probe_max_iter;
  po.update = opts.jacobi ? ProbeUpdate::Jacobi : ProbeUpdate::GaussSeidel;
  const auto states = random_states(model, starts, seed);
  const ProbeReport br = br_probe_report(model, states, po);
  const bool br_ok = br.within_pct_of_nash == 1.0;
  ok = ok && br_ok;
  out << fmt::format("{} best-response probe ({}): {} starts, mean {:.3g} iterations, max {}, reached {:.1f}%\n",
                     verdict(br_ok), to_string(po.update), br.states_checked, br.br_iterations_mean,
                     br.br_iterations_max, 100.0 * br.within_pct_of_nash);
  report["br_probe"] = json::parse(probe_json(br));
  report["br_probe"]["passed"] = br_ok;

  const GridCheck grid = investment_grid_check(model, cfg.analysis.investment_states, seed);
  const bool grid_ok = grid.agree == grid.states;
  ok = ok && grid_ok;
  out << fmt::format("{} investment optimum vs 2000-point grid: {}/{} states agree (worst gap {:.2e} of cap)\n",
                     verdict(grid_ok), grid.agree, grid.states, grid.worst_gap);

  RunConfig br_run = cfg.run;
  br_run.roster.assign(model.firm_count(), BestResponseKind{});
  br_run.max_periods = 20;
  br_run.output_path.clear();
  bool hist_ok = false;
  double hist_fraction = 0.0;
  if (!opts.override_k1) {
    const RunResult r = run(br_run);
    const ProbeReport inv = investment_optimality_probe(model, r.history);
    hist_fraction = inv.investment_optimal_fraction;
    hist_ok = hist_fraction == 1.0;
  } else {
    // The engine derives its own model; probe a replayed BR path on the altered one instead.
    std::vector<PeriodRecord> hist;
    std::vector<double> q(model.firm_count());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = model.baseline_quantity(i);
    for (int t = 0; t < 20; ++t) {
      std::vector<Decision> d;
      for (std::size_t i = 0; i < q.size(); ++i) {
        double others = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) others += j == i ? 0.0 : q[j];
        d.push_back(best_response(model, i, others).decision);
      }
      for (std::size_t i = 0; i < q.size(); ++i) q[i] = d[i].quantity;
      hist.push_back(step(model, d, static_cast<std::size_t>(t)));
    }
    hist_fraction = investment_optimality_probe(model, hist).investment_optimal_fraction;
    hist_ok = hist_fraction == 1.0;
  }
  ok = ok && hist_ok;
  out << fmt::format("{} investment probe on a best-response history: cap-optimal fraction {:.4g}\n",
                     verdict(hist_ok), hist_fraction);
  out << fmt::format("info  random states q in [0.3, 2] q_hat: cap-optimal fraction {:.4g}; cap is optimal iff "
                     "q >= {:.4g} q_hat (firm 0)\n",
                     static_cast<double>(grid.cap_optimal) / std::max<std::size_t>(1, grid.states),
                     cap_threshold_quantity(model, 0) / model.baseline_quantity(0));
  report["investment"] = {{"grid_passed", grid_ok},
                          {"grid_states", grid.states},
                          {"history_fraction", hist_fraction},
                          {"history_passed", hist_ok}};
  report["passed"] = ok;

  if (opts.out) {
    const fs::path path = fs::path(*opts.out) / "validation.json";
    write_file(path, report.dump(2) + "\n");
  }
  out << (ok ? "all checks passed\n" : "validation FAILED\n");
  return ok ? kExitOk : kExitValidation;
}

int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out) {
  AnalysisConfig ac;
  if (opts.config) ac = load_config_or_preset(*opts.config).analysis;
  if (opts.window) ac.window = *opts.window;
  if (opts.band) ac.band = *opts.band;
  if (opts.last_n) ac.last_n = *opts.last_n;
  const ConvergenceRule rule = rule_from(opts.rule);

  const RunLog log = read_run_log(opts.history);
  const MarketModel model = derive_model(log.header.market);
  if (log.records.size() < ac.window) {
    throw std::invalid_argument(fmt::format(
        "history has {} periods but the convergence window needs at least {} (set --window)", log.records.size(),
        ac.window));
  }
  const auto verdicts = convergence_report(model, log.records, ac.window, ac.band, rule);
  const SummaryStats stats = summary_stats(model, log.records, ac.last_n);
  const ProbeReport inv = investment_optimality_probe(model, log.records);

  const fs::path dir(opts.out);
  {
    auto f = open_out(dir / "verdicts.csv");
    write_verdicts_csv(f, verdicts);
  }
  {
    auto f = open_out(dir / "summary.csv");
    write_summary_csv(f, stats);
  }
  write_file(dir / "summary.json", summary_json(stats) + "\n");
  write_file(dir / "probes.json", probe_json(inv) + "\n");

  std::size_t n_conv = 0;
  for (const auto& v : verdicts) n_conv += v.verdict.converged ? 1 : 0;
  const auto& pv = verdicts.back().verdict;
  out << fmt::format("run {}: {} periods, rule {}, window {}, band {}\n", log.header.run_id, log.records.size(),
                     to_string(rule), ac.window, ac.band);
  out << fmt::format("price: {} (p10 {:.4g}, p90 {:.4g}, Nash {:.4g}); normalized mean price (last {}) {:.4g}\n",
                     pv.converged ? "converged" : "not converged", pv.p10, pv.p90, pv.nash_value, stats.window,
                     stats.price.mean);
  out << fmt::format("{}/{} verdicts converged; cap-optimal investment fraction {:.4g}\n", n_conv, verdicts.size(),
                     inv.investment_optimal_fraction);
  out << fmt::format("wrote {}\n", dir.string());
  return kExitOk;
}

int cmd_export(const ExportOptions& opts, std::ostream& out) {
  const auto files = collect_logs(opts.history);
  const fs::path dir(opts.out);
  const Family families[] = {Family::Quantity, Family::Investment, Family::Profit, Family::Price};
  std::vector<std::ofstream> streams;
  for (Family f : families) streams.push_back(open_out(dir / fmt::format("{}.csv", to_string(f))));
  auto box = open_out(dir / "boxplot.csv");

  bool first = true;
  for (const fs::path& file : files) {
    const RunLog log = read_run_log(file);
    if (log.records.empty()) throw std::invalid_argument(fmt::format("run log '{}' has no periods", file.string()));
    const MarketModel model = derive_model(log.header.market);
    for (std::size_t k = 0; k < std::size(families); ++k) {
      write_family_csv(streams[k], log.header.run_id, model, log.records, families[k], opts.last_n, first);
    }
    write_boxplot_csv(box, log.header.run_id, model, log.records, opts.last_n, first);
    first = false;
  }
  out << fmt::format("exported {} run(s) to {}\n", files.size(), dir.string());
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Augmented Cournot market simulator"};
  app.require_subcommand(1);

  DeriveOptions d;
  auto* derive = app.add_subcommand("derive", "Print the baseline equilibrium and cost curve");
  derive->add_option("--config", d.config, "Config file or preset:<name>")->required();
  derive->add_option("--out", d.out, "Directory for model.json");
  derive->add_option("--override-k1", d.override_k1, "Replace the fitted k1");

  RunOptions r;
  auto* runc = app.add_subcommand("run", "Run a repeated game");
  runc->add_option("--config", r.config, "Config file or preset:<name>")->required();
  runc->add_option("--roster", r.roster, "Comma separated agent kinds");
  runc->add_option("--regulate-top", r.regulate_top, "Make the K largest firms best responders");
  runc->add_option("--periods", r.periods, "Maximum number of periods");
  runc->add_option("--stall-window", r.stall_window, "Unchanged periods before stopping (0 disables)");
  runc->add_option("--seed", r.seed, "Run seed");
  runc->add_option("--out", r.out, "Output directory");
  runc->add_option("--jobs", r.jobs, "Runs executed in parallel");
  runc->add_option("--repeat", r.repeat, "Number of runs with consecutive seeds");
  runc->add_option("--mock-llm", r.mock_llm, "Directory of canned LLM replies");

  ValidateOptions v;
  auto* val = app.add_subcommand("validate", "Check equilibrium and optimisation properties of a market");
  val->add_option("--config", v.config, "Config file or preset:<name>")->required();
  val->add_option("--out", v.out, "Directory for validation.json");
  val->add_option("--seed", v.seed, "Seed for sampled states");
  val->add_option("--starts", v.starts, "Best-response probe starts");
  val->add_option("--override-k1", v.override_k1, "Replace the fitted k1 (negative control)");
  val->add_flag("--jacobi", v.jacobi, "Simultaneous best-response updates in the probe");

  AnalyzeOptions a;
  auto* ana = app.add_subcommand("analyze", "Convergence verdicts and summaries for a run log");
  ana->add_option("--history", a.history, "JSONL run log")->required();
  ana->add_option("--config", a.config, "Config with an analysis section");
  ana->add_option("--out", a.out, "Output directory");
  ana->add_option("--window", a.window, "Convergence window");
  ana->add_option("--band", a.band, "Convergence band");
  ana->add_option("--last", a.last_n, "Summary window");
  ana->add_option("--rule", a.rule, "containment or width");

  ExportOptions e;
  auto* exp = app.add_subcommand("export", "Plot-ready CSVs from one run log or a directory of logs");
  exp->add_option("--history", e.history, "JSONL run log or directory")->required();
  exp->add_option("--out", e.out, "Output directory");
  exp->add_option("--last", e.last_n, "Periods per run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*derive) return cmd_derive(d, out);
    if (*runc) return cmd_run(r, out, err);
    if (*val) return cmd_validate(v, out);
    if (*ana) return cmd_analyze(a, out);
    if (*exp) return cmd_export(e, out);
  } catch (const TransportError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitTransport;
  } catch (const IoError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const LogFormatError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace cournot::cli
