#include "cournot/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cournot/agents.hpp"
#include "cournot/errors.hpp"
#include "cournot/numeric.hpp"

namespace cournot {

using nlohmann::json;

namespace {

Stat stat_of(std::span<const double> v) { return {mean(v), percentile(v, 0.10), percentile(v, 0.90)}; }

std::span<const PeriodRecord> tail(std::span<const PeriodRecord> h, std::size_t n) {
  return h.subspan(h.size() - std::min(n, h.size()));
}

// splitmix64; fixed across platforms, unlike std distributions.
struct SplitMix {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

bool within(const MarketModel& model, std::span<const double> q, double tol) {
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (std::abs(q[i] - model.baseline_quantity(i)) > tol * model.baseline_quantity(i)) return false;
  }
  return true;
}

double others_total(std::span<const double> q, std::size_t firm) {
  std::vector<double> rest;
  rest.reserve(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (j != firm) rest.push_back(q[j]);
  }
  return ordered_sum(rest);
}

std::vector<double> column(std::span<const PeriodValues> rows, std::size_t firm,
                           std::vector<double> PeriodValues::*member) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const PeriodValues& r : rows) out.push_back((r.*member)[firm]);
  return out;
}

std::vector<double> prices(std::span<const PeriodValues> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const PeriodValues& r : rows) out.push_back(r.price);
  return out;
}

}  // namespace

const char* to_string(ConvergenceRule rule) {
  return rule == ConvergenceRule::Containment ? "containment" : "width";
}

const char* to_string(ProbeUpdate update) {
  return update == ProbeUpdate::GaussSeidel ? "gauss_seidel" : "jacobi";
}

const char* to_string(Family family) {
  switch (family) {
    case Family::Quantity: return "quantity";
    case Family::Investment: return "investment";
    case Family::Profit: return "profit";
    case Family::Price: return "price";
  }
  return "unknown";
}

ConvergenceVerdict converged(std::span<const double> series, double nash_value, std::size_t window,
                             double band, ConvergenceRule rule) {
  if (window == 0) throw std::invalid_argument("convergence window must be positive");
  if (series.size() < window) {
    throw std::invalid_argument(
        fmt::format("series has {} values; the convergence window needs at least {}", series.size(), window));
  }
  if (!(nash_value > 0.0)) throw std::invalid_argument("Nash benchmark must be positive");
  if (!(band >= 0.0)) throw std::invalid_argument("band must be non-negative");

  const auto last = series.subspan(series.size() - window);
  ConvergenceVerdict v;
  v.p10 = percentile(last, 0.10);
  v.p90 = percentile(last, 0.90);
  v.nash_value = nash_value;
  v.window = window;
  v.band = band;
  v.rule = rule;
  if (rule == ConvergenceRule::Containment) {
    v.converged = v.p10 >= (1.0 - band) * nash_value && v.p90 <= (1.0 + band) * nash_value;
  } else {
    v.converged = v.p90 - v.p10 <= band * nash_value;
  }
  return v;
}

std::vector<PeriodValues> raw_values(std::span<const PeriodRecord> history) {
  std::vector<PeriodValues> out;
  out.reserve(history.size());
  for (const PeriodRecord& r : history) {
    PeriodValues v;
    v.period_index = r.period_index;
    for (const Decision& d : r.decisions) {
      v.quantities.push_back(d.quantity);
      v.investments.push_back(d.investment);
    }
    v.profits = r.profits;
    v.price = r.price;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<PeriodValues> normalize(const MarketModel& model, std::span<const PeriodRecord> history) {
  std::vector<PeriodValues> out = raw_values(history);
  for (PeriodValues& v : out) {
    for (std::size_t i = 0; i < v.quantities.size(); ++i) {
      v.quantities[i] /= model.baseline_quantity(i);
      v.investments[i] /= model.baseline_investment(i);
      v.profits[i] /= model.nash_profit(i);
    }
    v.price /= model.baseline_price();
  }
  return out;
}

std::vector<PeriodValues> denormalize(const MarketModel& model, std::span<const PeriodValues> normalized) {
  std::vector<PeriodValues> out(normalized.begin(), normalized.end());
  for (PeriodValues& v : out) {
    for (std::size_t i = 0; i < v.quantities.size(); ++i) {
      v.quantities[i] *= model.baseline_quantity(i);
      v.investments[i] *= model.baseline_investment(i);
      v.profits[i] *= model.nash_profit(i);
    }
    v.price *= model.baseline_price();
  }
  return out;
}

BrProbeResult br_convergence_probe(const MarketModel& model, std::span<const double> start_quantities,
                                   std::span<const double> start_investments, const BrProbeOptions& options) {
  const std::size_t n = model.firm_count();
  if (start_quantities.size() != n || start_investments.size() != n) {
    throw DomainError(fmt::format("probe start has {} quantities and {} investments for {} firms",
                                  start_quantities.size(), start_investments.size(), n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(start_quantities[i]) || start_quantities[i] < 0.0) {
      throw DomainError(fmt::format("probe start quantity {} for firm {} is infeasible", start_quantities[i], i));
    }
    if (!(start_investments[i] >= 0.0 && start_investments[i] <= model.investment_cap(i) * (1.0 + 1e-12))) {
      throw DomainError(fmt::format("probe start investment {} for firm {} is outside [0, {}]",
                                    start_investments[i], i, model.investment_cap(i)));
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return model.baseline_quantity(a) > model.baseline_quantity(b);
  });

  BrProbeResult res;
  std::vector<double> q(start_quantities.begin(), start_quantities.end());
  if (within(model, q, options.tolerance)) {
    res.converged = true;
    res.final_quantities = q;
    return res;
  }
  for (std::size_t k = 1; k <= options.max_iter; ++k) {
    try {
      if (options.update == ProbeUpdate::GaussSeidel) {
        for (std::size_t i : order) q[i] = best_response(model, i, others_total(q, i)).decision.quantity;
      } else {
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = best_response(model, i, others_total(q, i)).decision.quantity;
        q = std::move(next);
      }
    } catch (const DomainError& e) {
      res.iterations = k;
      res.failure = e.what();
      res.final_quantities = q;
      return res;
    }
    if (within(model, q, options.tolerance)) {
      res.iterations = k;
      res.converged = true;
      res.final_quantities = q;
      return res;
    }
  }
  res.iterations = options.max_iter;
  res.failure = fmt::format("not within tolerance after {} iterations", options.max_iter);
  res.final_quantities = q;
  return res;
}

std::vector<ProbeState> random_states(const MarketModel& model, std::size_t count, std::uint64_t seed,
                                      double lo, double hi) {
  SplitMix rng{seed};
  std::vector<ProbeState> out(count);
  for (ProbeState& s : out) {
    for (std::size_t i = 0; i < model.firm_count(); ++i) {
      s.quantities.push_back(model.baseline_quantity(i) * (lo + (hi - lo) * rng.uniform()));
      s.investments.push_back(model.investment_cap(i) * rng.uniform());
    }
  }
  return out;
}

ProbeReport br_probe_report(const MarketModel& model, std::span<const ProbeState> starts,
                            const BrProbeOptions& options) {
  ProbeReport rep;
  if (starts.empty()) return rep;
  std::vector<double> iterations;
  std::size_t reached = 0;
  for (const ProbeState& s : starts) {
    const BrProbeResult r = br_convergence_probe(model, s.quantities, s.investments, options);
    iterations.push_back(static_cast<double>(r.iterations));
    rep.br_iterations_max = std::max(rep.br_iterations_max, r.iterations);
    if (r.converged) ++reached;
  }
  rep.states_checked = starts.size();
  rep.br_iterations_mean = mean(iterations);
  rep.within_pct_of_nash = static_cast<double>(reached) / static_cast<double>(starts.size());
  return rep;
}

double unconstrained_investment(const MarketModel& model, double quantity) {
  if (!(quantity > 0.0)) return 0.0;
  const CostCurve& c = model.cost_curve();
  if (!(c.k1 < 0.0 && c.k2 > 0.0 && c.k2 < 1.0)) {
    throw DomainError("investment optimum needs k1 < 0 and 0 < k2 < 1");
  }
  const double base = -c.k1 * c.k2 * quantity;
  return c.k2 == 0.5 ? base * base : std::pow(base, 1.0 / (1.0 - c.k2));
}

double optimal_investment(const MarketModel& model, std::size_t firm, double quantity) {
  return std::clamp(unconstrained_investment(model, quantity), 0.0, model.investment_cap(firm));
}

bool cap_optimal(const MarketModel& model, std::size_t firm, double quantity) {
  return quantity > 0.0 &&
         unconstrained_investment(model, quantity) >= model.investment_cap(firm) * (1.0 - 1e-12);
}

ProbeReport investment_optimality_probe(const MarketModel& model, std::span<const PeriodRecord> history) {
  ProbeReport rep;
  std::size_t optimal = 0;
  std::size_t near_nash = 0;
  for (const PeriodRecord& r : history) {
    for (std::size_t i = 0; i < r.decisions.size(); ++i) {
      ++rep.states_checked;
      if (cap_optimal(model, i, r.decisions[i].quantity)) ++optimal;
      const double b_hat = model.baseline_investment(i);
      if (std::abs(r.decisions[i].investment - b_hat) <= 0.01 * b_hat) ++near_nash;
    }
  }
  if (rep.states_checked > 0) {
    rep.investment_optimal_fraction = static_cast<double>(optimal) / static_cast<double>(rep.states_checked);
    rep.within_pct_of_nash = static_cast<double>(near_nash) / static_cast<double>(rep.states_checked);
  }
  return rep;
}

SummaryStats summary_stats(const MarketModel& model, std::span<const PeriodRecord> history, std::size_t last_n) {
  if (last_n == 0) throw std::invalid_argument("summary window must be positive");
  if (history.size() < last_n) {
    throw std::invalid_argument(
        fmt::format("history has {} periods; the summary window needs at least {}", history.size(), last_n));
  }
  const auto rows = normalize(model, tail(history, last_n));
  SummaryStats s;
  s.window = last_n;
  for (std::size_t i = 0; i < model.firm_count(); ++i) {
    s.firms.push_back(FirmSummary{i, stat_of(column(rows, i, &PeriodValues::quantities)),
                                  stat_of(column(rows, i, &PeriodValues::investments)),
                                  stat_of(column(rows, i, &PeriodValues::profits))});
  }
  s.price = stat_of(prices(rows));
  std::vector<double> raw;
  for (const PeriodRecord& r : tail(history, last_n)) raw.push_back(r.price);
  s.raw_price_mean = mean(raw);
  return s;
}

void write_summary_csv(std::ostream& out, const SummaryStats& stats) {
  out << "scope,firm,variable,statistic,value\n";
  auto row = [&](std::string_view scope, std::string firm, std::string_view var, const Stat& st) {
    out << fmt::format("{},{},{},mean,{}\n", scope, firm, var, st.mean);
    out << fmt::format("{},{},{},p10,{}\n", scope, firm, var, st.p10);
    out << fmt::format("{},{},{},p90,{}\n", scope, firm, var, st.p90);
  };
  for (const FirmSummary& f : stats.firms) {
    const std::string id = std::to_string(f.firm);
    row("firm", id, "quantity", f.quantity);
    row("firm", id, "investment", f.investment);
    row("firm", id, "profit", f.profit);
  }
  row("market", "", "price", stats.price);
  out << fmt::format("market,,raw_price,mean,{}\n", stats.raw_price_mean);
}

std::string summary_json(const SummaryStats& stats) {
  auto st = [](const Stat& s) { return json{{"mean", s.mean}, {"p10", s.p10}, {"p90", s.p90}}; };
  json firms = json::array();
  for (const FirmSummary& f : stats.firms) {
    firms.push_back({{"firm", f.firm},
                     {"quantity", st(f.quantity)},
                     {"investment", st(f.investment)},
                     {"profit", st(f.profit)}});
  }
  json doc = {{"window", stats.window},
              {"normalized", true},
              {"firms", firms},
              {"price", st(stats.price)},
              {"raw_price_mean", stats.raw_price_mean}};
  return doc.dump(2);
}

std::vector<NamedVerdict> convergence_report(const MarketModel& model, std::span<const PeriodRecord> history,
                                             std::size_t window, double band, ConvergenceRule rule) {
  const auto rows = raw_values(history);
  std::vector<NamedVerdict> out;
  for (std::size_t i = 0; i < model.firm_count(); ++i) {
    out.push_back({"quantity", i,
                   converged(column(rows, i, &PeriodValues::quantities), model.baseline_quantity(i), window,
                             band, rule)});
    out.push_back({"investment", i,
                   converged(column(rows, i, &PeriodValues::investments), model.baseline_investment(i), window,
                             band, rule)});
    out.push_back({"profit", i,
                   converged(column(rows, i, &PeriodValues::profits), model.nash_profit(i), window, band, rule)});
  }
  out.push_back({"price", std::nullopt, converged(prices(rows), model.baseline_price(), window, band, rule)});
  return out;
}

void write_verdicts_csv(std::ostream& out, std::span<const NamedVerdict> verdicts) {
  out << "variable,firm,rule,window,band,nash_value,p10,p90,converged\n";
  for (const NamedVerdict& v : verdicts) {
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", v.variable, v.firm ? std::to_string(*v.firm) : "",
                       to_string(v.verdict.rule), v.verdict.window, v.verdict.band, v.verdict.nash_value,
                       v.verdict.p10, v.verdict.p90, v.verdict.converged ? "true" : "false");
  }
}

std::string probe_json(const ProbeReport& r) {
  json doc = {{"states_checked", r.states_checked},
              {"investment_optimal_fraction", r.investment_optimal_fraction},
              {"br_iterations_mean", r.br_iterations_mean},
              {"br_iterations_max", r.br_iterations_max},
              {"within_pct_of_nash", r.within_pct_of_nash}};
  return doc.dump(2);
}

void write_family_csv(std::ostream& out, const std::string& run_id, const MarketModel& model,
                      std::span<const PeriodRecord> history, Family family, std::size_t last_n, bool header) {
  if (history.empty()) throw std::invalid_argument("history is empty");
  const auto rows = normalize(model, tail(history, last_n));
  if (header) out << "run_id,period,firm,value\n";
  for (const PeriodValues& r : rows) {
    if (family == Family::Price) {
      out << fmt::format("{},{},,{}\n", run_id, r.period_index, r.price);
      continue;
    }
    const auto& values = family == Family::Quantity     ? r.quantities
                         : family == Family::Investment ? r.investments
                                                        : r.profits;
    for (std::size_t i = 0; i < values.size(); ++i) {
      out << fmt::format("{},{},{},{}\n", run_id, r.period_index, i, values[i]);
    }
  }
}

void write_boxplot_csv(std::ostream& out, const std::string& run_id, const MarketModel& model,
                       std::span<const PeriodRecord> history, std::size_t last_n, bool header) {
  if (history.empty()) throw std::invalid_argument("history is empty");
  const auto rows = normalize(model, tail(history, last_n));
  if (header) out << "run_id,firm,variable,min,p10,p25,median,p75,p90,max,mean\n";
  auto line = [&](std::string firm, std::string_view var, const std::vector<double>& v) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", run_id, firm, var, percentile(v, 0.0),
                       percentile(v, 0.10), percentile(v, 0.25), percentile(v, 0.5), percentile(v, 0.75),
                       percentile(v, 0.90), percentile(v, 1.0), mean(v));
  };
  for (std::size_t i = 0; i < model.firm_count(); ++i) {
    line(std::to_string(i), "quantity", column(rows, i, &PeriodValues::quantities));
    line(std::to_string(i), "investment", column(rows, i, &PeriodValues::investments));
    line(std::to_string(i), "profit", column(rows, i, &PeriodValues::profits));
  }
  line("", "price", prices(rows));
}

}  // namespace cournot
