#include "corrpool/output.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace corrpool {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, x);
  return buf;
}

double round_significant(double x, int digits) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return std::strtod(buf, nullptr);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void CsvWriter::config_line(const json& config) {
  out_ << "# config=" << round_numbers(config).dump() << "\r\n";
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << "\r\n";
}

json round_numbers(const json& j) {
  if (j.is_number_float()) {
    const double x = j.get<double>();
    // JSON has no inf/nan; null marks an unbounded or undefined value.
    if (!std::isfinite(x)) return json(nullptr);
    return json(round_significant(x));
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(round_numbers(v));
    return out;
  }
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) out[k] = round_numbers(v);
    return out;
  }
  return j;
}

std::string dump_json(const json& j) { return round_numbers(j).dump(2) + "\n"; }

namespace {

json optional_number(const std::optional<double>& x) {
  return x ? json(*x) : json(nullptr);
}

json stat_json(const RunningStat& s) {
  if (s.count() == 0) return json(nullptr);
  return {{"mean", s.mean()}, {"se", s.standard_error()}, {"count", s.count()}};
}

json strategy_json(const StrategySummary& s, const CellResult& cell) {
  const MetricsAggregate& m = s.metrics;
  json j;
  j["strategy"] = std::string(to_string(s.strategy));
  j["alpha"] = cell.alpha;
  j["pool_size"] = cell.pool_size;
  j["sensitivity"] = stat_json(m.sensitivity);
  j["efficiency"] = stat_json(m.efficiency);
  j["gamma"] = stat_json(m.gamma);
  j["eta"] = stat_json(m.eta);
  j["objective"] = m.objective();
  j["undefined_sensitivity"] = m.undefined_sensitivity;
  j["undefined_eta"] = m.undefined_eta;
  if (m.sensitivity.count() > 0) {
    j["fpr"] = {{"frac_indiv", s.fpr.frac_indiv},
                {"frac_pos_indiv", s.fpr.frac_pos_indiv},
                {"frac_neg_indiv", s.fpr.frac_neg_indiv},
                {"frac_neg_indiv_pos", s.fpr.frac_neg_indiv_pos},
                {"fpr", s.fpr.fpr},
                {"floored", s.fpr.floored}};
  } else {
    j["fpr"] = nullptr;
  }
  return j;
}

}  // namespace

json summary_json(const ScenarioResult& result) {
  json j;
  j["config"] = result.resolved_config;
  json cells = json::array();
  for (const CellResult& cell : result.cells) {
    json c;
    c["alpha"] = cell.alpha;
    c["pool_size"] = cell.pool_size;
    json strategies = json::array();
    for (const auto& s : cell.strategies) strategies.push_back(strategy_json(s, cell));
    c["strategies"] = strategies;
    if (cell.advantage) {
      c["advantage"] = {{"sensitivity", stat_json(cell.advantage->sensitivity)},
                        {"efficiency", stat_json(cell.advantage->efficiency)}};
    }
    cells.push_back(c);
  }
  j["results"] = cells;
  return j;
}

json policy_json(const json& config, const std::vector<PolicyResult>& policy) {
  json j;
  j["config"] = config;
  json rows = json::array();
  const PolicyResult* naive = nullptr;
  const PolicyResult* corr = nullptr;
  for (const PolicyResult& p : policy) {
    if (p.strategy == Strategy::kNaive) naive = &p;
    if (p.strategy == Strategy::kCorrelated) corr = &p;
    json r;
    r["strategy"] = std::string(to_string(p.strategy));
    r["pool_size"] = p.pool_size;
    r["sensitivity"] = p.sensitivity;
    r["efficiency"] = p.efficiency;
    r["objective"] = p.objective;
    r["f_star"] = optional_number(p.f_star);
    r["relative_consumption"] = p.relative_consumption;
    json cands = json::array();
    for (const auto& c : p.candidates) {
      cands.push_back({{"pool_size", c.pool_size},
                       {"sensitivity", c.sensitivity},
                       {"efficiency", c.efficiency},
                       {"objective", c.objective}});
    }
    r["candidates"] = cands;
    rows.push_back(r);
  }
  j["policy"] = rows;
  if (naive && corr) {
    j["consumption_reduction"] = consumption_reduction(naive->objective, corr->objective);
  }
  return j;
}

json delta_prime_json(const DeltaPrimeEstimate& e) {
  return {{"pool_size", e.pool_size},
          {"beta_bar", e.beta_bar},
          {"tau", e.tau},
          {"x_bar", e.x_bar},
          {"z_bar", e.z_bar},
          {"delta_prime", e.delta_prime_hat},
          {"ci_low", e.ci_low},
          {"ci_high", e.ci_high},
          {"x_samples", e.x_samples},
          {"z_samples", e.z_samples},
          {"x_all_zero", e.x_all_zero},
          {"ci_unreliable", e.ci_unreliable}};
}

json counterexample_json(double theta1, double theta2, double alpha,
                         const CounterexampleResult& r) {
  return {{"theta1", theta1}, {"theta2", theta2}, {"alpha", alpha},
          {"beta0", r.beta0}, {"beta1", r.beta1}, {"ey0", r.ey0},
          {"ey1", r.ey1},     {"eta0", r.eta0},   {"eta1", r.eta1},
          {"eff0", r.eff0},   {"eff1", r.eff1}};
}

void write_replications_csv(std::ostream& out, const json& config,
                            const std::vector<ReplicationRecord>& records) {
  CsvWriter w(out);
  w.config_line(config);
  w.row({"replication", "strategy", "n", "S_total", "D_total", "pooled_tests",
         "followup_tests"});
  for (const auto& r : records) {
    w.values(r.replication, to_string(r.strategy), r.pool_size,
             r.metrics.total_infected, r.metrics.total_identified,
             r.metrics.pooled_tests, r.metrics.followup_tests);
  }
}

void write_sweep_csv(std::ostream& out, const ScenarioResult& result) {
  CsvWriter w(out);
  w.config_line(result.resolved_config);
  w.row({"strategy", "alpha", "n", "sensitivity_mean", "sensitivity_se",
         "efficiency_mean", "efficiency_se", "gamma_mean", "eta_mean",
         "undefined_sensitivity", "replications"});
  for (const CellResult& cell : result.cells) {
    for (const StrategySummary& s : cell.strategies) {
      const MetricsAggregate& m = s.metrics;
      const bool sens = m.sensitivity.count() > 0;
      const double nan = std::nan("");
      w.values(to_string(s.strategy), cell.alpha, cell.pool_size,
               sens ? m.sensitivity.mean() : nan,
               sens ? m.sensitivity.standard_error() : nan, m.efficiency.mean(),
               m.efficiency.standard_error(), m.gamma.mean(),
               m.eta.count() ? m.eta.mean() : nan, m.undefined_sensitivity,
               m.efficiency.count());
    }
  }
}

void write_advantage_csv(std::ostream& out, const ScenarioResult& result) {
  CsvWriter w(out);
  w.config_line(result.resolved_config);
  w.row({"alpha", "n", "sensitivity_diff_mean", "sensitivity_diff_se",
         "efficiency_diff_mean", "efficiency_diff_se"});
  for (const CellResult& cell : result.cells) {
    if (!cell.advantage) continue;
    const auto& a = *cell.advantage;
    w.values(cell.alpha, cell.pool_size, a.sensitivity.mean(),
             a.sensitivity.standard_error(), a.efficiency.mean(),
             a.efficiency.standard_error());
  }
}

void write_calibration_csv(std::ostream& out, const json& config,
                           const std::vector<double>& targets,
                           const std::vector<CalibrationResult>& results) {
  CsvWriter w(out);
  w.config_line(config);
  w.row({"target_beta_bar", "tau", "achieved_beta_bar", "draws"});
  for (std::size_t i = 0; i < results.size(); ++i) {
    w.values(targets[i], results[i].tau, results[i].beta_bar, results[i].draws);
  }
}

void write_delta_table_csv(std::ostream& out, const json& config,
                           const std::vector<DeltaPrimeEstimate>& rows) {
  CsvWriter w(out);
  w.config_line(config);
  w.row({"n", "beta_bar", "tau", "x_bar", "z_bar", "delta_prime", "ci_low",
         "ci_high", "x_samples", "z_samples", "ci_unreliable"});
  for (const auto& e : rows) {
    w.values(e.pool_size, e.beta_bar, e.tau, e.x_bar, e.z_bar, e.delta_prime_hat,
             e.ci_low, e.ci_high, e.x_samples, e.z_samples, e.ci_unreliable);
  }
}

void write_counterexample_csv(std::ostream& out, const json& config,
                              const std::vector<CounterexampleCell>& cells) {
  CsvWriter w(out);
  w.config_line(config);
  w.row({"theta1", "theta2", "eff_diff", "eta_ratio", "region_a", "region_b"});
  for (const auto& c : cells) {
    w.values(c.theta1, c.theta2, c.eff_diff(), c.eta_ratio(), c.eff_diff() < 0.0,
             c.eta_ratio() > 1.0);
  }
}

void write_trajectory_csv(std::ostream& out, const json& config,
                          const std::vector<SirState>& path) {
  CsvWriter w(out);
  w.config_line(config);
  w.row({"t", "s", "i", "r"});
  for (const auto& s : path) w.values(s.t, s.s, s.i, s.r);
}

void write_population_csv(std::ostream& out, const json& config,
                          const Population& population) {
  CsvWriter w(out);
  w.config_line(config);
  w.row({"person", "household", "infected", "viral_load"});
  for (std::size_t i = 0; i < population.persons.size(); ++i) {
    const Person& p = population.persons[i];
    w.values(i, p.household, p.infected, p.viral_load);
  }
}

void write_assignment_csv(std::ostream& out, const json& config,
                          const PoolingAssignment& assignment) {
  CsvWriter w(out);
  w.config_line(config);
  w.row({"pool", "person"});
  for (std::size_t j = 0; j < assignment.pool_count(); ++j) {
    for (std::uint32_t p : assignment.pool(j)) w.values(j, p);
  }
}

}  // namespace corrpool
