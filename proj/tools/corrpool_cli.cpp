// corrpool: command-line front end for the pooled-testing simulator.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "corrpool/errors.hpp"
#include "corrpool/output.hpp"
#include "corrpool/parallel.hpp"
#include "corrpool/scenario.hpp"
#include "corrpool/sir.hpp"
#include "corrpool/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace corrpool;

namespace {

// Scenario flags shared by simulate, sweep and optimize. Everything is
// collected into a JSON patch applied over the config file.
struct ScenarioFlags {
  std::string config_path;
  std::optional<double> alpha;
  std::optional<double> sar;
  std::optional<std::string> household;
  std::optional<int> pool_size;
  std::optional<double> beta_bar;
  std::optional<std::int64_t> tau;
  std::optional<std::string> variant;
  std::optional<std::size_t> population;
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> strategies;
  bool pad = false;
  std::optional<double> b_infection;
  std::optional<double> b_recovery;
  std::optional<std::size_t> workers;

  void attach(CLI::App* app, bool single_cell) {
    app->add_option("-c,--config", config_path, "JSON scenario file")
        ->check(CLI::ExistingFile);
    if (single_cell) {
      app->add_option("--alpha", alpha, "prevalence");
      app->add_option("-n,--pool-size", pool_size, "pool size");
    }
    app->add_option("--sar", sar, "secondary attack rate q");
    app->add_option("--household-dist", household, "US, CN, AUS, FR, US+1, US+2, US-1, US-2");
    app->add_option("--beta-bar", beta_bar, "individual FNR target used to calibrate tau");
    app->add_option("--tau", tau, "explicit detection threshold");
    app->add_option("--sensitivity", variant, "realistic | step | piecewise");
    app->add_option("-N,--population-size", population);
    app->add_option("-r,--replications", replications);
    app->add_option("-s,--seed", seed, "master seed");
    app->add_option("--strategies", strategies, "naive, correlated")->delimiter(',');
    app->add_flag("--pad-last-pool", pad, "dilute short pools by the nominal size");
    app->add_option("--b-infection", b_infection, "SIR infection rate per day");
    app->add_option("--b-recovery", b_recovery, "SIR recovery rate per day");
    app->add_option("-j,--workers", workers, "worker threads (default: CORRPOOL_WORKERS)");
  }

  json patch() const {
    json j = json::object();
    if (alpha) j["alpha"] = *alpha;
    if (sar) j["sar"] = *sar;
    if (household) j["household_dist"] = *household;
    if (pool_size) j["pool_size"] = *pool_size;
    if (beta_bar) j["beta_bar"] = *beta_bar;
    if (tau) j["tau"] = *tau;
    if (variant) j["sensitivity_variant"] = *variant;
    if (population) j["population_size"] = *population;
    if (replications) j["replications"] = *replications;
    if (seed) j["master_seed"] = *seed;
    if (!strategies.empty()) j["strategies"] = strategies;
    if (pad) j["pad_last_pool"] = true;
    if (b_infection) j["b_infection"] = *b_infection;
    if (b_recovery) j["b_recovery"] = *b_recovery;
    return j;
  }

  ScenarioConfig build(const json& extra = json::object()) const {
    ScenarioConfig c;
    if (!config_path.empty()) c = load_config_file(config_path);
    merge_config(c, patch());
    merge_config(c, extra);
    c.validate();
    return c;
  }

  RunOptions run_options(bool keep) const {
    return {workers ? *workers : default_worker_count(), keep};
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("out", "cannot write '" + path + "'");
  out << text;
}

template <typename F>
void with_output(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("out", "cannot write '" + path + "'");
  write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlated vs naive Dorfman pooling simulator"};
  app.require_subcommand(1);

  // simulate ------------------------------------------------------------
  ScenarioFlags sim;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "run one scenario, both strategies paired");
  sim.attach(simulate, true);
  simulate->add_option("-o,--out-dir", sim_out,
                       "write summary.json and replications.csv here");

  // sweep ---------------------------------------------------------------
  ScenarioFlags swp;
  std::vector<double> sweep_alphas;
  std::vector<int> sweep_sizes;
  std::string sweep_out;
  std::string sweep_adv;
  auto* sweep = app.add_subcommand("sweep", "grid over prevalence x pool size");
  swp.attach(sweep, false);
  sweep->add_option("--alphas", sweep_alphas, "prevalence grid")->delimiter(',');
  sweep->add_option("--pool-sizes", sweep_sizes, "pool size grid")->delimiter(',');
  sweep->add_option("-o,--out", sweep_out, "long-format CSV (default stdout)");
  sweep->add_option("--advantage-out", sweep_adv, "paired advantage CSV");

  // calibrate -----------------------------------------------------------
  std::vector<double> cal_targets;
  std::size_t cal_draws = 1'000'000;
  std::uint64_t cal_seed = ScenarioConfig{}.master_seed;
  std::string cal_out;
  auto* calibrate = app.add_subcommand("calibrate", "detection threshold for a target FNR");
  calibrate->add_option("--beta-bar", cal_targets, "target(s)")
      ->delimiter(',')
      ->required();
  calibrate->add_option("--draws", cal_draws, "Monte-Carlo draws");
  calibrate->add_option("-s,--seed", cal_seed);
  calibrate->add_option("-o,--out", cal_out, "CSV table");

  // delta-bound ---------------------------------------------------------
  int db_n = 2;
  double db_beta = 0.025;
  bool db_table = false;
  std::size_t db_samples = 1'000'000;
  std::size_t db_boot = 10'000;
  std::uint64_t db_seed = ScenarioConfig{}.master_seed;
  std::optional<std::size_t> db_workers;
  std::string db_out;
  auto* delta = app.add_subcommand("delta-bound", "estimate the follow-up excess bound");
  delta->add_option("-n", db_n, "pool size");
  delta->add_option("--beta-bar", db_beta, "individual FNR target");
  delta->add_flag("--table", db_table, "full grid n in {2,4,6,12} x beta_bar in {2.5,5,10,20}%");
  delta->add_option("--samples", db_samples, "draws B");
  delta->add_option("--bootstrap", db_boot, "bootstrap replicates");
  delta->add_option("-s,--seed", db_seed);
  delta->add_option("-j,--workers", db_workers);
  delta->add_option("-o,--out", db_out);

  // counterexample ------------------------------------------------------
  int ce_grid = 50;
  double ce_alpha = 0.01;
  std::optional<double> ce_t1;
  std::optional<double> ce_t2;
  std::string ce_out;
  auto* counter = app.add_subcommand("counterexample", "two-sample piecewise-sensitivity example");
  counter->add_option("--grid", ce_grid, "grid points per axis");
  counter->add_option("--alpha", ce_alpha);
  counter->add_option("--theta1", ce_t1);
  counter->add_option("--theta2", ce_t2);
  counter->add_option("-o,--out", ce_out);

  // sir -----------------------------------------------------------------
  double sir_bi = 0.0;
  double sir_br = 0.0;
  std::optional<double> sir_f;
  std::optional<double> sir_sens;
  double sir_s0 = 0.999;
  double sir_i0 = 0.001;
  int sir_days = 365;
  std::string sir_out;
  std::string sir_strategy = "correlated";
  ScenarioFlags sir_flags;
  auto* sir = app.add_subcommand("sir", "SIR trajectory under screening");
  sir->add_option("--b-i", sir_bi, "infection rate per day")->required();
  sir->add_option("--b-r", sir_br, "recovery rate per day")->required();
  sir->add_option("-f,--frequency", sir_f, "screenings per person per day (default f*)");
  sir->add_option("--test-sensitivity", sir_sens,
                  "sensitivity; omitted: simulated from the scenario");
  sir->add_option("--strategy", sir_strategy, "strategy whose sensitivity is used");
  sir->add_option("--s0", sir_s0);
  sir->add_option("--i0", sir_i0);
  sir->add_option("--days", sir_days);
  sir->add_option("-o,--out", sir_out, "trajectory CSV (default stdout)");
  sir_flags.attach(sir, true);

  // optimize ------------------------------------------------------------
  ScenarioFlags opt;
  std::vector<int> opt_candidates{4, 6, 8, 10, 12, 15, 20};
  std::string opt_out;
  auto* optimize = app.add_subcommand("optimize", "pool size maximising sensitivity x efficiency");
  opt.attach(optimize, false);
  optimize->add_option("--alpha", opt.alpha, "prevalence");
  optimize->add_option("--candidates", opt_candidates)->delimiter(',');
  optimize->add_option("-o,--out", opt_out);

  try {
    app.parse(argc, argv);

    if (*simulate) {
      const ResolvedScenario scenario = resolve_scenario(sim.build());
      const bool keep = !sim_out.empty();
      const ScenarioResult result = run_scenario(scenario, sim.run_options(keep));
      const std::string summary = dump_json(summary_json(result));
      if (keep) {
        fs::create_directories(sim_out);
        write_text((fs::path(sim_out) / "summary.json").string(), summary);
        std::ofstream csv(fs::path(sim_out) / "replications.csv", std::ios::binary);
        write_replications_csv(csv, result.resolved_config, result.replications);
      }
      std::cout << summary;
    } else if (*sweep) {
      json extra = json::object();
      if (!sweep_alphas.empty()) extra["alpha"] = sweep_alphas;
      if (!sweep_sizes.empty()) extra["pool_size"] = sweep_sizes;
      const ResolvedScenario scenario = resolve_scenario(swp.build(extra));
      const ScenarioResult result = run_sweep(scenario, swp.run_options(false));
      with_output(sweep_out, [&](std::ostream& o) { write_sweep_csv(o, result); });
      if (!sweep_adv.empty()) {
        with_output(sweep_adv, [&](std::ostream& o) { write_advantage_csv(o, result); });
      }
    } else if (*calibrate) {
      const ScenarioConfig base;
      Rng rng = make_stream(cal_seed, 0, StreamTag::kCalibration);
      std::vector<CalibrationResult> results;
      for (double t : cal_targets) {
        Rng r = rng;
        results.push_back(calibrate_tau(t, base.pcr, base.gmm, r, cal_draws));
      }
      const json cfg = {{"command", "calibrate"}, {"beta_bar", cal_targets},
                        {"draws", cal_draws}, {"master_seed", cal_seed}};
      if (cal_targets.size() == 1 && cal_out.empty()) {
        std::cout << "tau=" << results[0].tau << " beta_bar="
                  << format_number(results[0].beta_bar) << "\n";
      } else {
        with_output(cal_out, [&](std::ostream& o) {
          write_calibration_csv(o, cfg, cal_targets, results);
        });
      }
    } else if (*delta) {
      const ScenarioConfig base;
      DeltaPrimeOptions options;
      options.samples = db_samples;
      options.bootstrap_reps = db_boot;
      options.workers = db_workers ? *db_workers : default_worker_count();
      std::vector<int> ns{db_n};
      std::vector<double> betas{db_beta};
      if (db_table) {
        ns = {2, 4, 6, 12};
        betas = {0.025, 0.05, 0.1, 0.2};
      }
      std::vector<DeltaPrimeEstimate> rows;
      for (int n : ns) {
        for (double b : betas) {
          PcrParams pcr = base.pcr;
          Rng rng = make_stream(db_seed, 0, StreamTag::kCalibration);
          pcr.detection_threshold = calibrate_tau(b, pcr, base.gmm, rng).tau;
          rows.push_back(estimate_delta_prime(n, b, pcr, base.gmm, db_seed, options));
        }
      }
      const json cfg = {{"command", "delta-bound"}, {"samples", db_samples},
                        {"bootstrap", db_boot}, {"master_seed", db_seed}};
      if (!db_table && db_out.empty()) {
        json j = delta_prime_json(rows[0]);
        j["config"] = cfg;
        std::cout << dump_json(j);
      } else {
        with_output(db_out, [&](std::ostream& o) { write_delta_table_csv(o, cfg, rows); });
      }
    } else if (*counter) {
      if (ce_t1 || ce_t2) {
        if (!ce_t1 || !ce_t2) throw ConfigError("theta", "give both --theta1 and --theta2");
        const auto r = counterexample_closed_form(*ce_t1, *ce_t2, ce_alpha);
        std::cout << dump_json(counterexample_json(*ce_t1, *ce_t2, ce_alpha, r));
      } else {
        const auto cells = scan_counterexample(ce_grid, ce_alpha);
        const json cfg = {{"command", "counterexample"}, {"grid", ce_grid}, {"alpha", ce_alpha}};
        with_output(ce_out, [&](std::ostream& o) { write_counterexample_csv(o, cfg, cells); });
      }
    } else if (*sir) {
      const SirRates rates{sir_bi, sir_br};
      json cfg = {{"command", "sir"}, {"b_infection", sir_bi}, {"b_recovery", sir_br},
                  {"s0", sir_s0}, {"i0", sir_i0}, {"days", sir_days}};
      double sens = 0.0;
      if (sir_sens) {
        sens = *sir_sens;
      } else {
        const ResolvedScenario scenario = resolve_scenario(sir_flags.build());
        const ScenarioResult result = run_scenario(scenario, sir_flags.run_options(false));
        const auto& agg = result.cells.at(0).get(parse_strategy(sir_strategy)).metrics;
        if (agg.sensitivity.count() == 0) {
          throw InfeasibleError("scenario produced no infections");
        }
        sens = agg.sensitivity.mean();
        cfg["scenario"] = result.resolved_config;
        cfg["strategy"] = sir_strategy;
      }
      if (!(sens >= 0.0 && sens <= 1.0)) throw ConfigError("test-sensitivity", "must be in [0, 1]");
      const double f_star = critical_frequency(rates, sens);
      const double f = sir_f ? *sir_f : f_star;
      cfg["sensitivity"] = sens;
      cfg["f_star"] = f_star;
      cfg["frequency"] = f;
      if (rates.recovery + f * sens > 0.0) {
        cfg["growth_factor_bound"] = growth_factor_bound(rates, f, sens);
      }
      const double r0 = 1.0 - sir_s0 - sir_i0;
      const auto path = simulate_sir({sir_s0, sir_i0, r0, 0}, rates, f, sens, sir_days);
      with_output(sir_out, [&](std::ostream& o) { write_trajectory_csv(o, cfg, path); });
      if (!sir_out.empty()) std::cout << dump_json(cfg);
    } else if (*optimize) {
      const ResolvedScenario scenario = resolve_scenario(opt.build());
      const auto policy = optimize_pool_size(scenario, opt_candidates, opt.run_options(false));
      json cfg = config_to_json(scenario.config);
      cfg["candidates"] = opt_candidates;
      const std::string text = dump_json(policy_json(cfg, policy));
      if (!opt_out.empty()) write_text(opt_out, text);
      std::cout << text;
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
