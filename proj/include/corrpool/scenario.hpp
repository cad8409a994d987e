#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "corrpool/metrics.hpp"
#include "corrpool/pcr.hpp"
#include "corrpool/pooling.hpp"
#include "corrpool/population.hpp"
#include "corrpool/viral_model.hpp"

namespace corrpool {

enum class SensitivityVariant { kRealistic, kStep, kPiecewise };

std::string to_string(SensitivityVariant v);
SensitivityVariant parse_sensitivity_variant(const std::string& name);

struct ScenarioConfig {
  /// A single value for simulate/optimize; any number of values for sweep.
  std::vector<double> alphas{0.01};
  double sar = 0.166;
  HouseholdDist household_dist = HouseholdDist::builtin("US");
  std::vector<int> pool_sizes{6};
  /// Calibration target for tau (realistic) or the threshold (step).
  std::optional<double> beta_bar = 0.05;
  /// Explicit detection threshold; replaces beta_bar calibration.
  std::optional<std::int64_t> tau;
  SensitivityVariant sensitivity_variant = SensitivityVariant::kRealistic;
  /// Step-variant cutoff in copies/mL.
  std::optional<double> step_threshold;
  double theta1 = 0.2;
  double theta2 = 0.9;
  std::size_t population_size = 12000;
  std::size_t replications = 2000;
  std::uint64_t master_seed = 20200801;
  std::vector<Strategy> strategies{Strategy::kNaive, Strategy::kCorrelated};
  bool pad_last_pool = false;
  PcrParams pcr;
  GmmParams gmm = GmmParams::defaults();
  std::size_t calibration_draws = 1'000'000;
  double per_test_fpr = kDefaultPerTestFpr;
  std::optional<double> b_infection;
  std::optional<double> b_recovery;

  void validate() const;
};

/// Reads the JSON schema documented in the README. Unknown keys throw.
ScenarioConfig config_from_json(const nlohmann::json& j);
/// Applies only the keys present in `j` on top of `base`.
void merge_config(ScenarioConfig& base, const nlohmann::json& j);
ScenarioConfig load_config_file(const std::string& path);
nlohmann::json config_to_json(const ScenarioConfig& config);

/// Config with the sensitivity function fixed: tau calibrated, step
/// threshold placed at the beta_bar quantile of the viral-load mixture.
struct ResolvedScenario {
  ScenarioConfig config;
  SensitivityFn sensitivity;
  std::optional<CalibrationResult> calibration;
};

ResolvedScenario resolve_scenario(const ScenarioConfig& config);

struct RunOptions {
  std::size_t workers = 1;
  bool keep_replications = false;
};

struct ReplicationRecord {
  std::size_t replication;
  Strategy strategy;
  double alpha;
  int pool_size;
  MetricsSummary metrics;
};

struct StrategySummary {
  Strategy strategy;
  MetricsAggregate metrics;
  FprEstimate fpr;
};

/// Correlated minus naive, paired by replication. Replications where either
/// sensitivity is undefined are skipped for the sensitivity difference.
struct PairedAdvantage {
  RunningStat sensitivity;
  RunningStat efficiency;
};

struct CellResult {
  double alpha;
  int pool_size;
  std::vector<StrategySummary> strategies;
  std::optional<PairedAdvantage> advantage;

  const StrategySummary& get(Strategy s) const;
};

struct ScenarioResult {
  nlohmann::json resolved_config;
  std::vector<CellResult> cells;
  std::vector<ReplicationRecord> replications;
};

/// One population per replication, shared by every strategy. Replication r
/// draws from streams derived from (master_seed, r), so results are the same
/// for any worker count.
CellResult run_cell(const ResolvedScenario& scenario, double alpha, int pool_size,
                    const RunOptions& options,
                    std::vector<ReplicationRecord>* records = nullptr);

/// Requires exactly one alpha and one pool size.
ScenarioResult run_scenario(const ResolvedScenario& scenario,
                            const RunOptions& options = {});

/// Every (alpha, n) in the config grid, alpha-major.
ScenarioResult run_sweep(const ResolvedScenario& scenario,
                         const RunOptions& options = {});

/// log10 viral load below which a fraction q of infected loads fall.
double gmm_quantile(const GmmParams& gmm, double q);

}  // namespace corrpool
