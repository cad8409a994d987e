#pragma once

#include <optional>
#include <vector>

#include "corrpool/pooling.hpp"
#include "corrpool/scenario.hpp"

namespace corrpool {

struct SirState {
  double s = 1.0;
  double i = 0.0;
  double r = 0.0;
  int t = 0;
};

/// Per-day infection and recovery rates.
struct SirRates {
  double infection;
  double recovery;
};

/// Discrete-time SIR with screening at frequency f removing a fraction
/// f * sensitivity of the infected each day.
SirState sir_step(const SirState& state, const SirRates& rates, double frequency,
                  double sensitivity);

std::vector<SirState> simulate_sir(const SirState& initial, const SirRates& rates,
                                   double frequency, double sensitivity, int days);

/// b_I S / (b_R + f sens).
double growth_factor(const SirState& state, const SirRates& rates, double frequency,
                     double sensitivity);
/// Growth factor at S = 1.
double growth_factor_bound(const SirRates& rates, double frequency, double sensitivity);

/// Screening frequency at which the bound equals one; 0 if the epidemic
/// dies out unscreened.
double critical_frequency(const SirRates& rates, double sensitivity);

/// 1 - obj_naive / obj_correlated.
double consumption_reduction(double objective_naive, double objective_correlated);

struct CandidateScore {
  int pool_size;
  double sensitivity;
  double efficiency;
  double objective;
};

struct PolicyResult {
  Strategy strategy;
  int pool_size = 0;
  double sensitivity = 0.0;
  double efficiency = 0.0;
  double objective = 0.0;
  /// Set when both SIR rates are configured.
  std::optional<double> f_star;
  /// Tests per person per day at f*, up to a constant: 1 / objective.
  double relative_consumption = 0.0;
  std::vector<CandidateScore> candidates;
};

/// Runs every candidate pool size at the scenario's first prevalence and
/// keeps the one maximising mean sensitivity x mean efficiency. Ties go to
/// the smaller pool.
std::vector<PolicyResult> optimize_pool_size(const ResolvedScenario& scenario,
                                             const std::vector<int>& candidates,
                                             const RunOptions& options = {});

}  // namespace corrpool
