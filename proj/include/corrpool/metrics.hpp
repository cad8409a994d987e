#pragma once

#include <cstdint>
#include <optional>

#include "corrpool/dorfman.hpp"

namespace corrpool {

/// Ratio-of-sums metrics over every pool of one replication.
struct MetricsSummary {
  std::size_t population_size = 0;
  int nominal_pool_size = 0;
  std::uint64_t pooled_tests = 0;
  std::uint64_t followup_tests = 0;
  std::uint64_t total_infected = 0;
  std::uint64_t total_identified = 0;
  std::uint64_t positive_pools = 0;

  /// 1 - beta = D / S; empty when S = 0.
  std::optional<double> sensitivity;
  /// Persons screened per test consumed.
  double efficiency = 0.0;
  /// Positives identified per test consumed.
  double gamma = 0.0;
  /// Follow-up tests per positive identified; empty when D = 0.
  std::optional<double> eta;

  std::uint64_t total_tests() const noexcept { return pooled_tests + followup_tests; }
  double realized_prevalence() const noexcept;
};

MetricsSummary compute_metrics(const ProtocolOutcome& outcome);

/// (1/n + alpha_hat * eta_hat * (1 - beta_hat))^-1 on raw tallies. Equals the
/// measured efficiency exactly when every pool is full. Empty when D = 0.
std::optional<double> efficiency_from_identity(const MetricsSummary& m);

/// sum_j D_j / (pools + sum_j size_j * Y_j), recomputed pool by pool.
double gamma_from_pools(const ProtocolOutcome& outcome);

struct FprEstimate {
  double frac_indiv = 0.0;
  double frac_pos_indiv = 0.0;
  double frac_neg_indiv = 0.0;
  double frac_neg_indiv_pos = 0.0;
  double fpr = 0.0;
  /// frac_neg_indiv came out negative (sampling noise) and was floored at 0.
  bool floored = false;
};

inline constexpr double kDefaultPerTestFpr = 1e-4;

/// Negatives receiving individual tests, times the per-test false-positive
/// probability, normalised by the negative fraction.
FprEstimate estimate_fpr(double efficiency, double sensitivity, int pool_size,
                         double alpha, double per_test_fpr = kDefaultPerTestFpr);
FprEstimate estimate_fpr(const MetricsSummary& metrics, int pool_size, double alpha,
                         double per_test_fpr = kDefaultPerTestFpr);

/// Welford accumulator.
class RunningStat {
 public:
  void add(double x) noexcept;
  std::size_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept;
  double standard_error() const noexcept;

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Cross-replication averages. Replications with an undefined metric are
/// left out of that metric's mean and counted instead.
struct MetricsAggregate {
  RunningStat sensitivity;
  RunningStat efficiency;
  RunningStat gamma;
  RunningStat eta;
  std::size_t undefined_sensitivity = 0;
  std::size_t undefined_eta = 0;

  void add(const MetricsSummary& m);
  /// mean sensitivity x mean efficiency; zero if sensitivity never defined.
  double objective() const noexcept;
};

}  // namespace corrpool
