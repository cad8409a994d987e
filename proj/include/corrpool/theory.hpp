#pragma once

#include <cstdint>
#include <vector>

#include "corrpool/pcr.hpp"
#include "corrpool/viral_model.hpp"

namespace corrpool {

// ---------------------------------------------------------------------------
// Two-sample pool with piecewise-constant sensitivity where correlated
// pooling can lose efficiency. Index 0 is naive pooling, 1 is correlated.
// ---------------------------------------------------------------------------

struct CounterexampleResult {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double ey0 = 0.0;
  double ey1 = 0.0;
  double eta0 = 0.0;
  double eta1 = 0.0;
  double eff0 = 0.0;
  double eff1 = 0.0;
};

CounterexampleResult counterexample_closed_form(double theta1, double theta2,
                                                double alpha);

/// Exhaustive summation over the 3x3 joint viral-load table, the pooled
/// outcome and both individual outcomes. Shares no formulas with the closed
/// form.
CounterexampleResult counterexample_enumerate(double theta1, double theta2,
                                              double alpha);

struct CounterexampleCell {
  double theta1;
  double theta2;
  CounterexampleResult result;
  double eff_diff() const noexcept { return result.eff1 - result.eff0; }
  double eta_ratio() const noexcept { return result.eta1 / result.eta0; }
};

/// All grid pairs k/(grid+1), k = 1..grid, with theta1 < theta2.
std::vector<CounterexampleCell> scan_counterexample(int grid, double alpha);

// ---------------------------------------------------------------------------
// Upper bound delta' on the follow-up excess of correlated pooling:
//   delta' = E[X] / E[Z] * beta_bar / (1 - beta_bar)
// with X = p(mean of n draws from V | W=0) and Z = p(V/n), V ~ V | W=1.
// ---------------------------------------------------------------------------

struct DeltaPrimeOptions {
  std::size_t samples = 1'000'000;
  std::size_t bootstrap_reps = 10'000;
  /// Rejection sampling gives up after this many attempts per kept draw.
  double max_attempts_per_sample = 1000.0;
  std::size_t workers = 1;
};

struct DeltaPrimeEstimate {
  int pool_size = 0;
  double beta_bar = 0.0;
  std::int64_t tau = 0;
  double x_bar = 0.0;
  double z_bar = 0.0;
  double delta_prime_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t x_samples = 0;
  std::size_t z_samples = 0;
  bool x_all_zero = false;
  /// Point estimate below 1e-12: the interval is a rare-event guess only.
  bool ci_unreliable = false;
};

/// Draws of V | V > 0, W = want_positive, W from the simulated individual
/// test. Generated in fixed-size chunks, each from its own stream, so the
/// result is independent of the worker count. May return fewer than `count`
/// draws if the attempt cap is hit.
std::vector<double> sample_conditional_loads(const PcrParams& pcr,
                                             const GmmParams& gmm,
                                             bool want_positive,
                                             std::size_t count,
                                             std::uint64_t seed,
                                             double max_attempts_per_sample = 1000.0,
                                             std::size_t workers = 1);

/// Estimate from pre-drawn conditional loads, B = positives.size(). The first
/// n * B negatives form B pools of n; each positive sits alone in a pool of n.
DeltaPrimeEstimate delta_prime_from_samples(int pool_size, double beta_bar,
                                            const PcrParams& pcr,
                                            const std::vector<double>& negatives,
                                            const std::vector<double>& positives,
                                            std::size_t bootstrap_reps,
                                            std::uint64_t seed,
                                            std::size_t workers = 1);

DeltaPrimeEstimate estimate_delta_prime(int pool_size, double beta_bar,
                                        const PcrParams& calibrated_pcr,
                                        const GmmParams& gmm, std::uint64_t seed,
                                        const DeltaPrimeOptions& options = {});

struct PercentileInterval {
  double low;
  double high;
};

/// Percentile bootstrap interval for the mean at the given two-sided level.
/// Replicate r resamples from its own stream derived from (seed, r).
PercentileInterval bootstrap_mean_interval(const std::vector<double>& values,
                                           std::size_t reps, double level,
                                           std::uint64_t seed,
                                           std::size_t workers = 1);

/// Linear-interpolation quantile of sorted data.
double sorted_quantile(const std::vector<double>& sorted, double prob);

}  // namespace corrpool
