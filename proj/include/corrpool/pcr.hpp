#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "corrpool/rng.hpp"
#include "corrpool/viral_model.hpp"

namespace corrpool {

/// Realistic PCR chain: subsample from each sample, bind on glass fiber with
/// efficiency xi, declare positive when at least tau copies reach the PCR.
struct PcrParams {
  double sample_volume_ml = 1.0;
  /// Individual-test subsample; a pool of size n draws subsample/n from each.
  double subsample_volume_ul = 100.0;
  double binding_efficiency = 0.5;
  std::int64_t detection_threshold = 174;

  void validate() const;
};

/// P(Binomial(trials, p) >= threshold), evaluated analytically.
double binomial_tail(std::int64_t trials, double p, std::int64_t threshold);

/// Number of RNA copies in the sample volume, rounded to the nearest integer.
std::int64_t copy_count(double total_load, double sample_volume_ml);

/// Per-copy probability of reaching the PCR machine for a given dilution.
double capture_probability(const PcrParams& params, int dilution);

/// Draws M ~ Binomial(trials, p). Exact for trials*p <= 1e4, Poisson(trials*p)
/// up to 1e6 when p <= 0.05, exact above that.
std::int64_t sample_copy_count(std::int64_t trials, double p, Rng& rng);

/// Simulates one pooled (or, with pool_size == 1, individual) PCR test.
bool run_pooled_pcr(std::span<const double> viral_loads, int pool_size,
                    const PcrParams& params, Rng& rng);

/// Analytic probability that run_pooled_pcr returns positive.
double success_probability(const PcrParams& params,
                           std::span<const double> viral_loads, int pool_size);
/// One contributing sample with load v in a pool of size n.
double success_probability(const PcrParams& params, double v, int pool_size);

struct RealisticSensitivity {
  PcrParams pcr;
};

/// p(v) = 1{v >= u0} for v > 0, p(0) = 0.
struct StepSensitivity {
  double threshold;
};

/// 0 at v = 0, theta1 on (0,2), theta2 on [2,3), 1 on [3, inf).
struct PiecewiseSensitivity {
  double theta1;
  double theta2;
};

class SensitivityFn {
 public:
  using Variant =
      std::variant<RealisticSensitivity, StepSensitivity, PiecewiseSensitivity>;

  static SensitivityFn realistic(const PcrParams& params);
  static SensitivityFn step(double threshold);
  static SensitivityFn piecewise(double theta1, double theta2);

  const Variant& variant() const noexcept { return fn_; }
  bool is_realistic() const noexcept {
    return std::holds_alternative<RealisticSensitivity>(fn_);
  }

  /// Individual-test sensitivity p(v).
  double evaluate(double v) const;

  /// Pooled-test positive probability. The realistic variant dilutes through
  /// the subsample volume; the others evaluate p at sum(loads)/dilution.
  double pooled_probability(std::span<const double> loads, int dilution) const;

  bool test_pool(std::span<const double> loads, int dilution, Rng& rng) const;
  bool test_individual(double v, Rng& rng) const;

 private:
  explicit SensitivityFn(Variant fn) : fn_(std::move(fn)) {}
  Variant fn_;
};

struct CalibrationResult {
  std::int64_t tau;
  /// Monte-Carlo individual-test FNR at the returned tau.
  double beta_bar;
  std::size_t draws;
};

/// Smallest tau whose estimated population-average individual FNR reaches
/// the target. One set of draws is shared by every tau candidate, so the
/// estimated FNR is monotone in tau and the search is deterministic.
CalibrationResult calibrate_tau(double target_beta_bar, const PcrParams& params,
                                const GmmParams& gmm, Rng& rng,
                                std::size_t draws = 1'000'000);

/// E[1 - p(V) | V > 0] with p evaluated analytically per draw.
double estimate_beta_bar(const PcrParams& params, const GmmParams& gmm,
                         Rng& rng, std::size_t draws);

}  // namespace corrpool
