#include "corrpool/pcr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "corrpool/errors.hpp"

namespace corrpool {

namespace {

constexpr double kExactBinomialMean = 1e4;
constexpr double kPoissonMaxMean = 1e6;
constexpr double kPoissonMaxP = 0.05;
constexpr double kSaturation = 1.0 - 1e-12;
// Loads beyond ~1e18 copies cannot occur under any sensible mixture and the
// test is saturated long before; the cap only protects the integer cast.
constexpr double kMaxCopies = 1e18;
constexpr std::int64_t kMaxTau = 10'000'000;

double total_of(std::span<const double> loads) {
  double sum = 0.0;
  for (double v : loads) {
    if (!(v >= 0.0)) throw std::invalid_argument("viral load must be >= 0");
    sum += v;
  }
  return sum;
}

}  // namespace

void PcrParams::validate() const {
  if (!(sample_volume_ml > 0.0)) {
    throw ConfigError("sample_volume_ml", "must be > 0");
  }
  if (!(subsample_volume_ul > 0.0) ||
      subsample_volume_ul > 1000.0 * sample_volume_ml) {
    throw ConfigError("subsample_volume_ul",
                      "must be in (0, 1000 * sample_volume_ml]");
  }
  if (!(binding_efficiency > 0.0 && binding_efficiency <= 1.0)) {
    throw ConfigError("binding_efficiency", "must be in (0, 1]");
  }
  if (detection_threshold < 1) {
    throw ConfigError("tau", "detection threshold must be a positive integer");
  }
}

double binomial_tail(std::int64_t trials, double p, std::int64_t threshold) {
  if (threshold <= 0) return 1.0;
  if (trials < threshold || p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double n = static_cast<double>(trials);
  const double k = static_cast<double>(threshold);
  const double mean = n * p;
  // Chernoff bounds: skip the incomplete beta when the answer is 0 or 1 at
  // double resolution.
  if (k - 1.0 < mean) {
    const double d = (mean - (k - 1.0)) / mean;
    if (d * d * mean / 2.0 > 40.0) return 1.0;
  } else {
    const double x = k / mean;
    const double log_bound = -mean * (x * std::log(x) - x + 1.0);
    if (log_bound < -700.0) return 0.0;
  }
  return boost::math::ibeta(k, n - k + 1.0, p);
}

std::int64_t copy_count(double total_load, double sample_volume_ml) {
  const double copies = std::min(total_load * sample_volume_ml, kMaxCopies);
  return static_cast<std::int64_t>(std::llround(copies));
}

double capture_probability(const PcrParams& params, int dilution) {
  if (dilution < 1) throw std::invalid_argument("pool size must be >= 1");
  const double subsample_ml = params.subsample_volume_ul / dilution / 1000.0;
  return subsample_ml / params.sample_volume_ml * params.binding_efficiency;
}

std::int64_t sample_copy_count(std::int64_t trials, double p, Rng& rng) {
  if (trials <= 0 || p <= 0.0) return 0;
  const double mean = static_cast<double>(trials) * p;
  if (mean > kExactBinomialMean && mean <= kPoissonMaxMean && p <= kPoissonMaxP) {
    return std::poisson_distribution<std::int64_t>(mean)(rng);
  }
  return std::binomial_distribution<std::int64_t>(trials, p)(rng);
}

bool run_pooled_pcr(std::span<const double> viral_loads, int pool_size,
                    const PcrParams& params, Rng& rng) {
  if (pool_size < 1) throw std::invalid_argument("pool size must be >= 1");
  const double total = total_of(viral_loads);
  if (total == 0.0) return false;
  const std::int64_t k = copy_count(total, params.sample_volume_ml);
  const double p = capture_probability(params, pool_size);
  if (binomial_tail(k, p, params.detection_threshold) > kSaturation) return true;
  return sample_copy_count(k, p, rng) >= params.detection_threshold;
}

double success_probability(const PcrParams& params,
                           std::span<const double> viral_loads, int pool_size) {
  if (pool_size < 1) throw std::invalid_argument("pool size must be >= 1");
  const double total = total_of(viral_loads);
  if (total == 0.0) return 0.0;
  return binomial_tail(copy_count(total, params.sample_volume_ml),
                       capture_probability(params, pool_size),
                       params.detection_threshold);
}

double success_probability(const PcrParams& params, double v, int pool_size) {
  return success_probability(params, std::span<const double>(&v, 1), pool_size);
}

SensitivityFn SensitivityFn::realistic(const PcrParams& params) {
  params.validate();
  return SensitivityFn(RealisticSensitivity{params});
}

SensitivityFn SensitivityFn::step(double threshold) {
  if (!(threshold >= 0.0)) {
    throw std::invalid_argument("step threshold must be >= 0");
  }
  return SensitivityFn(StepSensitivity{threshold});
}

SensitivityFn SensitivityFn::piecewise(double theta1, double theta2) {
  if (!(theta1 > 0.0 && theta1 < theta2 && theta2 < 1.0)) {
    throw std::invalid_argument("piecewise sensitivity needs 0 < theta1 < theta2 < 1");
  }
  return SensitivityFn(PiecewiseSensitivity{theta1, theta2});
}

double SensitivityFn::evaluate(double v) const {
  if (!(v >= 0.0)) throw std::invalid_argument("viral load must be >= 0");
  if (v == 0.0) return 0.0;
  if (const auto* r = std::get_if<RealisticSensitivity>(&fn_)) {
    return success_probability(r->pcr, v, 1);
  }
  if (const auto* s = std::get_if<StepSensitivity>(&fn_)) {
    return v >= s->threshold ? 1.0 : 0.0;
  }
  const auto& pw = std::get<PiecewiseSensitivity>(fn_);
  if (v < 2.0) return pw.theta1;
  if (v < 3.0) return pw.theta2;
  return 1.0;
}

double SensitivityFn::pooled_probability(std::span<const double> loads,
                                         int dilution) const {
  if (dilution < 1) throw std::invalid_argument("pool size must be >= 1");
  if (const auto* r = std::get_if<RealisticSensitivity>(&fn_)) {
    return success_probability(r->pcr, loads, dilution);
  }
  return evaluate(total_of(loads) / dilution);
}

bool SensitivityFn::test_pool(std::span<const double> loads, int dilution,
                              Rng& rng) const {
  if (const auto* r = std::get_if<RealisticSensitivity>(&fn_)) {
    return run_pooled_pcr(loads, dilution, r->pcr, rng);
  }
  const double prob = pooled_probability(loads, dilution);
  if (prob <= 0.0) return false;
  if (prob >= 1.0) return true;
  return std::bernoulli_distribution(prob)(rng);
}

bool SensitivityFn::test_individual(double v, Rng& rng) const {
  return test_pool(std::span<const double>(&v, 1), 1, rng);
}

CalibrationResult calibrate_tau(double target_beta_bar, const PcrParams& params,
                                const GmmParams& gmm, Rng& rng,
                                std::size_t draws) {
  if (!(target_beta_bar > 0.0 && target_beta_bar <= 0.5)) {
    throw ConfigError("beta_bar", "calibration target must be in (0, 0.5]");
  }
  if (draws < 1'000'000) {
    throw std::invalid_argument("calibration needs at least 1e6 draws");
  }
  PcrParams base = params;
  base.detection_threshold = 1;
  base.validate();

  GmmSampler sampler(gmm);
  const double p = capture_probability(base, 1);
  std::vector<std::int64_t> counts(draws);
  for (auto& m : counts) {
    m = sample_copy_count(copy_count(sampler.load(rng), base.sample_volume_ml),
                          p, rng);
  }
  std::sort(counts.begin(), counts.end());

  // Fraction of draws that would miss at threshold tau: #(M < tau) / B.
  const auto fnr_at = [&](std::int64_t tau) {
    const auto it = std::lower_bound(counts.begin(), counts.end(), tau);
    return static_cast<double>(it - counts.begin()) / static_cast<double>(draws);
  };
  if (fnr_at(kMaxTau) < target_beta_bar) {
    throw InfeasibleError("calibration target unreachable for tau <= 1e7");
  }
  std::int64_t lo = 1;
  std::int64_t hi = kMaxTau;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (fnr_at(mid) >= target_beta_bar) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return {lo, fnr_at(lo), draws};
}

double estimate_beta_bar(const PcrParams& params, const GmmParams& gmm,
                         Rng& rng, std::size_t draws) {
  params.validate();
  if (draws == 0) throw std::invalid_argument("draws must be > 0");
  GmmSampler sampler(gmm);
  double miss = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    miss += 1.0 - success_probability(params, sampler.load(rng), 1);
  }
  return miss / static_cast<double>(draws);
}

}  // namespace corrpool
