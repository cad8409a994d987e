#include "corrpool/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "corrpool/errors.hpp"
#include "corrpool/parallel.hpp"

namespace corrpool {

namespace {

void check_counterexample_args(double theta1, double theta2, double alpha) {
  if (!(theta1 > 0.0 && theta1 < theta2 && theta2 < 1.0)) {
    throw std::invalid_argument("counterexample needs 0 < theta1 < theta2 < 1");
  }
  if (!(alpha > 0.0 && alpha < 2.0 / 3.0)) {
    throw std::invalid_argument("counterexample needs alpha in (0, 2/3)");
  }
}

struct Cell {
  int v1;
  int v2;
  double prob;
};

double piecewise_p(double v, double theta1, double theta2) {
  if (v == 0.0) return 0.0;
  if (v < 2.0) return theta1;
  if (v < 3.0) return theta2;
  return 1.0;
}

struct Moments {
  double infected = 0.0;  // E[# infected in pool]
  double detected = 0.0;  // E[# with D = 1]
  double pool_positive = 0.0;
};

Moments enumerate_cells(const std::vector<Cell>& cells, double theta1,
                        double theta2) {
  Moments m;
  for (const Cell& c : cells) {
    const double py = piecewise_p((c.v1 + c.v2) / 2.0, theta1, theta2);
    const double pw1 = piecewise_p(c.v1, theta1, theta2);
    const double pw2 = piecewise_p(c.v2, theta1, theta2);
    for (int y = 0; y <= 1; ++y) {
      for (int w1 = 0; w1 <= 1; ++w1) {
        for (int w2 = 0; w2 <= 1; ++w2) {
          const double pr = c.prob * (y ? py : 1.0 - py) *
                            (w1 ? pw1 : 1.0 - pw1) * (w2 ? pw2 : 1.0 - pw2);
          if (pr == 0.0) continue;
          const int s = (c.v1 > 0) + (c.v2 > 0);
          const int d = y * ((c.v1 > 0) * w1 + (c.v2 > 0) * w2);
          m.infected += pr * s;
          m.detected += pr * d;
          m.pool_positive += pr * y;
        }
      }
    }
  }
  return m;
}

}  // namespace

CounterexampleResult counterexample_closed_form(double theta1, double theta2,
                                                double alpha) {
  check_counterexample_args(theta1, theta2, alpha);
  const double a = alpha;
  const double t1 = theta1;
  const double t2 = theta2;
  CounterexampleResult r;
  r.beta1 = 1.0 - (t2 * t2 / 2.0 + t1 / 2.0);
  r.beta0 = 1.0 - a * (t2 * t2 / 2.0 + t2 / 4.0 + 0.25) -
            (1.0 - a) * (t1 * t2 / 2.0 + t1 / 2.0);
  r.ey0 = 2.0 * a * (1.0 - a) * t1 + 0.75 * a * a * t2 + a * a / 4.0;
  r.ey1 = a * t1 + a * t2 / 2.0;
  constexpr double n = 2.0;
  r.eta0 = n * r.ey0 / (n * a * (1.0 - r.beta0));
  r.eta1 = n * r.ey1 / (n * a * (1.0 - r.beta1));
  r.eff0 = 1.0 / (1.0 / n + a * r.eta0 * (1.0 - r.beta0));
  r.eff1 = 1.0 / (1.0 / n + a * r.eta1 * (1.0 - r.beta1));
  return r;
}

CounterexampleResult counterexample_enumerate(double theta1, double theta2,
                                              double alpha) {
  check_counterexample_args(theta1, theta2, alpha);
  // Joint table of (V1, V2) over {0, 2, 3}^2 in the correlated pool.
  const std::array<int, 3> levels{0, 2, 3};
  std::vector<Cell> correlated;
  std::vector<Cell> naive;
  const std::array<double, 3> marginal{1.0 - alpha, alpha / 2.0, alpha / 2.0};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int v1 = levels[i];
      const int v2 = levels[j];
      double joint = 0.0;
      if (v1 == 0 && v2 == 0) joint = 1.0 - 1.5 * alpha;
      else if ((v1 == 0 && v2 == 3) || (v1 == 3 && v2 == 0)) joint = alpha / 2.0;
      else if (v1 == 2 && v2 == 2) joint = alpha / 2.0;
      correlated.push_back({v1, v2, joint});
      naive.push_back({v1, v2, marginal[i] * marginal[j]});
    }
  }
  const Moments m0 = enumerate_cells(naive, theta1, theta2);
  const Moments m1 = enumerate_cells(correlated, theta1, theta2);

  CounterexampleResult r;
  r.beta0 = 1.0 - m0.detected / m0.infected;
  r.beta1 = 1.0 - m1.detected / m1.infected;
  r.ey0 = m0.pool_positive;
  r.ey1 = m1.pool_positive;
  // Follow-up tests per detected positive: two tests per positive pool.
  r.eta0 = 2.0 * m0.pool_positive / m0.detected;
  r.eta1 = 2.0 * m1.pool_positive / m1.detected;
  // Persons per test: two persons over one pooled test plus follow-ups.
  r.eff0 = 2.0 / (1.0 + 2.0 * m0.pool_positive);
  r.eff1 = 2.0 / (1.0 + 2.0 * m1.pool_positive);
  return r;
}

std::vector<CounterexampleCell> scan_counterexample(int grid, double alpha) {
  if (grid < 2) throw std::invalid_argument("grid must be >= 2");
  std::vector<CounterexampleCell> cells;
  for (int i = 1; i <= grid; ++i) {
    for (int j = i + 1; j <= grid; ++j) {
      const double t1 = static_cast<double>(i) / (grid + 1);
      const double t2 = static_cast<double>(j) / (grid + 1);
      cells.push_back({t1, t2, counterexample_closed_form(t1, t2, alpha)});
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kChunk = 1u << 16;
constexpr double kZQuantile = 3.891;  // two-sided normal quantile at 99.99%
constexpr double kNormalLevel = 0.9999;
constexpr double kOverallLevel = 0.95;
constexpr double kReliableFloor = 1e-12;

// Resampling indices from a SplitMix64 sequence, reduced by multiply-shift
// (bias at most n / 2^64). Several times faster than mt19937_64 here.
inline std::size_t next_index(std::uint64_t& state, std::size_t n) {
  const std::uint64_t bits = splitmix64(state);
  state += kSplitMixGamma;
  return static_cast<std::size_t>((static_cast<unsigned __int128>(bits) * n) >> 64);
}

}  // namespace

std::vector<double> sample_conditional_loads(const PcrParams& pcr,
                                             const GmmParams& gmm,
                                             bool want_positive,
                                             std::size_t count,
                                             std::uint64_t seed,
                                             double max_attempts_per_sample,
                                             std::size_t workers) {
  pcr.validate();
  const SensitivityFn test = SensitivityFn::realistic(pcr);
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> parts(chunks);
  const StreamTag tag = want_positive ? StreamTag::kDeltaZ : StreamTag::kDeltaX;
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t want = std::min(kChunk, count - c * kChunk);
    const auto cap = static_cast<std::uint64_t>(max_attempts_per_sample * want);
    Rng rng = make_stream(seed, c, tag);
    GmmSampler sampler(gmm);
    auto& out = parts[c];
    out.reserve(want);
    for (std::uint64_t attempt = 0; attempt < cap && out.size() < want;
         ++attempt) {
      const double v = sampler.load(rng);
      if (test.test_individual(v, rng) == want_positive) out.push_back(v);
    }
  });
  std::vector<double> all;
  all.reserve(count);
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

double sorted_quantile(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double h = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

PercentileInterval bootstrap_mean_interval(const std::vector<double>& values,
                                           std::size_t reps, double level,
                                           std::uint64_t seed,
                                           std::size_t workers) {
  if (values.empty() || reps < 2) {
    throw std::invalid_argument("bootstrap needs data and at least 2 replicates");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("bootstrap level must be in (0, 1)");
  }
  const std::size_t n = values.size();
  const double* data = values.data();
  std::vector<double> means(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    std::uint64_t state = derive_seed(seed, r, StreamTag::kBootstrap);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += data[next_index(state, n)];
    means[r] = sum / static_cast<double>(n);
  });
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  return {sorted_quantile(means, tail), sorted_quantile(means, 1.0 - tail)};
}

DeltaPrimeEstimate delta_prime_from_samples(int pool_size, double beta_bar,
                                            const PcrParams& pcr,
                                            const std::vector<double>& negatives,
                                            const std::vector<double>& positives,
                                            std::size_t bootstrap_reps,
                                            std::uint64_t seed,
                                            std::size_t workers) {
  if (pool_size < 2) throw std::invalid_argument("pool size must be >= 2");
  if (!(beta_bar > 0.0 && beta_bar < 1.0)) {
    throw std::invalid_argument("beta_bar must be in (0, 1)");
  }
  const std::size_t n = static_cast<std::size_t>(pool_size);
  const std::size_t bz = positives.size();
  const std::size_t bx = std::min(negatives.size() / n, bz);
  if (bx < 2 || bz < 2) {
    throw InfeasibleError("too few conditional draws for the delta' estimate");
  }

  std::vector<double> x(bx);
  for (std::size_t i = 0; i < bx; ++i) {
    x[i] = success_probability(
        pcr, std::span<const double>(negatives.data() + i * n, n), pool_size);
  }
  double z_sum = 0.0;
  double z_sq = 0.0;
  for (double v : positives) {
    const double z = success_probability(pcr, v, pool_size);
    z_sum += z;
    z_sq += z * z;
  }
  const double z_bar = z_sum / static_cast<double>(bz);
  const double z_var =
      std::max(0.0, (z_sq - z_sum * z_bar) / static_cast<double>(bz - 1));
  const double z_se = std::sqrt(z_var / static_cast<double>(bz));
  if (!(z_bar > 0.0)) throw InfeasibleError("mean of Z is zero");

  DeltaPrimeEstimate est;
  est.pool_size = pool_size;
  est.beta_bar = beta_bar;
  est.tau = pcr.detection_threshold;
  est.x_samples = bx;
  est.z_samples = bz;
  est.x_bar = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(bx);
  est.z_bar = z_bar;
  const double odds = beta_bar / (1.0 - beta_bar);
  est.delta_prime_hat = est.x_bar / z_bar * odds;

  const double lz = z_bar - kZQuantile * z_se;
  const double uz = z_bar + kZQuantile * z_se;
  est.x_all_zero = std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
  PercentileInterval xi{0.0, 0.0};
  if (!est.x_all_zero) {
    xi = bootstrap_mean_interval(x, bootstrap_reps, kOverallLevel / kNormalLevel,
                                 seed, workers);
  }
  est.ci_low = std::max(0.0, xi.low) / uz * odds;
  est.ci_high = lz > 0.0 ? xi.high / lz * odds
                         : std::numeric_limits<double>::infinity();
  est.ci_unreliable = est.delta_prime_hat < kReliableFloor;
  return est;
}

DeltaPrimeEstimate estimate_delta_prime(int pool_size, double beta_bar,
                                        const PcrParams& calibrated_pcr,
                                        const GmmParams& gmm, std::uint64_t seed,
                                        const DeltaPrimeOptions& options) {
  if (options.samples < 100'000) {
    throw ConfigError("samples", "delta' estimate needs at least 1e5 draws");
  }
  if (pool_size < 2) throw ConfigError("n", "pool size must be >= 2");
  const auto n = static_cast<std::size_t>(pool_size);
  const auto negatives = sample_conditional_loads(
      calibrated_pcr, gmm, false, options.samples * n, seed,
      options.max_attempts_per_sample, options.workers);
  const auto positives = sample_conditional_loads(
      calibrated_pcr, gmm, true, options.samples, seed,
      options.max_attempts_per_sample, options.workers);
  return delta_prime_from_samples(pool_size, beta_bar, calibrated_pcr, negatives,
                                  positives, options.bootstrap_reps, seed,
                                  options.workers);
}

}  // namespace corrpool
