#pragma once

#include <random>
#include <vector>

#include "corrpool/rng.hpp"

namespace corrpool {

/// One Gaussian component of the mixture on log10 viral load (copies/mL).
struct GmmComponent {
  double weight;
  double mu;
  double sigma;
};

/// Mixture model for log10 viral load among infected individuals.
///
/// Defaults are the uncensored fit converted from the Ct scale:
/// (0.33, 8.09, 1.06), (0.54, 5.35, 0.89), (0.13, 3.75, 0.39).
class GmmParams {
 public:
  explicit GmmParams(std::vector<GmmComponent> components);

  static GmmParams defaults();

  const std::vector<GmmComponent>& components() const noexcept {
    return components_;
  }

  double mean() const noexcept;
  double variance() const noexcept;
  /// Analytic mixture CDF on the log10 scale.
  double cdf(double log10_load) const noexcept;

 private:
  std::vector<GmmComponent> components_;
};

/// Cobas-assay conversion: log10 VL = (14 + log10 1.105) - (0.681 / ln 10) Ct.
double ct_to_log10_viral_load(double ct) noexcept;

double sample_infected_log10_viral_load(const GmmParams& params, Rng& rng);

/// Reusable sampler for hot loops; holds the categorical and per-component
/// normal distributions so they are not rebuilt per draw.
class GmmSampler {
 public:
  explicit GmmSampler(const GmmParams& params);

  double log10_load(Rng& rng);
  /// Linear copies/mL, i.e. 10^log10_load.
  double load(Rng& rng);

 private:
  std::discrete_distribution<int> pick_;
  std::vector<std::normal_distribution<double>> normals_;
};

}  // namespace corrpool
