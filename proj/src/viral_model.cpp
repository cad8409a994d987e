#include "corrpool/viral_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace corrpool {

GmmParams::GmmParams(std::vector<GmmComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw std::invalid_argument("GMM needs at least one component");
  }
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0 && c.weight <= 1.0)) {
      throw std::invalid_argument("GMM weight outside [0,1]");
    }
    if (!(c.sigma > 0.0) || !std::isfinite(c.mu)) {
      throw std::invalid_argument("GMM component needs finite mu and sigma > 0");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("GMM weights sum to " + std::to_string(total) +
                                ", expected 1");
  }
}

GmmParams GmmParams::defaults() {
  return GmmParams({{0.33, 8.09, 1.06}, {0.54, 5.35, 0.89}, {0.13, 3.75, 0.39}});
}

double GmmParams::mean() const noexcept {
  double m = 0.0;
  for (const auto& c : components_) m += c.weight * c.mu;
  return m;
}

double GmmParams::variance() const noexcept {
  double second = 0.0;
  for (const auto& c : components_) {
    second += c.weight * (c.sigma * c.sigma + c.mu * c.mu);
  }
  const double m = mean();
  return second - m * m;
}

double GmmParams::cdf(double log10_load) const noexcept {
  double f = 0.0;
  for (const auto& c : components_) {
    f += c.weight * 0.5 *
         std::erfc(-(log10_load - c.mu) / (c.sigma * std::numbers::sqrt2));
  }
  return f;
}

double ct_to_log10_viral_load(double ct) noexcept {
  return (14.0 + std::log10(1.105)) - (0.681 / std::numbers::ln10) * ct;
}

double sample_infected_log10_viral_load(const GmmParams& params, Rng& rng) {
  GmmSampler sampler(params);
  return sampler.log10_load(rng);
}

GmmSampler::GmmSampler(const GmmParams& params) {
  std::vector<double> weights;
  for (const auto& c : params.components()) {
    weights.push_back(c.weight);
    normals_.emplace_back(c.mu, c.sigma);
  }
  pick_ = std::discrete_distribution<int>(weights.begin(), weights.end());
}

double GmmSampler::log10_load(Rng& rng) {
  const int k = pick_(rng);
  return normals_[static_cast<std::size_t>(k)](rng);
}

double GmmSampler::load(Rng& rng) { return std::pow(10.0, log10_load(rng)); }

}  // namespace corrpool
