#include "corrpool/population.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "corrpool/errors.hpp"

namespace corrpool {

namespace {

const std::map<std::string, std::array<double, kMaxHouseholdSize>>& tables() {
  static const std::map<std::string, std::array<double, kMaxHouseholdSize>> t = {
      {"US", {0.284, 0.345, 0.151, 0.127, 0.058, 0.035}},
      {"CN", {0.156, 0.272, 0.247, 0.171, 0.089, 0.065}},
      {"AUS", {0.244, 0.334, 0.162, 0.159, 0.067, 0.034}},
      {"FR", {0.364, 0.327, 0.136, 0.115, 0.042, 0.016}},
      {"US+1", {0.209, 0.36, 0.166, 0.142, 0.073, 0.05}},
      {"US+2", {0.134, 0.375, 0.181, 0.157, 0.088, 0.065}},
      {"US-1", {0.359, 0.33, 0.136, 0.112, 0.043, 0.020}},
      {"US-2", {0.434, 0.315, 0.121, 0.097, 0.028, 0.005}},
  };
  return t;
}

}  // namespace

HouseholdDist::HouseholdDist(std::string name,
                             std::array<double, kMaxHouseholdSize> weights)
    : name_(std::move(name)), weights_(weights) {
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw ConfigError("household_dist", "negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ConfigError("household_dist", "weights must sum to 1");
  }
}

HouseholdDist HouseholdDist::builtin(const std::string& name) {
  const auto it = tables().find(name);
  if (it == tables().end()) {
    throw ConfigError("household_dist", "unknown distribution '" + name + "'");
  }
  return HouseholdDist(name, it->second);
}

std::vector<std::string> HouseholdDist::builtin_names() {
  std::vector<std::string> names;
  for (const auto& [name, w] : tables()) names.push_back(name);
  return names;
}

double HouseholdDist::mean_size() const noexcept {
  double m = 0.0;
  for (int h = 0; h < kMaxHouseholdSize; ++h) m += (h + 1) * weights_[h];
  return m;
}

std::size_t Population::infected_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(persons.begin(), persons.end(),
                    [](const Person& p) { return p.infected; }));
}

double household_infection_prob(double alpha, double sar,
                                const HouseholdDist& dist) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha", "prevalence must be in (0, 1)");
  }
  if (!(sar >= 0.0 && sar <= 1.0)) {
    throw ConfigError("sar", "secondary attack rate must be in [0, 1]");
  }
  const double mean_h = dist.mean_size();
  const double p_h = alpha * mean_h / (1.0 + sar * (mean_h - 1.0));
  if (p_h > 1.0) {
    throw InfeasibleError("household infection probability " +
                          std::to_string(p_h) + " exceeds 1");
  }
  return p_h;
}

Population generate_population(std::size_t n_persons, const HouseholdDist& dist,
                               double alpha, double sar, const GmmParams& gmm,
                               Rng& rng) {
  if (n_persons == 0) throw std::invalid_argument("population size must be >= 1");
  const double p_h = household_infection_prob(alpha, sar, dist);

  Population pop;
  pop.alpha = alpha;
  pop.sar = sar;
  pop.dist_name = dist.name();
  pop.persons.reserve(n_persons);

  const auto& w = dist.weights();
  std::discrete_distribution<int> size_dist(w.begin(), w.end());
  std::bernoulli_distribution household_hit(p_h);
  std::bernoulli_distribution secondary(sar);
  GmmSampler loads(gmm);

  while (pop.persons.size() < n_persons) {
    const auto remaining = static_cast<int>(
        std::min<std::size_t>(n_persons - pop.persons.size(), kMaxHouseholdSize));
    const int size = std::min(size_dist(rng) + 1, remaining);
    const auto first = static_cast<std::uint32_t>(pop.persons.size());
    const auto id = static_cast<std::uint32_t>(pop.households.size());
    pop.households.push_back({first, static_cast<std::uint32_t>(size)});

    if (!household_hit(rng)) {
      for (int j = 0; j < size; ++j) pop.persons.push_back({id, false, 0.0});
      continue;
    }
    const int index_case = std::uniform_int_distribution<int>(0, size - 1)(rng);
    for (int j = 0; j < size; ++j) {
      const bool infected = (j == index_case) || secondary(rng);
      pop.persons.push_back({id, infected, infected ? loads.load(rng) : 0.0});
    }
  }
  return pop;
}

}  // namespace corrpool
