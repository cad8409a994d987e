#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "corrpool/rng.hpp"
#include "corrpool/viral_model.hpp"

namespace corrpool {

inline constexpr int kMaxHouseholdSize = 6;

/// Distribution of household sizes 1..6; mass on larger households is
/// folded into size 6.
class HouseholdDist {
 public:
  HouseholdDist(std::string name, std::array<double, kMaxHouseholdSize> weights);

  /// Census tables and US variants: US, CN, AUS, FR, US+1, US+2, US-1, US-2.
  static HouseholdDist builtin(const std::string& name);
  static std::vector<std::string> builtin_names();

  const std::string& name() const noexcept { return name_; }
  const std::array<double, kMaxHouseholdSize>& weights() const noexcept {
    return weights_;
  }
  double mean_size() const noexcept;

 private:
  std::string name_;
  std::array<double, kMaxHouseholdSize> weights_;
};

struct Person {
  std::uint32_t household;
  bool infected;
  /// copies/mL; zero iff uninfected.
  double viral_load;
};

struct Household {
  std::uint32_t first;
  std::uint32_t size;
};

struct Population {
  std::vector<Person> persons;
  std::vector<Household> households;
  double alpha = 0.0;
  double sar = 0.0;
  std::string dist_name;

  std::size_t size() const noexcept { return persons.size(); }
  std::size_t infected_count() const noexcept;
};

/// Probability that a household is infected (has an index case) so that the
/// expected fraction of infected persons equals alpha:
///   p_h * E[1 + (H - 1) q] = alpha * E[H].
/// Throws InfeasibleError when the result exceeds one.
double household_infection_prob(double alpha, double sar,
                                const HouseholdDist& dist);

/// Households are drawn until N persons are covered (the last one is cut to
/// fit), infected with probability p_h, given a uniform index case, and then
/// every other member is infected independently with probability q. Every
/// infected person receives an independent mixture viral load.
Population generate_population(std::size_t n_persons, const HouseholdDist& dist,
                               double alpha, double sar, const GmmParams& gmm,
                               Rng& rng);

}  // namespace corrpool
