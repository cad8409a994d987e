#include <doctest.h>

#include <cmath>
#include <vector>

#include "corrpool/errors.hpp"
#include "corrpool/population.hpp"

using namespace corrpool;

TEST_CASE("built-in household tables") {
  const auto us = HouseholdDist::builtin("US");
  const std::array<double, 6> w{0.284, 0.345, 0.151, 0.127, 0.058, 0.035};
  CHECK(us.weights() == w);
  CHECK(us.mean_size() == doctest::Approx(2.435).epsilon(1e-12));
  for (const auto& name : HouseholdDist::builtin_names()) {
    CHECK_NOTHROW(HouseholdDist::builtin(name));
  }
  CHECK(HouseholdDist::builtin_names().size() == 8);
  CHECK_THROWS_AS(HouseholdDist::builtin("XX"), ConfigError);
  CHECK_THROWS_AS(HouseholdDist("bad", {0.5, 0.5, 0.1, 0, 0, 0}), ConfigError);
}

TEST_CASE("household infection probability") {
  const auto us = HouseholdDist::builtin("US");
  const double ph = household_infection_prob(0.01, 0.166, us);
  // alpha E[H] / (1 + q (E[H] - 1)), see tests/oracle/oracles.py
  CHECK(ph == doctest::Approx(0.019665484853134768).epsilon(1e-12));
  CHECK(ph * (1.0 + 0.166 * (us.mean_size() - 1.0)) ==
        doctest::Approx(0.01 * us.mean_size()).epsilon(1e-12));
  const HouseholdDist single("single", {1, 0, 0, 0, 0, 0});
  CHECK(household_infection_prob(0.03, 0.7, single) == doctest::Approx(0.03));
  CHECK_THROWS_AS(household_infection_prob(0.6, 0.0, us), InfeasibleError);
  CHECK_THROWS_AS(household_infection_prob(0.0, 0.1, us), ConfigError);
  CHECK_THROWS_AS(household_infection_prob(0.01, 1.5, us), ConfigError);
}

TEST_CASE("population structure") {
  const auto us = HouseholdDist::builtin("US");
  const auto g = GmmParams::defaults();
  Rng rng(4);
  for (std::size_t n : {1u, 7u, 1000u, 12000u}) {
    const Population pop = generate_population(n, us, 0.05, 0.3, g, rng);
    CHECK(pop.size() == n);
    std::size_t covered = 0;
    for (std::size_t h = 0; h < pop.households.size(); ++h) {
      const auto& hh = pop.households[h];
      CHECK(hh.first == covered);
      CHECK(hh.size >= 1);
      CHECK(hh.size <= 6);
      for (std::uint32_t k = hh.first; k < hh.first + hh.size; ++k) {
        CHECK(pop.persons[k].household == h);
      }
      covered += hh.size;
    }
    CHECK(covered == n);
    for (const auto& p : pop.persons) CHECK(p.infected == (p.viral_load > 0.0));
  }
}

TEST_CASE("vanishing prevalence") {
  Rng rng(8);
  const Population pop = generate_population(1000, HouseholdDist::builtin("US"), 1e-9,
                                             0.166, GmmParams::defaults(), rng);
  CHECK(pop.infected_count() == 0);
}

TEST_CASE("mean prevalence over replications") {
  const auto us = HouseholdDist::builtin("US");
  const auto g = GmmParams::defaults();
  double total = 0.0;
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_stream(42, r, StreamTag::kPopulation);
    total += generate_population(12000, us, 0.01, 0.166, g, rng).infected_count() / 12000.0;
  }
  CHECK(std::abs(total / reps - 0.01) <= 0.0005);
}

TEST_CASE("secondary infections are Binomial(h - 1, q)") {
  const auto us = HouseholdDist::builtin("US");
  Rng rng(13);
  const double q = 0.3;
  std::array<double, 7> sum{};
  std::array<double, 7> sumsq{};
  std::array<int, 7> count{};
  int infected_households = 0;
  while (infected_households < 100'000) {
    const Population pop = generate_population(20000, us, 0.2, q, GmmParams::defaults(), rng);
    for (std::size_t h = 0; h + 1 < pop.households.size(); ++h) {
      const auto& hh = pop.households[h];
      int k = 0;
      for (std::uint32_t i = hh.first; i < hh.first + hh.size; ++i) k += pop.persons[i].infected;
      if (k == 0) continue;
      ++infected_households;
      sum[hh.size] += k - 1;
      sumsq[hh.size] += double(k - 1) * (k - 1);
      ++count[hh.size];
    }
  }
  for (int h = 2; h <= 6; ++h) {
    const double m = sum[h] / count[h];
    const double var = sumsq[h] / count[h] - m * m;
    CHECK(std::abs(m - (h - 1) * q) < 3.0 * std::sqrt(var / count[h]) + 1e-12);
  }
}

TEST_CASE("independence across households") {
  // persons in adjacent distinct households: covariance of infection flags ~ 0
  const auto us = HouseholdDist::builtin("US");
  Rng rng(21);
  double sx = 0, sy = 0, sxy = 0;
  int n = 0;
  for (int r = 0; r < 40; ++r) {
    const Population pop = generate_population(12000, us, 0.1, 0.5, GmmParams::defaults(), rng);
    for (std::size_t h = 0; h + 1 < pop.households.size(); h += 2) {
      const double x = pop.persons[pop.households[h].first].infected;
      const double y = pop.persons[pop.households[h + 1].first].infected;
      sx += x;
      sy += y;
      sxy += x * y;
      ++n;
    }
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double px = sx / n;
  const double py = sy / n;
  const double se = std::sqrt(px * (1 - px) * py * (1 - py) / n);
  CHECK(std::abs(cov) < 3.0 * se);
}
