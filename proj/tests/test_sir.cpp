#include <doctest.h>

#include <cmath>

#include "corrpool/errors.hpp"
#include "corrpool/sir.hpp"

using namespace corrpool;

TEST_CASE("disease-free state is fixed") {
  const SirState s{0.7, 0.0, 0.3, 4};
  const auto n = sir_step(s, {0.3, 0.1}, 0.2, 0.8);
  CHECK(n.s == s.s);
  CHECK(n.i == 0.0);
  CHECK(n.r == s.r);
  CHECK(n.t == 5);
}

TEST_CASE("one step arithmetic") {
  const auto n = sir_step({0.99, 0.01, 0.0, 0}, {0.15, 0.05}, 0.0, 0.9);
  CHECK(n.i - 0.01 == doctest::Approx(9.85e-4).epsilon(1e-12));
  CHECK(n.s == doctest::Approx(0.99 - 0.15 * 0.99 * 0.01));
  CHECK(n.r == doctest::Approx(0.05 * 0.01));
}

TEST_CASE("threshold fixed point") {
  const SirRates rates{0.15, 0.05};
  const double sens = 0.8;
  const double f = (rates.infection - rates.recovery) / sens;
  const auto n = sir_step({1.0 - 1e-9, 1e-9, 0.0, 0}, rates, f, sens);
  CHECK(std::abs(n.i - 1e-9) < 1e-16);
}

TEST_CASE("invalid updates are rejected") {
  CHECK_THROWS(sir_step({0.9, 0.1, 0.0, 0}, {0.1, 0.6}, 1.0, 0.9));
  CHECK_THROWS(sir_step({0.9, 0.1, 0.0, 0}, {-0.1, 0.1}, 0.0, 0.9));
  CHECK_THROWS(sir_step({0.5, 0.1, 0.0, 0}, {0.1, 0.1}, 0.0, 0.9));
  // infection term larger than S
  CHECK_THROWS(sir_step({0.1, 0.9, 0.0, 0}, {2.0, 0.0}, 0.0, 0.9));
}

TEST_CASE("growth factors") {
  const SirRates rates{0.15, 0.05};
  CHECK(growth_factor({1.0, 0.0, 0.0, 0}, rates, 0.1, 0.8) ==
        growth_factor_bound(rates, 0.1, 0.8));
  CHECK(growth_factor_bound(rates, 0.1 / 0.8, 0.8) == doctest::Approx(1.0));
  for (double s : {0.1, 0.5, 0.99}) {
    CHECK(growth_factor({s, 1.0 - s, 0.0, 0}, rates, 0.05, 0.8) <=
          growth_factor_bound(rates, 0.05, 0.8));
  }
  CHECK_THROWS(growth_factor_bound({0.1, 0.0}, 0.0, 0.5));
}

TEST_CASE("critical frequency") {
  CHECK(critical_frequency({0.15, 0.05}, 1.0) == doctest::Approx(0.1));
  CHECK(critical_frequency({0.05, 0.15}, 0.5) == 0.0);
  CHECK(critical_frequency({0.1, 0.1}, 0.5) == 0.0);
  CHECK(critical_frequency({0.15, 0.05}, 0.8) == doctest::Approx(0.125));
  CHECK_THROWS_AS(critical_frequency({0.15, 0.05}, 0.0), InfeasibleError);
}

TEST_CASE("monotone threshold by simulation") {
  const SirRates rates{0.15, 0.05};
  const double fs = critical_frequency(rates, 0.8);
  const auto above = simulate_sir({0.999, 0.001, 0.0, 0}, rates, fs * 1.001, 0.8, 500);
  for (std::size_t t = 1; t < above.size(); ++t) CHECK(above[t].i <= above[t - 1].i);
  const auto below = simulate_sir({0.999999, 0.000001, 0.0, 0}, rates, fs * 0.9, 0.8, 20);
  for (std::size_t t = 1; t < below.size(); ++t) CHECK(below[t].i > below[t - 1].i);
}

TEST_CASE("conservation over 1e4 steps") {
  const auto path = simulate_sir({0.99, 0.01, 0.0, 0}, {0.3, 0.05}, 0.1, 0.85, 10000);
  CHECK(path.size() == 10001);
  double worst = 0.0;
  for (const auto& s : path) worst = std::max(worst, std::abs(s.s + s.i + s.r - 1.0));
  CHECK(worst < 1e-9);
  CHECK(path.back().t == 10000);
}

TEST_CASE("consumption reduction") {
  CHECK(consumption_reduction(4.56, 5.23) == doctest::Approx(0.1281).epsilon(1e-3));
  CHECK(std::abs(consumption_reduction(4.56, 5.23) - 0.129) < 0.002);
  CHECK(consumption_reduction(3.0, 3.0) == 0.0);
  CHECK(std::abs(consumption_reduction(13.52, 15.86) - 0.148) < 0.001);
  CHECK_THROWS(consumption_reduction(0.0, 1.0));
}

TEST_CASE("single candidate and tie-break") {
  ScenarioConfig c;
  c.alphas = {0.05};
  c.population_size = 600;
  c.replications = 20;
  c.sensitivity_variant = SensitivityVariant::kStep;
  const auto scenario = resolve_scenario(c);
  const auto one = optimize_pool_size(scenario, {6});
  REQUIRE(one.size() == 2);
  for (const auto& p : one) CHECK(p.pool_size == 6);
  CHECK_THROWS_AS(optimize_pool_size(scenario, {}), ConfigError);
  // a duplicated candidate ties with itself; the winner is still one of them
  const auto dup = optimize_pool_size(scenario, {4, 4});
  CHECK(dup[0].pool_size == 4);
  CHECK(dup[0].relative_consumption == doctest::Approx(1.0 / dup[0].objective));
  CHECK_FALSE(dup[0].f_star);

  c.b_infection = 0.15;
  c.b_recovery = 0.05;
  const auto with_rates = optimize_pool_size(resolve_scenario(c), {4});
  REQUIRE(with_rates[0].f_star);
  CHECK(*with_rates[0].f_star == doctest::Approx(0.1 / with_rates[0].sensitivity));
}

TEST_CASE("policy at high prevalence") {
  ScenarioConfig c;
  c.alphas = {0.1};
  c.replications = 500;
  const auto policy = optimize_pool_size(resolve_scenario(c), {2, 4, 6});
  for (const auto& p : policy) CHECK(p.pool_size == 4);
}
