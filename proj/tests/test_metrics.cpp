#include <doctest.h>

#include <cmath>

#include "corrpool/metrics.hpp"
#include "test_helpers.hpp"

using namespace corrpool;

namespace {

ProtocolOutcome synthetic(std::size_t n_persons, int n, std::uint64_t pooled,
                          std::uint64_t followup, std::uint64_t s, std::uint64_t d) {
  ProtocolOutcome o;
  o.population_size = n_persons;
  o.nominal_pool_size = n;
  o.pooled_tests = pooled;
  o.followup_tests = followup;
  o.total_infected = s;
  o.total_identified = d;
  o.pools.resize(pooled);
  return o;
}

}  // namespace

TEST_CASE("definitional arithmetic") {
  const auto m = compute_metrics(synthetic(600, 6, 100, 30, 12, 10));
  REQUIRE(m.sensitivity);
  CHECK(*m.sensitivity == doctest::Approx(10.0 / 12.0));
  CHECK(m.efficiency == doctest::Approx(600.0 / 130.0));
  CHECK(m.efficiency == doctest::Approx(4.615).epsilon(1e-3));
  REQUIRE(m.eta);
  CHECK(*m.eta == doctest::Approx(3.0));
  CHECK(m.gamma == doctest::Approx(10.0 / 130.0));
}

TEST_CASE("all-negative outcome") {
  const auto m = compute_metrics(synthetic(600, 6, 100, 0, 0, 0));
  CHECK_FALSE(m.sensitivity);
  CHECK_FALSE(m.eta);
  CHECK(m.efficiency == 6.0);
  const auto f = estimate_fpr(m, 6, 0.01);
  CHECK(f.frac_indiv == doctest::Approx(0.0));
  CHECK(f.fpr == doctest::Approx(0.0));
}

TEST_CASE("inconsistent totals are rejected") {
  CHECK_THROWS(compute_metrics(synthetic(600, 6, 100, 0, 3, 5)));
}

TEST_CASE("FPR pipeline on published metrics") {
  const auto c = estimate_fpr(4.83, 0.86, 6, 0.01);
  CHECK(std::abs(c.fpr - 3.20e-6) / 3.20e-6 < 0.01);
  const auto n = estimate_fpr(4.67, 0.819, 6, 0.01);
  CHECK(std::abs(n.fpr - 3.97e-6) / 3.97e-6 < 0.01);
  CHECK(n.frac_indiv == doctest::Approx(1.0 / 4.67 - 1.0 / 6.0));
  CHECK(n.frac_pos_indiv == doctest::Approx(0.00819));
  CHECK_FALSE(n.floored);

  const auto floored = estimate_fpr(5.99, 0.9, 6, 0.05);
  CHECK(floored.floored);
  CHECK(floored.fpr == 0.0);
  CHECK_THROWS(estimate_fpr(4.0, 0.8, 6, 0.0));
}

TEST_CASE("efficiency and gamma identities on simulated tallies") {
  Rng rng(11);
  const auto sens = SensitivityFn::realistic(PcrParams{});
  for (int t = 0; t < 100; ++t) {
    const Population pop = generate_population(1200, HouseholdDist::builtin("US"), 0.03,
                                               0.166, GmmParams::defaults(), rng);
    for (Strategy s : {Strategy::kNaive, Strategy::kCorrelated}) {
      const auto a = assign_pools(s, pop, 6, rng);
      const auto out = run_dorfman(pop, a, sens, rng);
      const auto m = compute_metrics(out);
      CHECK(m.gamma == doctest::Approx(gamma_from_pools(out)).epsilon(1e-12));
      CHECK(m.efficiency > 0.0);
      CHECK(m.efficiency <= 6.0);
      if (const auto e = efficiency_from_identity(m)) {
        CHECK(std::abs(*e - m.efficiency) < 1e-9);
      }
    }
  }
}

TEST_CASE("running statistics") {
  RunningStat s;
  for (double x : {1.0, 2.0, 3.0, 4.0}) s.add(x);
  CHECK(s.count() == 4);
  CHECK(s.mean() == doctest::Approx(2.5));
  CHECK(s.variance() == doctest::Approx(5.0 / 3.0));
  CHECK(s.standard_error() == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));

  MetricsAggregate agg;
  agg.add(compute_metrics(synthetic(600, 6, 100, 30, 12, 10)));
  agg.add(compute_metrics(synthetic(600, 6, 100, 0, 0, 0)));
  CHECK(agg.undefined_sensitivity == 1);
  CHECK(agg.sensitivity.count() == 1);
  CHECK(agg.efficiency.count() == 2);
  CHECK(agg.objective() == doctest::Approx(10.0 / 12.0 * (600.0 / 130.0 + 6.0) / 2.0));
}
