#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "corrpool/dorfman.hpp"
#include "corrpool/metrics.hpp"
#include "test_helpers.hpp"

using namespace corrpool;
using corrpool::testing::make_population;

TEST_CASE("all-negative population") {
  const auto pop = make_population(std::vector<std::uint32_t>(30, 2));
  Rng rng(1);
  const auto a = assign_naive(pop, 6, rng);
  const auto out = run_dorfman(pop, a, SensitivityFn::realistic(PcrParams{}), rng);
  CHECK(out.pooled_tests == a.pool_count());
  CHECK(out.followup_tests == 0);
  CHECK(out.total_identified == 0);
  for (const auto& p : out.pools) CHECK_FALSE(p.positive);
}

TEST_CASE("step threshold met exactly after dilution") {
  const double u0 = 100.0;
  for (int n : {2, 6, 12}) {
    std::vector<double> loads(n, 0.0);
    loads[0] = n * u0;
    const auto pop = make_population(std::vector<std::uint32_t>(n, 1), loads);
    Rng rng(2);
    const auto a = assign_naive(pop, n, rng);
    const auto out = run_dorfman(pop, a, SensitivityFn::step(u0), rng);
    REQUIRE(out.pools.size() == 1);
    CHECK(out.pools[0].positive);
    CHECK(out.pools[0].individually_positive == 1);
    CHECK(out.total_identified == 1);
    CHECK(out.followup_tests == static_cast<std::uint64_t>(n));
  }
}

TEST_CASE("per-pool invariants hold on random scenarios") {
  Rng rng(3);
  const auto us = HouseholdDist::builtin("US");
  const auto sens = SensitivityFn::realistic(PcrParams{});
  for (int t = 0; t < 200; ++t) {
    const Population pop = generate_population(500, us, 0.05, 0.3, GmmParams::defaults(), rng);
    for (Strategy s : {Strategy::kNaive, Strategy::kCorrelated}) {
      const int n = 2 + static_cast<int>(rng() % 20);
      const auto a = assign_pools(s, pop, n, rng);
      const ProtocolOptions opt{t % 2 == 0};
      const auto out = run_dorfman(pop, a, sens, rng, opt);
      std::uint64_t s_total = 0;
      for (const auto& p : out.pools) {
        CHECK(p.identified <= std::min(p.infected, p.individually_positive));
        CHECK(p.individually_positive <= p.infected);
        if (!p.positive) CHECK(p.identified == 0);
        CHECK(p.followup_tests == (p.positive ? p.size : 0u));
        if (p.infected == 0) CHECK_FALSE(p.positive);
        s_total += p.infected;
      }
      CHECK(s_total == pop.infected_count());
      CHECK(out.total_identified <= out.total_infected);
      CHECK(out.pooled_tests == a.pool_count());
    }
  }
}

TEST_CASE("mismatched assignment is rejected") {
  const auto pop = make_population({2, 2});
  const auto other = make_population({2, 2, 2});
  Rng rng(4);
  const auto a = assign_naive(other, 2, rng);
  CHECK_THROWS(run_dorfman(pop, a, SensitivityFn::step(1.0), rng));
}

TEST_CASE("dilution of the ragged last pool") {
  // Person 0 alone in the last pool of a size-3 assignment with N = 4.
  // Step at u0: load 2 u0 passes when diluted by 1, fails when padded to 3.
  const auto pop = make_population({1, 1, 1, 1}, {200.0, 0.0, 0.0, 0.0});
  const PoolingAssignment a(3, {{1, 2, 3}, {0}});
  Rng rng(5);
  const auto sens = SensitivityFn::step(100.0);
  CHECK(run_dorfman(pop, a, sens, rng).pools[1].positive);
  CHECK_FALSE(run_dorfman(pop, a, sens, rng, ProtocolOptions{true}).pools[1].positive);
  CHECK(run_dorfman(pop, a, sens, rng).pools[1].followup_tests == 1);
}

TEST_CASE("individual outcome is drawn independently of the pooled one") {
  // piecewise theta1 = 0.5 on the one member with load 1; pooled mean 0.5
  // also lands in (0, 2). Joint frequency of (Y, W) must factorize.
  const auto pop = make_population({1, 1}, {1.0, 0.0});
  const PoolingAssignment a(2, {{0, 1}});
  const auto sens = SensitivityFn::piecewise(0.5, 0.7);
  Rng rng(6);
  const int trials = 100'000;
  int y = 0;
  int w = 0;
  int both = 0;
  for (int t = 0; t < trials; ++t) {
    const auto out = run_dorfman(pop, a, sens, rng);
    y += out.pools[0].positive;
    w += out.pools[0].individually_positive;
    both += out.pools[0].identified;
  }
  CHECK(std::abs(y / double(trials) - 0.5) < 0.006);
  CHECK(std::abs(w / double(trials) - 0.5) < 0.006);
  CHECK(std::abs(both / double(trials) - 0.25) < 0.006);
}

TEST_CASE("totals are invariant to pool order") {
  Rng rng(7);
  const Population pop = generate_population(300, HouseholdDist::builtin("US"), 0.1, 0.3,
                                             GmmParams::defaults(), rng);
  std::vector<std::vector<std::uint32_t>> pools;
  const auto a = assign_naive(pop, 5, rng);
  for (std::size_t j = 0; j < a.pool_count(); ++j) {
    pools.emplace_back(a.pool(j).begin(), a.pool(j).end());
  }
  auto reversed = pools;
  std::reverse(reversed.begin(), reversed.end());
  const auto sens = SensitivityFn::step(1e4);
  Rng r1(8);
  Rng r2(8);
  const auto x = run_dorfman(pop, PoolingAssignment(5, pools), sens, r1);
  const auto y = run_dorfman(pop, PoolingAssignment(5, reversed), sens, r2);
  CHECK(x.total_identified == y.total_identified);
  CHECK(x.followup_tests == y.followup_tests);
  CHECK(x.positive_pools == y.positive_pools);
}
