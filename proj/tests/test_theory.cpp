#include <doctest.h>

#include <cmath>

#include "corrpool/errors.hpp"
#include "corrpool/theory.hpp"

using namespace corrpool;

namespace {

void check_equal(const CounterexampleResult& a, const CounterexampleResult& b, double tol) {
  CHECK(std::abs(a.beta0 - b.beta0) <= tol);
  CHECK(std::abs(a.beta1 - b.beta1) <= tol);
  CHECK(std::abs(a.ey0 - b.ey0) <= tol);
  CHECK(std::abs(a.ey1 - b.ey1) <= tol);
  CHECK(std::abs(a.eta0 - b.eta0) <= tol);
  CHECK(std::abs(a.eta1 - b.eta1) <= tol);
  CHECK(std::abs(a.eff0 - b.eff0) <= tol);
  CHECK(std::abs(a.eff1 - b.eff1) <= tol);
}

}  // namespace

TEST_CASE("closed form at a reference point") {
  // exact rational enumeration, tests/oracle/oracles.py
  const auto r = counterexample_closed_form(0.2, 0.9, 0.01);
  CHECK(r.beta1 == doctest::Approx(0.495).epsilon(1e-12));
  CHECK(r.beta0 == doctest::Approx(0.8031).epsilon(1e-12));
  CHECK(r.ey0 == doctest::Approx(0.0040525).epsilon(1e-12));
  CHECK(r.ey1 == doctest::Approx(0.0065).epsilon(1e-12));
  CHECK(r.eta0 == doctest::Approx(2.058151345860843).epsilon(1e-12));
  CHECK(r.eta1 == doctest::Approx(1.2871287128712872).epsilon(1e-12));
  CHECK(r.eff0 == doctest::Approx(1.9839203257597176).epsilon(1e-12));
  CHECK(r.eff1 == doctest::Approx(1.9743336623889438).epsilon(1e-12));
}

TEST_CASE("perfect-test limit") {
  const auto r = counterexample_closed_form(1.0 - 1e-9, 1.0 - 1e-10, 0.01);
  CHECK(r.beta1 < 1e-8);
}

TEST_CASE("argument validation") {
  CHECK_THROWS(counterexample_closed_form(0.5, 0.4, 0.01));
  CHECK_THROWS(counterexample_closed_form(0.0, 0.4, 0.01));
  CHECK_THROWS(counterexample_closed_form(0.2, 1.0, 0.01));
  CHECK_THROWS(counterexample_enumerate(0.2, 0.9, 0.7));
  CHECK_THROWS(counterexample_enumerate(0.2, 0.9, 0.0));
}

TEST_CASE("closed form equals enumeration on a 20x20 grid") {
  for (double alpha : {0.001, 0.01, 0.1, 0.5}) {
    for (int i = 1; i <= 20; ++i) {
      for (int j = i + 1; j <= 21; ++j) {
        const double t1 = i / 22.0;
        const double t2 = j / 22.0;
        check_equal(counterexample_closed_form(t1, t2, alpha),
                    counterexample_enumerate(t1, t2, alpha), 1e-12);
      }
    }
  }
}

TEST_CASE("regions A and B") {
  const auto p = counterexample_enumerate(0.05, 0.95, 0.01);
  CHECK(p.eff1 < p.eff0);
  CHECK(p.eff1 == doctest::Approx(1.979218208807521).epsilon(1e-12));
  CHECK(p.eff0 == doctest::Approx(1.9956644190496147).epsilon(1e-12));
  const auto cells = scan_counterexample(50, 0.01);
  CHECK(cells.size() == 50 * 49 / 2);
  int a = 0;
  int b = 0;
  for (const auto& c : cells) {
    a += c.eff_diff() < 0.0;
    b += c.eta_ratio() > 1.0;
    CHECK(c.theta1 < c.theta2);
  }
  CHECK(a > 0);
  CHECK(b > 0);
}

TEST_CASE("quantiles and bootstrap") {
  const std::vector<double> s{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(sorted_quantile(s, 0.0) == 1.0);
  CHECK(sorted_quantile(s, 1.0) == 5.0);
  CHECK(sorted_quantile(s, 0.5) == 3.0);
  CHECK(sorted_quantile(s, 0.125) == doctest::Approx(1.5));

  // normal data: percentile interval close to mean +- 1.96 sd / sqrt(n)
  Rng rng(1);
  std::normal_distribution<double> nd(10.0, 2.0);
  std::vector<double> x(20000);
  for (auto& v : x) v = nd(rng);
  const auto ci = bootstrap_mean_interval(x, 2000, 0.95, 7);
  const double half = 1.96 * 2.0 / std::sqrt(20000.0);
  double mean = 0;
  for (double v : x) mean += v;
  mean /= x.size();
  CHECK(ci.low < mean);
  CHECK(ci.high > mean);
  CHECK(std::abs((ci.high - ci.low) / 2 - half) < 0.1 * half);
  // same seed, any worker count
  const auto again = bootstrap_mean_interval(x, 2000, 0.95, 7, 3);
  CHECK(again.low == ci.low);
  CHECK(again.high == ci.high);
}

TEST_CASE("conditional samplers") {
  PcrParams pcr;
  const auto gmm = GmmParams::defaults();
  Rng cal(3);
  pcr.detection_threshold = calibrate_tau(0.05, pcr, gmm, cal).tau;
  const auto neg = sample_conditional_loads(pcr, gmm, false, 20000, 9);
  const auto pos = sample_conditional_loads(pcr, gmm, true, 20000, 9);
  REQUIRE(neg.size() == 20000);
  REQUIRE(pos.size() == 20000);
  double pn = 0.0;
  double pp = 0.0;
  for (double v : neg) pn += success_probability(pcr, v, 1);
  for (double v : pos) pp += success_probability(pcr, v, 1);
  // negatives concentrate where p is small, positives where it is large
  CHECK(pn / neg.size() < 0.2);
  CHECK(pp / pos.size() > 0.9);
  // attempt cap: a tiny cap returns fewer draws
  CHECK(sample_conditional_loads(pcr, gmm, false, 1000, 9, 1.0).size() < 1000);
  // worker-count independence
  CHECK(sample_conditional_loads(pcr, gmm, true, 70000, 4, 1000.0, 1) ==
        sample_conditional_loads(pcr, gmm, true, 70000, 4, 1000.0, 3));
}

TEST_CASE("delta' decreases in n at fixed beta_bar") {
  PcrParams pcr;
  const auto gmm = GmmParams::defaults();
  for (double beta : {0.05, 0.1}) {
    Rng cal(5);
    pcr.detection_threshold = calibrate_tau(beta, pcr, gmm, cal).tau;
    const std::size_t b = 100'000;
    const auto neg = sample_conditional_loads(pcr, gmm, false, 12 * b, 21);
    const auto pos = sample_conditional_loads(pcr, gmm, true, b, 21);
    double prev = INFINITY;
    for (int n : {2, 4, 6, 12}) {
      const auto e = delta_prime_from_samples(n, beta, pcr, neg, pos, 200, 8);
      CHECK(e.delta_prime_hat >= 0.0);
      CHECK(e.delta_prime_hat < prev);
      CHECK(e.ci_low <= e.delta_prime_hat);
      CHECK(e.delta_prime_hat <= e.ci_high);
      CHECK(e.x_samples == b);
      CHECK(e.z_samples == b);
      CHECK(e.delta_prime_hat ==
            doctest::Approx(e.x_bar / e.z_bar * beta / (1 - beta)).epsilon(1e-12));
      prev = e.delta_prime_hat;
    }
  }
}

TEST_CASE("delta' estimator preconditions") {
  PcrParams pcr;
  const auto gmm = GmmParams::defaults();
  DeltaPrimeOptions opt;
  opt.samples = 1000;
  CHECK_THROWS_AS(estimate_delta_prime(2, 0.05, pcr, gmm, 1, opt), ConfigError);
  const std::vector<double> few{1.0};
  CHECK_THROWS_AS(delta_prime_from_samples(2, 0.05, pcr, few, few, 100, 1), InfeasibleError);
}
