#include "corrpool/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "corrpool/errors.hpp"

namespace corrpool {

double MetricsSummary::realized_prevalence() const noexcept {
  return population_size == 0
             ? 0.0
             : static_cast<double>(total_infected) / static_cast<double>(population_size);
}

MetricsSummary compute_metrics(const ProtocolOutcome& outcome) {
  if (outcome.total_identified > outcome.total_infected ||
      outcome.pooled_tests != outcome.pools.size()) {
    throw std::invalid_argument("inconsistent protocol outcome totals");
  }
  MetricsSummary m;
  m.population_size = outcome.population_size;
  m.nominal_pool_size = outcome.nominal_pool_size;
  m.pooled_tests = outcome.pooled_tests;
  m.followup_tests = outcome.followup_tests;
  m.total_infected = outcome.total_infected;
  m.total_identified = outcome.total_identified;
  m.positive_pools = outcome.positive_pools;

  const auto tests = static_cast<double>(m.total_tests());
  const auto found = static_cast<double>(m.total_identified);
  if (m.total_infected > 0) {
    m.sensitivity = found / static_cast<double>(m.total_infected);
  }
  m.efficiency = static_cast<double>(m.population_size) / tests;
  m.gamma = found / tests;
  if (m.total_identified > 0) {
    m.eta = static_cast<double>(m.followup_tests) / found;
  }
  return m;
}

std::optional<double> efficiency_from_identity(const MetricsSummary& m) {
  if (!m.eta || !m.sensitivity) return std::nullopt;
  return 1.0 / (1.0 / m.nominal_pool_size +
                m.realized_prevalence() * *m.eta * *m.sensitivity);
}

double gamma_from_pools(const ProtocolOutcome& outcome) {
  double found = 0.0;
  double tests = 0.0;
  for (const auto& pool : outcome.pools) {
    found += pool.identified;
    tests += 1.0 + (pool.positive ? pool.size : 0.0);
  }
  return found / tests;
}

FprEstimate estimate_fpr(double efficiency, double sensitivity, int pool_size,
                         double alpha, double per_test_fpr) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha", "prevalence must be in (0, 1)");
  }
  if (pool_size < 1 || !(efficiency > 0.0)) {
    throw std::invalid_argument("FPR estimate needs pool size >= 1 and efficiency > 0");
  }
  FprEstimate e;
  e.frac_indiv = 1.0 / efficiency - 1.0 / pool_size;
  e.frac_pos_indiv = alpha * sensitivity;
  e.frac_neg_indiv = e.frac_indiv - e.frac_pos_indiv;
  if (e.frac_neg_indiv < 0.0) {
    e.frac_neg_indiv = 0.0;
    e.floored = true;
  }
  e.frac_neg_indiv_pos = per_test_fpr * e.frac_neg_indiv;
  e.fpr = e.frac_neg_indiv_pos / (1.0 - alpha);
  return e;
}

FprEstimate estimate_fpr(const MetricsSummary& metrics, int pool_size, double alpha,
                         double per_test_fpr) {
  return estimate_fpr(metrics.efficiency, metrics.sensitivity.value_or(0.0),
                      pool_size, alpha, per_test_fpr);
}

void RunningStat::add(double x) noexcept {
  ++count_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);
}

double RunningStat::variance() const noexcept {
  return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
}

double RunningStat::standard_error() const noexcept {
  return count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
}

void MetricsAggregate::add(const MetricsSummary& m) {
  efficiency.add(m.efficiency);
  gamma.add(m.gamma);
  if (m.sensitivity) {
    sensitivity.add(*m.sensitivity);
  } else {
    ++undefined_sensitivity;
  }
  if (m.eta) {
    eta.add(*m.eta);
  } else {
    ++undefined_eta;
  }
}

double MetricsAggregate::objective() const noexcept {
  return sensitivity.count() == 0 ? 0.0 : sensitivity.mean() * efficiency.mean();
}

}  // namespace corrpool
