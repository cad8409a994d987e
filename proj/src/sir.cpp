#include "corrpool/sir.hpp"

#include <cmath>
#include <stdexcept>

#include "corrpool/errors.hpp"

namespace corrpool {

namespace {

void check_rates(const SirRates& rates, double frequency, double sensitivity) {
  if (!(rates.infection >= 0.0 && rates.recovery >= 0.0)) {
    throw std::invalid_argument("SIR rates must be >= 0");
  }
  if (!(frequency >= 0.0)) throw std::invalid_argument("screening frequency must be >= 0");
  if (!(sensitivity >= 0.0 && sensitivity <= 1.0)) {
    throw std::invalid_argument("sensitivity must be in [0, 1]");
  }
  if (frequency * sensitivity + rates.recovery > 1.0) {
    throw std::invalid_argument("daily removal fraction exceeds one");
  }
}

void check_state(const SirState& s) {
  const auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in01(s.s) || !in01(s.i) || !in01(s.r) ||
      std::abs(s.s + s.i + s.r - 1.0) > 1e-9) {
    throw std::invalid_argument("SIR state must be fractions summing to 1");
  }
}

}  // namespace

SirState sir_step(const SirState& state, const SirRates& rates, double frequency,
                  double sensitivity) {
  check_rates(rates, frequency, sensitivity);
  check_state(state);
  const double infections = rates.infection * state.s * state.i;
  const double removals = (rates.recovery + frequency * sensitivity) * state.i;
  SirState next;
  next.s = state.s - infections;
  next.i = state.i + infections - removals;
  next.r = state.r + removals;
  next.t = state.t + 1;
  if (next.s < 0.0 || next.i < 0.0) {
    throw std::domain_error("SIR update drives a compartment negative");
  }
  return next;
}

std::vector<SirState> simulate_sir(const SirState& initial, const SirRates& rates,
                                   double frequency, double sensitivity, int days) {
  if (days < 0) throw std::invalid_argument("days must be >= 0");
  std::vector<SirState> path;
  path.reserve(static_cast<std::size_t>(days) + 1);
  path.push_back(initial);
  for (int d = 0; d < days; ++d) {
    path.push_back(sir_step(path.back(), rates, frequency, sensitivity));
  }
  return path;
}

double growth_factor(const SirState& state, const SirRates& rates, double frequency,
                     double sensitivity) {
  const double denom = rates.recovery + frequency * sensitivity;
  if (!(denom > 0.0)) throw std::invalid_argument("removal rate is zero");
  return rates.infection * state.s / denom;
}

double growth_factor_bound(const SirRates& rates, double frequency, double sensitivity) {
  return growth_factor(SirState{1.0, 0.0, 0.0, 0}, rates, frequency, sensitivity);
}

double critical_frequency(const SirRates& rates, double sensitivity) {
  if (!(rates.infection >= 0.0 && rates.recovery >= 0.0)) {
    throw std::invalid_argument("SIR rates must be >= 0");
  }
  if (rates.infection <= rates.recovery) return 0.0;
  if (!(sensitivity > 0.0)) {
    throw InfeasibleError("zero sensitivity: screening cannot control the epidemic");
  }
  return (rates.infection - rates.recovery) / sensitivity;
}

double consumption_reduction(double objective_naive, double objective_correlated) {
  if (!(objective_naive > 0.0 && objective_correlated > 0.0)) {
    throw std::invalid_argument("objectives must be > 0");
  }
  return 1.0 - objective_naive / objective_correlated;
}

std::vector<PolicyResult> optimize_pool_size(const ResolvedScenario& scenario,
                                             const std::vector<int>& candidates,
                                             const RunOptions& options) {
  if (candidates.empty()) throw ConfigError("candidates", "no candidate pool sizes");
  const ScenarioConfig& c = scenario.config;
  const double alpha = c.alphas.at(0);
  std::vector<PolicyResult> results;
  for (Strategy s : c.strategies) {
    PolicyResult p;
    p.strategy = s;
    results.push_back(p);
  }
  for (int n : candidates) {
    if (n < 2 || static_cast<std::size_t>(n) > c.population_size) {
      throw ConfigError("candidates", "pool size out of range");
    }
    const CellResult cell = run_cell(scenario, alpha, n, options);
    for (std::size_t si = 0; si < results.size(); ++si) {
      const MetricsAggregate& m = cell.strategies[si].metrics;
      results[si].candidates.push_back(
          {n, m.sensitivity.mean(), m.efficiency.mean(), m.objective()});
    }
  }
  for (PolicyResult& p : results) {
    const CandidateScore* best = nullptr;
    for (const CandidateScore& cs : p.candidates) {
      if (!best || cs.objective > best->objective ||
          (cs.objective == best->objective && cs.pool_size < best->pool_size)) {
        best = &cs;
      }
    }
    p.pool_size = best->pool_size;
    p.sensitivity = best->sensitivity;
    p.efficiency = best->efficiency;
    p.objective = best->objective;
    if (!(p.objective > 0.0)) {
      throw InfeasibleError("no candidate pool size detects any infection");
    }
    p.relative_consumption = 1.0 / p.objective;
    if (c.b_infection && c.b_recovery) {
      p.f_star = critical_frequency({*c.b_infection, *c.b_recovery}, p.sensitivity);
    }
  }
  return results;
}

}  // namespace corrpool
