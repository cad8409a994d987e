#include "corrpool/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "corrpool/dorfman.hpp"
#include "corrpool/errors.hpp"
#include "corrpool/parallel.hpp"

namespace corrpool {

using nlohmann::json;

std::string to_string(SensitivityVariant v) {
  switch (v) {
    case SensitivityVariant::kRealistic: return "realistic";
    case SensitivityVariant::kStep: return "step";
    case SensitivityVariant::kPiecewise: return "piecewise";
  }
  return "realistic";
}

SensitivityVariant parse_sensitivity_variant(const std::string& name) {
  if (name == "realistic") return SensitivityVariant::kRealistic;
  if (name == "step") return SensitivityVariant::kStep;
  if (name == "piecewise") return SensitivityVariant::kPiecewise;
  throw ConfigError("sensitivity_variant", "unknown variant '" + name + "'");
}

namespace {

double get_number(const json& v, const char* field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& v, const char* field) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  throw ConfigError(field, "expected an integer");
}

std::size_t get_count(const json& v, const char* field) {
  const std::int64_t x = get_integer(v, field);
  if (x < 0) throw ConfigError(field, "must be non-negative");
  return static_cast<std::size_t>(x);
}

bool get_bool(const json& v, const char* field) {
  if (!v.is_boolean()) throw ConfigError(field, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const char* field) {
  if (!v.is_string()) throw ConfigError(field, "expected a string");
  return v.get<std::string>();
}

HouseholdDist parse_household(const json& v) {
  std::string name = "custom";
  json weights;
  if (v.is_string()) return HouseholdDist::builtin(v.get<std::string>());
  if (v.is_array()) {
    weights = v;
  } else if (v.is_object()) {
    for (const auto& [key, val] : v.items()) {
      if (key == "name") name = get_string(val, "household_dist.name");
      else if (key == "weights") weights = val;
      else throw ConfigError("household_dist." + key, "unknown key");
    }
    if (weights.is_null()) return HouseholdDist::builtin(name);
  } else {
    throw ConfigError("household_dist", "expected a name, weights or object");
  }
  if (!weights.is_array() || weights.size() != kMaxHouseholdSize) {
    throw ConfigError("household_dist", "weights must list sizes 1..6");
  }
  std::array<double, kMaxHouseholdSize> w{};
  double total = 0.0;
  for (int i = 0; i < kMaxHouseholdSize; ++i) {
    w[i] = get_number(weights[i], "household_dist");
    if (!(w[i] >= 0.0)) throw ConfigError("household_dist", "negative weight");
    total += w[i];
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw ConfigError("household_dist", "weights must sum to 1");
  }
  if (std::abs(total - 1.0) <= 1e-12) return HouseholdDist(name, w);
  for (double& x : w) x /= total;
  // Renormalization can still leave an ulp of error.
  double rest = 1.0;
  for (int i = 0; i + 1 < kMaxHouseholdSize; ++i) rest -= w[i];
  w[kMaxHouseholdSize - 1] = std::max(0.0, rest);
  return HouseholdDist(name, w);
}

GmmParams parse_gmm(const json& v) {
  if (!v.is_array() || v.empty()) {
    throw ConfigError("gmm", "expected a non-empty list of components");
  }
  std::vector<GmmComponent> comps;
  for (const auto& c : v) {
    if (!c.is_object()) throw ConfigError("gmm", "component must be an object");
    GmmComponent g{0.0, 0.0, 0.0};
    std::set<std::string> seen;
    for (const auto& [key, val] : c.items()) {
      if (key == "weight") g.weight = get_number(val, "gmm.weight");
      else if (key == "mu") g.mu = get_number(val, "gmm.mu");
      else if (key == "sigma") g.sigma = get_number(val, "gmm.sigma");
      else throw ConfigError("gmm." + key, "unknown key");
      seen.insert(key);
    }
    if (seen.size() != 3) throw ConfigError("gmm", "components need weight, mu, sigma");
    comps.push_back(g);
  }
  try {
    return GmmParams(std::move(comps));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("gmm", e.what());
  }
}

void parse_pcr(PcrParams& pcr, const json& v) {
  if (!v.is_object()) throw ConfigError("pcr", "expected an object");
  for (const auto& [key, val] : v.items()) {
    if (key == "sample_volume_ml") pcr.sample_volume_ml = get_number(val, "pcr.sample_volume_ml");
    else if (key == "subsample_volume_ul") pcr.subsample_volume_ul = get_number(val, "pcr.subsample_volume_ul");
    else if (key == "binding_efficiency") pcr.binding_efficiency = get_number(val, "pcr.binding_efficiency");
    else throw ConfigError("pcr." + key, "unknown key");
  }
}

template <typename T, typename F>
std::vector<T> scalar_or_list(const json& v, const char* field, F convert) {
  std::vector<T> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(convert(x, field));
  } else {
    out.push_back(convert(v, field));
  }
  return out;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (alphas.empty()) throw ConfigError("alpha", "grid is empty");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("alpha", "prevalence must be in (0, 1)");
  }
  if (!(sar >= 0.0 && sar <= 1.0)) {
    throw ConfigError("sar", "secondary attack rate must be in [0, 1]");
  }
  if (population_size < 1 || population_size > 0xFFFFFFFFu) {
    throw ConfigError("population_size", "must be in [1, 2^32)");
  }
  if (pool_sizes.empty()) throw ConfigError("pool_size", "grid is empty");
  for (int n : pool_sizes) {
    if (n < 2) throw ConfigError("pool_size", "must be >= 2");
    if (static_cast<std::size_t>(n) > population_size) {
      throw ConfigError("pool_size", "exceeds population_size");
    }
  }
  if (tau && beta_bar) throw ConfigError("tau", "give either tau or beta_bar, not both");
  if (tau && *tau < 1) throw ConfigError("tau", "must be a positive integer");
  if (beta_bar && !(*beta_bar > 0.0 && *beta_bar <= 0.5)) {
    throw ConfigError("beta_bar", "must be in (0, 0.5]");
  }
  switch (sensitivity_variant) {
    case SensitivityVariant::kRealistic:
      if (!tau && !beta_bar) throw ConfigError("beta_bar", "realistic test needs beta_bar or tau");
      break;
    case SensitivityVariant::kStep:
      if (step_threshold && !(*step_threshold > 0.0)) {
        throw ConfigError("step_threshold", "must be > 0");
      }
      if (!step_threshold && !beta_bar) {
        throw ConfigError("step_threshold", "step test needs step_threshold or beta_bar");
      }
      break;
    case SensitivityVariant::kPiecewise:
      if (!(theta1 > 0.0 && theta1 < theta2 && theta2 < 1.0)) {
        throw ConfigError("theta1", "need 0 < theta1 < theta2 < 1");
      }
      break;
  }
  if (replications < 1) throw ConfigError("replications", "must be >= 1");
  if (strategies.empty()) throw ConfigError("strategies", "no strategies selected");
  if (std::set<Strategy>(strategies.begin(), strategies.end()).size() != strategies.size()) {
    throw ConfigError("strategies", "duplicate strategy");
  }
  pcr.validate();
  if (calibration_draws < 1'000'000) {
    throw ConfigError("calibration_draws", "must be >= 1e6");
  }
  if (!(per_test_fpr >= 0.0 && per_test_fpr <= 1.0)) {
    throw ConfigError("per_test_fpr", "must be in [0, 1]");
  }
  if (b_infection && !(*b_infection >= 0.0)) throw ConfigError("b_infection", "must be >= 0");
  if (b_recovery && !(*b_recovery >= 0.0)) throw ConfigError("b_recovery", "must be >= 0");
}

void merge_config(ScenarioConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  const bool has_tau = j.contains("tau") && !j["tau"].is_null();
  const bool has_beta = j.contains("beta_bar") && !j["beta_bar"].is_null();
  if (has_tau && has_beta) throw ConfigError("tau", "give either tau or beta_bar, not both");
  for (const auto& [key, v] : j.items()) {
    if (key == "alpha") {
      c.alphas = scalar_or_list<double>(v, "alpha", get_number);
    } else if (key == "sar") {
      c.sar = get_number(v, "sar");
    } else if (key == "household_dist") {
      c.household_dist = parse_household(v);
    } else if (key == "pool_size") {
      c.pool_sizes = scalar_or_list<int>(v, "pool_size", [](const json& x, const char* f) {
        const std::int64_t n = get_integer(x, f);
        if (n < 2 || n > 1'000'000) throw ConfigError(f, "must be in [2, 1e6]");
        return static_cast<int>(n);
      });
    } else if (key == "beta_bar") {
      if (v.is_null()) c.beta_bar.reset();
      else c.beta_bar = get_number(v, "beta_bar");
      if (has_beta) c.tau.reset();
    } else if (key == "tau") {
      if (v.is_null()) c.tau.reset();
      else c.tau = get_integer(v, "tau");
      if (has_tau) c.beta_bar.reset();
    } else if (key == "sensitivity_variant") {
      c.sensitivity_variant = parse_sensitivity_variant(get_string(v, "sensitivity_variant"));
    } else if (key == "step_threshold") {
      if (v.is_null()) c.step_threshold.reset();
      else c.step_threshold = get_number(v, "step_threshold");
    } else if (key == "theta1") {
      c.theta1 = get_number(v, "theta1");
    } else if (key == "theta2") {
      c.theta2 = get_number(v, "theta2");
    } else if (key == "population_size") {
      c.population_size = get_count(v, "population_size");
    } else if (key == "replications") {
      c.replications = get_count(v, "replications");
    } else if (key == "master_seed") {
      if (v.is_number_unsigned()) c.master_seed = v.get<std::uint64_t>();
      else c.master_seed = static_cast<std::uint64_t>(get_count(v, "master_seed"));
    } else if (key == "strategies") {
      if (!v.is_array()) throw ConfigError("strategies", "expected a list");
      c.strategies.clear();
      for (const auto& s : v) c.strategies.push_back(parse_strategy(get_string(s, "strategies")));
    } else if (key == "pad_last_pool") {
      c.pad_last_pool = get_bool(v, "pad_last_pool");
    } else if (key == "pcr") {
      parse_pcr(c.pcr, v);
    } else if (key == "gmm") {
      c.gmm = parse_gmm(v);
    } else if (key == "calibration_draws") {
      c.calibration_draws = get_count(v, "calibration_draws");
    } else if (key == "per_test_fpr") {
      c.per_test_fpr = get_number(v, "per_test_fpr");
    } else if (key == "b_infection") {
      if (v.is_null()) c.b_infection.reset();
      else c.b_infection = get_number(v, "b_infection");
    } else if (key == "b_recovery") {
      if (v.is_null()) c.b_recovery.reset();
      else c.b_recovery = get_number(v, "b_recovery");
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
}

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig c;
  merge_config(c, j);
  c.validate();
  return c;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["alpha"] = c.alphas.size() == 1 ? json(c.alphas[0]) : json(c.alphas);
  j["sar"] = c.sar;
  j["household_dist"] = {{"name", c.household_dist.name()},
                         {"weights", c.household_dist.weights()}};
  j["pool_size"] = c.pool_sizes.size() == 1 ? json(c.pool_sizes[0]) : json(c.pool_sizes);
  j["beta_bar"] = c.beta_bar ? json(*c.beta_bar) : json(nullptr);
  j["tau"] = c.tau ? json(*c.tau) : json(nullptr);
  j["sensitivity_variant"] = to_string(c.sensitivity_variant);
  j["step_threshold"] = c.step_threshold ? json(*c.step_threshold) : json(nullptr);
  j["theta1"] = c.theta1;
  j["theta2"] = c.theta2;
  j["population_size"] = c.population_size;
  j["replications"] = c.replications;
  j["master_seed"] = c.master_seed;
  json strategies = json::array();
  for (Strategy s : c.strategies) strategies.push_back(std::string(to_string(s)));
  j["strategies"] = strategies;
  j["pad_last_pool"] = c.pad_last_pool;
  j["pcr"] = {{"sample_volume_ml", c.pcr.sample_volume_ml},
              {"subsample_volume_ul", c.pcr.subsample_volume_ul},
              {"binding_efficiency", c.pcr.binding_efficiency}};
  json gmm = json::array();
  for (const auto& g : c.gmm.components()) {
    gmm.push_back({{"weight", g.weight}, {"mu", g.mu}, {"sigma", g.sigma}});
  }
  j["gmm"] = gmm;
  j["calibration_draws"] = c.calibration_draws;
  j["per_test_fpr"] = c.per_test_fpr;
  j["b_infection"] = c.b_infection ? json(*c.b_infection) : json(nullptr);
  j["b_recovery"] = c.b_recovery ? json(*c.b_recovery) : json(nullptr);
  return j;
}

double gmm_quantile(const GmmParams& gmm, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile must be in (0, 1)");
  double lo = -50.0;
  double hi = 50.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gmm.cdf(mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ResolvedScenario resolve_scenario(const ScenarioConfig& config) {
  config.validate();
  ScenarioConfig c = config;
  std::optional<CalibrationResult> calibration;
  switch (c.sensitivity_variant) {
    case SensitivityVariant::kRealistic: {
      if (!c.tau) {
        Rng rng = make_stream(c.master_seed, 0, StreamTag::kCalibration);
        calibration = calibrate_tau(*c.beta_bar, c.pcr, c.gmm, rng, c.calibration_draws);
        c.pcr.detection_threshold = calibration->tau;
      } else {
        c.pcr.detection_threshold = *c.tau;
      }
      return {c, SensitivityFn::realistic(c.pcr), calibration};
    }
    case SensitivityVariant::kStep: {
      if (!c.step_threshold) {
        c.step_threshold = std::pow(10.0, gmm_quantile(c.gmm, *c.beta_bar));
      }
      return {c, SensitivityFn::step(*c.step_threshold), calibration};
    }
    case SensitivityVariant::kPiecewise:
      return {c, SensitivityFn::piecewise(c.theta1, c.theta2), calibration};
  }
  throw ConfigError("sensitivity_variant", "unsupported");
}

const StrategySummary& CellResult::get(Strategy s) const {
  for (const auto& x : strategies) {
    if (x.strategy == s) return x;
  }
  throw std::out_of_range("strategy not in result");
}

namespace {

StreamTag assignment_tag(Strategy s) {
  return s == Strategy::kNaive ? StreamTag::kNaiveAssignment
                               : StreamTag::kCorrelatedAssignment;
}

StreamTag protocol_tag(Strategy s) {
  return s == Strategy::kNaive ? StreamTag::kNaiveProtocol
                               : StreamTag::kCorrelatedProtocol;
}

json resolved_json(const ResolvedScenario& s) {
  json j = config_to_json(s.config);
  if (s.config.sensitivity_variant == SensitivityVariant::kRealistic) {
    j["tau"] = s.config.pcr.detection_threshold;
    if (s.calibration) j["calibrated_beta_bar"] = s.calibration->beta_bar;
  }
  return j;
}

}  // namespace

CellResult run_cell(const ResolvedScenario& scenario, double alpha, int pool_size,
                    const RunOptions& options,
                    std::vector<ReplicationRecord>* records) {
  const ScenarioConfig& c = scenario.config;
  household_infection_prob(alpha, c.sar, c.household_dist);
  const std::size_t reps = c.replications;
  const std::size_t ns = c.strategies.size();
  std::vector<MetricsSummary> slots(reps * ns);
  const ProtocolOptions protocol{c.pad_last_pool};

  parallel_for(reps, options.workers, [&](std::size_t r) {
    Rng pop_rng = make_stream(c.master_seed, r, StreamTag::kPopulation);
    const Population pop = generate_population(c.population_size, c.household_dist,
                                               alpha, c.sar, c.gmm, pop_rng);
    for (std::size_t si = 0; si < ns; ++si) {
      const Strategy s = c.strategies[si];
      Rng assign_rng = make_stream(c.master_seed, r, assignment_tag(s));
      const PoolingAssignment pools = assign_pools(s, pop, pool_size, assign_rng);
      Rng test_rng = make_stream(c.master_seed, r, protocol_tag(s));
      const ProtocolOutcome out =
          run_dorfman(pop, pools, scenario.sensitivity, test_rng, protocol);
      slots[r * ns + si] = compute_metrics(out);
    }
  });

  CellResult cell{alpha, pool_size, {}, std::nullopt};
  for (Strategy s : c.strategies) cell.strategies.push_back({s, {}, {}});
  const auto naive = std::find(c.strategies.begin(), c.strategies.end(), Strategy::kNaive);
  const auto corr = std::find(c.strategies.begin(), c.strategies.end(), Strategy::kCorrelated);
  const bool paired = naive != c.strategies.end() && corr != c.strategies.end();
  if (paired) cell.advantage = PairedAdvantage{};
  const std::size_t ni = static_cast<std::size_t>(naive - c.strategies.begin());
  const std::size_t ci = static_cast<std::size_t>(corr - c.strategies.begin());

  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t si = 0; si < ns; ++si) {
      const MetricsSummary& m = slots[r * ns + si];
      cell.strategies[si].metrics.add(m);
      if (records) records->push_back({r, c.strategies[si], alpha, pool_size, m});
    }
    if (paired) {
      const MetricsSummary& a = slots[r * ns + ni];
      const MetricsSummary& b = slots[r * ns + ci];
      if (a.sensitivity && b.sensitivity) {
        cell.advantage->sensitivity.add(*b.sensitivity - *a.sensitivity);
      }
      cell.advantage->efficiency.add(b.efficiency - a.efficiency);
    }
  }
  for (auto& s : cell.strategies) {
    if (s.metrics.sensitivity.count() > 0) {
      s.fpr = estimate_fpr(s.metrics.efficiency.mean(), s.metrics.sensitivity.mean(),
                           pool_size, alpha, c.per_test_fpr);
    }
  }
  return cell;
}

ScenarioResult run_scenario(const ResolvedScenario& scenario, const RunOptions& options) {
  const ScenarioConfig& c = scenario.config;
  if (c.alphas.size() != 1) throw ConfigError("alpha", "simulate takes a single prevalence");
  if (c.pool_sizes.size() != 1) throw ConfigError("pool_size", "simulate takes a single pool size");
  ScenarioResult result;
  result.resolved_config = resolved_json(scenario);
  result.cells.push_back(run_cell(scenario, c.alphas[0], c.pool_sizes[0], options,
                                  options.keep_replications ? &result.replications : nullptr));
  return result;
}

ScenarioResult run_sweep(const ResolvedScenario& scenario, const RunOptions& options) {
  const ScenarioConfig& c = scenario.config;
  ScenarioResult result;
  result.resolved_config = resolved_json(scenario);
  for (double alpha : c.alphas) {
    for (int n : c.pool_sizes) {
      result.cells.push_back(run_cell(scenario, alpha, n, options,
                                      options.keep_replications ? &result.replications : nullptr));
    }
  }
  return result;
}

}  // namespace corrpool
