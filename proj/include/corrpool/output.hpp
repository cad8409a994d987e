#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "corrpool/pcr.hpp"
#include "corrpool/pooling.hpp"
#include "corrpool/population.hpp"
#include "corrpool/scenario.hpp"
#include "corrpool/sir.hpp"
#include "corrpool/theory.hpp"

namespace corrpool {

inline constexpr int kSignificantDigits = 12;

/// %.12g; inf and nan spelled out.
std::string format_number(double x);
double round_significant(double x, int digits = kSignificantDigits);

/// RFC-4180 field quoting.
std::string csv_escape(std::string_view field);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  /// Leading `# config=<json>` line so the file carries its provenance.
  void config_line(const nlohmann::json& config);
  void row(const std::vector<std::string>& fields);

  template <typename... Ts>
  void values(const Ts&... xs) {
    row({cell(xs)...});
  }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(double x) { return format_number(x); }
  static std::string cell(bool b) { return b ? "1" : "0"; }
  template <typename T>
  static std::string cell(const T& x) { return std::to_string(x); }

  std::ostream& out_;
};

/// Copy of `j` with every float rounded to 12 significant digits.
nlohmann::json round_numbers(const nlohmann::json& j);
std::string dump_json(const nlohmann::json& j);

nlohmann::json summary_json(const ScenarioResult& result);
nlohmann::json policy_json(const nlohmann::json& config,
                           const std::vector<PolicyResult>& policy);
nlohmann::json delta_prime_json(const DeltaPrimeEstimate& e);
nlohmann::json counterexample_json(double theta1, double theta2, double alpha,
                                   const CounterexampleResult& r);

void write_replications_csv(std::ostream& out, const nlohmann::json& config,
                            const std::vector<ReplicationRecord>& records);
/// One row per (strategy, alpha, n).
void write_sweep_csv(std::ostream& out, const ScenarioResult& result);
/// One row per (alpha, n): paired correlated-minus-naive differences.
void write_advantage_csv(std::ostream& out, const ScenarioResult& result);
void write_calibration_csv(std::ostream& out, const nlohmann::json& config,
                           const std::vector<double>& targets,
                           const std::vector<CalibrationResult>& results);
void write_delta_table_csv(std::ostream& out, const nlohmann::json& config,
                           const std::vector<DeltaPrimeEstimate>& rows);
void write_counterexample_csv(std::ostream& out, const nlohmann::json& config,
                              const std::vector<CounterexampleCell>& cells);
void write_trajectory_csv(std::ostream& out, const nlohmann::json& config,
                          const std::vector<SirState>& path);
void write_population_csv(std::ostream& out, const nlohmann::json& config,
                          const Population& population);
void write_assignment_csv(std::ostream& out, const nlohmann::json& config,
                          const PoolingAssignment& assignment);

}  // namespace corrpool
