#pragma once

#include <cstdint>
#include <vector>

#include "corrpool/pcr.hpp"
#include "corrpool/pooling.hpp"
#include "corrpool/population.hpp"
#include "corrpool/rng.hpp"

namespace corrpool {

struct PoolOutcome {
  std::uint32_t size = 0;
  /// S: infected members.
  std::uint32_t infected = 0;
  /// Y: pooled-test result.
  bool positive = false;
  /// S_D: members whose individual test is (or would be) positive.
  std::uint32_t individually_positive = 0;
  /// D = Y * S_D.
  std::uint32_t identified = 0;
  std::uint32_t followup_tests = 0;
};

struct ProtocolOutcome {
  std::vector<PoolOutcome> pools;
  std::uint64_t pooled_tests = 0;
  std::uint64_t followup_tests = 0;
  std::uint64_t total_infected = 0;
  std::uint64_t total_identified = 0;
  std::uint64_t positive_pools = 0;
  std::size_t population_size = 0;
  int nominal_pool_size = 0;
};

struct ProtocolOptions {
  /// Dilute every pool by the nominal size, as if short pools were padded
  /// with negative samples. Off: a short pool is diluted by its own size.
  bool pad_last_pool = false;
};

/// Two-stage Dorfman testing. Each pool is tested once; members of positive
/// pools are retested individually on the same sample. Every infected
/// member's individual outcome is drawn independently of the pooled test,
/// so S_D is tallied for negative pools too.
ProtocolOutcome run_dorfman(const Population& population,
                            const PoolingAssignment& assignment,
                            const SensitivityFn& sensitivity, Rng& rng,
                            const ProtocolOptions& options = {});

}  // namespace corrpool
