#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corrpool/population.hpp"
#include "corrpool/rng.hpp"

namespace corrpool {

enum class Strategy { kNaive, kCorrelated };

std::string_view to_string(Strategy s) noexcept;
Strategy parse_strategy(std::string_view name);

/// Partition of person indices into pools of nominal size n, stored flat.
class PoolingAssignment {
 public:
  PoolingAssignment(int nominal_size, const std::vector<std::vector<std::uint32_t>>& pools);

  int nominal_size() const noexcept { return nominal_size_; }
  std::size_t pool_count() const noexcept { return offsets_.size() - 1; }
  std::size_t person_count() const noexcept { return members_.size(); }
  std::span<const std::uint32_t> pool(std::size_t j) const noexcept {
    return {members_.data() + offsets_[j], offsets_[j + 1] - offsets_[j]};
  }

 private:
  int nominal_size_;
  std::vector<std::uint32_t> members_;
  std::vector<std::size_t> offsets_;
};

/// Uniform random permutation of all persons, cut into consecutive blocks.
PoolingAssignment assign_naive(const Population& population, int pool_size, Rng& rng);

/// Households in shuffled order, each placed whole into the first pool with
/// enough free slots. The pool count is fixed at ceil(N/n); a household that
/// fits nowhere whole is spread over the earliest pools with free slots.
PoolingAssignment assign_correlated(const Population& population, int pool_size,
                                    Rng& rng);

PoolingAssignment assign_pools(Strategy strategy, const Population& population,
                               int pool_size, Rng& rng);

/// Every person in [0, n_persons) appears exactly once, no pool exceeds the
/// nominal size, and there are ceil(N/n) pools.
bool is_valid_partition(const PoolingAssignment& assignment, std::size_t n_persons);

std::size_t count_split_households(const Population& population,
                                   const PoolingAssignment& assignment);

}  // namespace corrpool
