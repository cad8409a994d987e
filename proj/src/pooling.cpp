#include "corrpool/pooling.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "corrpool/errors.hpp"

namespace corrpool {

namespace {

std::size_t pool_count_for(std::size_t n_persons, int pool_size) {
  return (n_persons + static_cast<std::size_t>(pool_size) - 1) /
         static_cast<std::size_t>(pool_size);
}

void check_pool_size(int pool_size) {
  if (pool_size < 1) throw std::invalid_argument("pool size must be >= 1");
}

// Max-segment-tree over the free capacity of each pool, answering "leftmost
// pool with at least k free slots" in O(log P).
class FreeSlotTree {
 public:
  FreeSlotTree(std::size_t pools, int capacity) : leaves_(1) {
    while (leaves_ < pools) leaves_ *= 2;
    tree_.assign(2 * leaves_, 0);
    for (std::size_t i = 0; i < pools; ++i) tree_[leaves_ + i] = capacity;
    for (std::size_t i = leaves_ - 1; i >= 1; --i) {
      tree_[i] = std::max(tree_[2 * i], tree_[2 * i + 1]);
    }
  }

  /// Index of the leftmost pool with free >= k, or npos.
  std::size_t leftmost_at_least(int k) const {
    if (tree_[1] < k) return npos;
    std::size_t node = 1;
    while (node < leaves_) {
      node = tree_[2 * node] >= k ? 2 * node : 2 * node + 1;
    }
    return node - leaves_;
  }

  void take(std::size_t pool, int slots) {
    std::size_t node = leaves_ + pool;
    tree_[node] -= slots;
    for (node /= 2; node >= 1; node /= 2) {
      tree_[node] = std::max(tree_[2 * node], tree_[2 * node + 1]);
    }
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t leaves_;
  std::vector<int> tree_;
};

}  // namespace

std::string_view to_string(Strategy s) noexcept {
  return s == Strategy::kNaive ? "naive" : "correlated";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "naive") return Strategy::kNaive;
  if (name == "correlated") return Strategy::kCorrelated;
  throw ConfigError("strategies", "unknown strategy '" + std::string(name) + "'");
}

PoolingAssignment::PoolingAssignment(
    int nominal_size, const std::vector<std::vector<std::uint32_t>>& pools)
    : nominal_size_(nominal_size) {
  offsets_.reserve(pools.size() + 1);
  offsets_.push_back(0);
  for (const auto& p : pools) {
    members_.insert(members_.end(), p.begin(), p.end());
    offsets_.push_back(members_.size());
  }
}

PoolingAssignment assign_naive(const Population& population, int pool_size,
                               Rng& rng) {
  check_pool_size(pool_size);
  std::vector<std::uint32_t> order(population.size());
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<std::uint32_t>> pools;
  pools.reserve(pool_count_for(order.size(), pool_size));
  for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(pool_size)) {
    const auto end = std::min(order.size(), i + static_cast<std::size_t>(pool_size));
    pools.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                       order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return PoolingAssignment(pool_size, pools);
}

PoolingAssignment assign_correlated(const Population& population, int pool_size,
                                    Rng& rng) {
  check_pool_size(pool_size);
  const std::size_t n_pools = pool_count_for(population.size(), pool_size);
  std::vector<std::uint32_t> order(population.households.size());
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), rng);

  // Unopened pools sit to the right of every opened one, so "leftmost pool
  // with room" is first-fit over open pools with a fresh pool as fallback.
  FreeSlotTree free_slots(n_pools, pool_size);
  std::vector<std::vector<std::uint32_t>> pools(n_pools);

  for (const std::uint32_t h : order) {
    const Household& hh = population.households[h];
    const int size = static_cast<int>(hh.size);
    const std::size_t whole = free_slots.leftmost_at_least(size);
    if (whole != FreeSlotTree::npos) {
      for (std::uint32_t m = 0; m < hh.size; ++m) pools[whole].push_back(hh.first + m);
      free_slots.take(whole, size);
      continue;
    }
    for (std::uint32_t m = 0; m < hh.size; ++m) {
      const std::size_t j = free_slots.leftmost_at_least(1);
      pools[j].push_back(hh.first + m);
      free_slots.take(j, 1);
    }
  }
  return PoolingAssignment(pool_size, pools);
}

PoolingAssignment assign_pools(Strategy strategy, const Population& population,
                               int pool_size, Rng& rng) {
  return strategy == Strategy::kNaive
             ? assign_naive(population, pool_size, rng)
             : assign_correlated(population, pool_size, rng);
}

bool is_valid_partition(const PoolingAssignment& assignment, std::size_t n_persons) {
  if (assignment.person_count() != n_persons) return false;
  if (assignment.pool_count() != pool_count_for(n_persons, assignment.nominal_size())) {
    return false;
  }
  std::vector<char> seen(n_persons, 0);
  for (std::size_t j = 0; j < assignment.pool_count(); ++j) {
    const auto pool = assignment.pool(j);
    if (pool.size() > static_cast<std::size_t>(assignment.nominal_size())) return false;
    for (const auto person : pool) {
      if (person >= n_persons || seen[person]) return false;
      seen[person] = 1;
    }
  }
  return true;
}

std::size_t count_split_households(const Population& population,
                                   const PoolingAssignment& assignment) {
  std::vector<std::uint32_t> pool_of(population.size());
  for (std::size_t j = 0; j < assignment.pool_count(); ++j) {
    for (const auto person : assignment.pool(j)) {
      pool_of[person] = static_cast<std::uint32_t>(j);
    }
  }
  std::size_t split = 0;
  for (const auto& hh : population.households) {
    for (std::uint32_t m = 1; m < hh.size; ++m) {
      if (pool_of[hh.first + m] != pool_of[hh.first]) {
        ++split;
        break;
      }
    }
  }
  return split;
}

}  // namespace corrpool
