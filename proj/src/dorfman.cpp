#include "corrpool/dorfman.hpp"

#include <stdexcept>

namespace corrpool {

ProtocolOutcome run_dorfman(const Population& population,
                            const PoolingAssignment& assignment,
                            const SensitivityFn& sensitivity, Rng& rng,
                            const ProtocolOptions& options) {
  if (assignment.person_count() != population.size()) {
    throw std::invalid_argument("assignment does not cover the population");
  }
  ProtocolOutcome out;
  out.population_size = population.size();
  out.nominal_pool_size = assignment.nominal_size();
  out.pools.reserve(assignment.pool_count());

  std::vector<double> loads;
  for (std::size_t j = 0; j < assignment.pool_count(); ++j) {
    const auto members = assignment.pool(j);
    PoolOutcome pool;
    pool.size = static_cast<std::uint32_t>(members.size());

    loads.clear();
    for (const auto person : members) {
      const Person& p = population.persons.at(person);
      if (p.infected) {
        ++pool.infected;
        loads.push_back(p.viral_load);
      }
    }
    const int dilution = options.pad_last_pool ? assignment.nominal_size()
                                               : static_cast<int>(members.size());
    // Negative members contribute zero copies; only positive loads matter.
    pool.positive = !loads.empty() && sensitivity.test_pool(loads, dilution, rng);
    for (const double v : loads) {
      if (sensitivity.test_individual(v, rng)) ++pool.individually_positive;
    }
    if (pool.positive) {
      pool.identified = pool.individually_positive;
      pool.followup_tests = pool.size;
    }

    ++out.pooled_tests;
    out.followup_tests += pool.followup_tests;
    out.total_infected += pool.infected;
    out.total_identified += pool.identified;
    out.positive_pools += pool.positive ? 1 : 0;
    out.pools.push_back(pool);
  }
  return out;
}

}  // namespace corrpool
