#pragma once

#include <vector>

#include "corrpool/population.hpp"

namespace corrpool::testing {

/// Households of the given sizes; persons listed in `infected_loads` order
/// receive those loads (zero means uninfected).
inline Population make_population(const std::vector<std::uint32_t>& sizes,
                                  const std::vector<double>& loads = {}) {
  Population pop;
  std::uint32_t next = 0;
  for (std::uint32_t h = 0; h < sizes.size(); ++h) {
    pop.households.push_back({next, sizes[h]});
    for (std::uint32_t k = 0; k < sizes[h]; ++k) {
      const double v = next < loads.size() ? loads[next] : 0.0;
      pop.persons.push_back({h, v > 0.0, v});
      ++next;
    }
  }
  return pop;
}

}  // namespace corrpool::testing
