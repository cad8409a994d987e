#include "corrpool/parallel.hpp"

#include <cstdlib>
#include <string>

#include "corrpool/errors.hpp"

namespace corrpool {

std::size_t default_worker_count() {
  if (const char* env = std::getenv("CORRPOOL_WORKERS"); env && *env) {
    try {
      std::size_t pos = 0;
      const long v = std::stol(env, &pos);
      if (pos == std::string(env).size() && v >= 1) {
        return static_cast<std::size_t>(v);
      }
    } catch (const std::exception&) {
    }
    throw ConfigError("CORRPOOL_WORKERS", "must be a positive integer");
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace corrpool
