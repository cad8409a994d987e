#include "corrpool/rng.hpp"

namespace corrpool {

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index,
                          StreamTag tag) noexcept {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ index);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  return h;
}

Rng make_stream(std::uint64_t master_seed, std::uint64_t index, StreamTag tag) {
  return Rng(derive_seed(master_seed, index, tag));
}

}  // namespace corrpool
