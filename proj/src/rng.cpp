#include "psim/rng.hpp"

namespace psim {

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t node, std::uint64_t round, Phase phase) {
  std::uint64_t h = mix64(root + 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ (node + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (round + 0x85ebca77c2b2ae63ULL));
  h = mix64(h ^ (static_cast<std::uint64_t>(phase) * 0xc2b2ae3d27d4eb4fULL));
  return h;
}

Rng make_stream(std::uint64_t root, std::uint64_t node, std::uint64_t round, Phase phase) {
  return Rng{derive_seed(root, node, round, phase)};
}

}  // namespace psim
