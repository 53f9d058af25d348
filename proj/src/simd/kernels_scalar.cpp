#include "psim/simd/minhash.hpp"

namespace psim::simd {

void feed_scalar(SamplerLanes lanes, std::span<const std::uint64_t> stream) {
  for (std::uint64_t id : stream) {
    const std::uint64_t pre = id_premix(id);
    for (std::size_t i = 0; i < lanes.count; ++i) {
      const std::uint64_t h = mix64(pre ^ lanes.seeds[i]);
      // Strict comparison keeps the stored id on a tie.
      if (!lanes.occupied[i] || h < lanes.hashes[i]) {
        lanes.hashes[i] = h;
        lanes.ids[i] = id;
        lanes.occupied[i] = ~std::uint64_t{0};
      }
    }
  }
}

}  // namespace psim::simd
