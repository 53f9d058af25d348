#include <arm_neon.h>

#include "psim/simd/minhash.hpp"

namespace psim::simd {
namespace {

// NEON has no 64-bit lane multiply; build it from 32-bit halves.
inline uint64x2_t mullo64(uint64x2_t a, std::uint64_t c) {
  const uint32x2_t a_lo = vmovn_u64(a);
  const uint32x2_t a_hi = vshrn_n_u64(a, 32);
  const uint32x2_t c_lo = vdup_n_u32(static_cast<std::uint32_t>(c));
  const uint32x2_t c_hi = vdup_n_u32(static_cast<std::uint32_t>(c >> 32));
  const uint64x2_t lo = vmull_u32(a_lo, c_lo);
  const uint64x2_t cross = vaddq_u64(vmull_u32(a_hi, c_lo), vmull_u32(a_lo, c_hi));
  return vaddq_u64(lo, vshlq_n_u64(cross, 32));
}

inline uint64x2_t mix64x2(uint64x2_t x) {
  x = veorq_u64(x, vshrq_n_u64(x, 30));
  x = mullo64(x, 0xbf58476d1ce4e5b9ULL);
  x = veorq_u64(x, vshrq_n_u64(x, 27));
  x = mullo64(x, 0x94d049bb133111ebULL);
  x = veorq_u64(x, vshrq_n_u64(x, 31));
  return x;
}

}  // namespace

void feed_neon(SamplerLanes lanes, std::span<const std::uint64_t> stream) {
  const std::size_t vec_end = lanes.count & ~std::size_t{1};
  const uint64x2_t ones = vdupq_n_u64(~std::uint64_t{0});

  for (std::uint64_t id : stream) {
    const std::uint64_t pre = id_premix(id);
    const uint64x2_t pre_v = vdupq_n_u64(pre);
    const uint64x2_t id_v = vdupq_n_u64(id);

    std::size_t i = 0;
    for (; i < vec_end; i += 2) {
      const uint64x2_t h = mix64x2(veorq_u64(pre_v, vld1q_u64(lanes.seeds + i)));
      const uint64x2_t stored = vld1q_u64(lanes.hashes + i);
      const uint64x2_t occ = vld1q_u64(lanes.occupied + i);
      const uint64x2_t take = vorrq_u64(vcltq_u64(h, stored), veorq_u64(occ, ones));
      vst1q_u64(lanes.hashes + i, vbslq_u64(take, h, stored));
      vst1q_u64(lanes.ids + i, vbslq_u64(take, id_v, vld1q_u64(lanes.ids + i)));
      vst1q_u64(lanes.occupied + i, ones);
    }
    for (; i < lanes.count; ++i) {
      const std::uint64_t h = mix64(pre ^ lanes.seeds[i]);
      if (!lanes.occupied[i] || h < lanes.hashes[i]) {
        lanes.hashes[i] = h;
        lanes.ids[i] = id;
        lanes.occupied[i] = ~std::uint64_t{0};
      }
    }
  }
}

}  // namespace psim::simd
