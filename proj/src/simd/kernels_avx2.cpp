#include <immintrin.h>

#include "psim/simd/minhash.hpp"

namespace psim::simd {
namespace {

// 64x64 -> low 64 multiply from three 32x32 -> 64 products.
inline __m256i mullo64(__m256i a, __m256i b) {
  const __m256i lo = _mm256_mul_epu32(a, b);
  const __m256i a_hi = _mm256_srli_epi64(a, 32);
  const __m256i b_hi = _mm256_srli_epi64(b, 32);
  const __m256i cross = _mm256_add_epi64(_mm256_mul_epu32(a_hi, b), _mm256_mul_epu32(a, b_hi));
  return _mm256_add_epi64(lo, _mm256_slli_epi64(cross, 32));
}

inline __m256i mix64x4(__m256i x) {
  const __m256i c1 = _mm256_set1_epi64x(static_cast<long long>(0xbf58476d1ce4e5b9ULL));
  const __m256i c2 = _mm256_set1_epi64x(static_cast<long long>(0x94d049bb133111ebULL));
  x = _mm256_xor_si256(x, _mm256_srli_epi64(x, 30));
  x = mullo64(x, c1);
  x = _mm256_xor_si256(x, _mm256_srli_epi64(x, 27));
  x = mullo64(x, c2);
  x = _mm256_xor_si256(x, _mm256_srli_epi64(x, 31));
  return x;
}

}  // namespace

void feed_avx2(SamplerLanes lanes, std::span<const std::uint64_t> stream) {
  const std::size_t vec_end = lanes.count & ~std::size_t{3};
  const __m256i sign = _mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ULL));
  const __m256i ones = _mm256_set1_epi64x(-1);

  for (std::uint64_t id : stream) {
    const std::uint64_t pre = id_premix(id);
    const __m256i pre_v = _mm256_set1_epi64x(static_cast<long long>(pre));
    const __m256i id_v = _mm256_set1_epi64x(static_cast<long long>(id));

    std::size_t i = 0;
    for (; i < vec_end; i += 4) {
      auto* hp = reinterpret_cast<__m256i*>(lanes.hashes + i);
      auto* ip = reinterpret_cast<__m256i*>(lanes.ids + i);
      auto* op = reinterpret_cast<__m256i*>(lanes.occupied + i);
      const __m256i seeds = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(lanes.seeds + i));
      const __m256i h = mix64x4(_mm256_xor_si256(pre_v, seeds));
      const __m256i stored = _mm256_loadu_si256(hp);
      const __m256i occ = _mm256_loadu_si256(op);
      // Unsigned h < stored via signed compare on sign-flipped operands.
      const __m256i less = _mm256_cmpgt_epi64(_mm256_xor_si256(stored, sign), _mm256_xor_si256(h, sign));
      const __m256i take = _mm256_or_si256(less, _mm256_andnot_si256(occ, ones));
      _mm256_storeu_si256(hp, _mm256_blendv_epi8(stored, h, take));
      _mm256_storeu_si256(ip, _mm256_blendv_epi8(_mm256_loadu_si256(ip), id_v, take));
      _mm256_storeu_si256(op, ones);
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
