#include <immintrin.h>

#include "psim/simd/minhash.hpp"

namespace psim::simd {
namespace {

inline __m512i mix64x8(__m512i x) {
  const __m512i c1 = _mm512_set1_epi64(static_cast<long long>(0xbf58476d1ce4e5b9ULL));
  const __m512i c2 = _mm512_set1_epi64(static_cast<long long>(0x94d049bb133111ebULL));
  x = _mm512_xor_si512(x, _mm512_srli_epi64(x, 30));
  x = _mm512_mullo_epi64(x, c1);
  x = _mm512_xor_si512(x, _mm512_srli_epi64(x, 27));
  x = _mm512_mullo_epi64(x, c2);
  x = _mm512_xor_si512(x, _mm512_srli_epi64(x, 31));
  return x;
}

}  // namespace

void feed_avx512(SamplerLanes lanes, std::span<const std::uint64_t> stream) {
  const std::size_t vec_end = lanes.count & ~std::size_t{7};
  const __m512i ones = _mm512_set1_epi64(-1);

  for (std::uint64_t id : stream) {
    const std::uint64_t pre = id_premix(id);
    const __m512i pre_v = _mm512_set1_epi64(static_cast<long long>(pre));
    const __m512i id_v = _mm512_set1_epi64(static_cast<long long>(id));

    std::size_t i = 0;
    for (; i < vec_end; i += 8) {
      const __m512i seeds = _mm512_loadu_si512(lanes.seeds + i);
      const __m512i h = mix64x8(_mm512_xor_si512(pre_v, seeds));
      const __m512i stored = _mm512_loadu_si512(lanes.hashes + i);
      const __m512i occ = _mm512_loadu_si512(lanes.occupied + i);
      const __mmask8 take = _mm512_cmplt_epu64_mask(h, stored) | _mm512_testn_epi64_mask(occ, occ);
      _mm512_storeu_si512(lanes.hashes + i, _mm512_mask_mov_epi64(stored, take, h));
      _mm512_storeu_si512(lanes.ids + i,
                          _mm512_mask_mov_epi64(_mm512_loadu_si512(lanes.ids + i), take, id_v));
      _mm512_storeu_si512(lanes.occupied + i, ones);
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
