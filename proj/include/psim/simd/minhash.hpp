#pragma once

// Min-wise sampler update kernels.
//
// A sample list is stored as parallel lanes (structure of arrays): one keyed
// hash seed, the current minimum hash, the stored id and an occupancy mask per
// sampler. Feeding one id touches every lane with the same arithmetic, which
// is the data-parallel inner loop of the simulator. Every variant must produce
// bit-identical lane state to the scalar reference.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "psim/rng.hpp"

namespace psim::simd {

inline constexpr std::uint64_t kIdPremixSalt = 0x9e3779b97f4a7c15ULL;

/// Seed-independent part of the keyed hash, computed once per fed id.
constexpr std::uint64_t id_premix(std::uint64_t id) { return mix64(id + kIdPremixSalt); }

/// Keyed 64-bit hash selecting one pseudo-random permutation per seed.
constexpr std::uint64_t keyed_hash(std::uint64_t seed, std::uint64_t id) {
  return mix64(id_premix(id) ^ seed);
}

struct SamplerLanes {
  const std::uint64_t* seeds;
  std::uint64_t* hashes;
  std::uint64_t* ids;
  std::uint64_t* occupied;  // 0 or all-ones
  std::size_t count;
};

using FeedKernel = void (*)(SamplerLanes lanes, std::span<const std::uint64_t> stream);

enum class Isa { Scalar, Avx2, Avx512, Neon };

std::string_view isa_name(Isa isa);

/// True when the variant is compiled in and the running CPU supports it.
bool isa_available(Isa isa);

/// Every variant usable on this machine, scalar first.
std::vector<Isa> available_isas();

/// Widest available variant, unless PSIM_SIMD (scalar|avx2|avx512|neon)
/// selects another available one.
Isa active_isa();

FeedKernel feed_kernel(Isa isa);

void feed_scalar(SamplerLanes lanes, std::span<const std::uint64_t> stream);
#if defined(__x86_64__) || defined(_M_X64)
void feed_avx2(SamplerLanes lanes, std::span<const std::uint64_t> stream);
void feed_avx512(SamplerLanes lanes, std::span<const std::uint64_t> stream);
#endif
#if defined(__aarch64__)
void feed_neon(SamplerLanes lanes, std::span<const std::uint64_t> stream);
#endif

}  // namespace psim::simd
