#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace psim {

using Rng = std::mt19937_64;

/// Purpose tag mixed into every derived stream so that phases never share draws.
enum class Phase : std::uint64_t {
  Bootstrap = 1,
  Keys = 2,
  Samplers = 3,
  Gossip = 4,  // one stream per node and round: push, pull, renew
  Handshake = 5,  // nonces only, so caching handshakes never shifts gossip draws
  Adversary = 7,
  Probe = 8,
};

/// Stream id used for draws that belong to no single node.
inline constexpr std::uint64_t kGlobalStream = ~std::uint64_t{0};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// Counter-based seed derivation: a pure function of its arguments, so the
/// order in which nodes are processed can never change a run's outcome.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t node, std::uint64_t round, Phase phase);

Rng make_stream(std::uint64_t root, std::uint64_t node, std::uint64_t round, Phase phase);

/// Uniform integer in [0, n). n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Uniform integer in [lo, hi].
inline std::size_t uniform_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace psim
