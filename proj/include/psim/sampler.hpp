#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "psim/node_id.hpp"
#include "psim/rng.hpp"
#include "psim/simd/minhash.hpp"

namespace psim {

inline std::uint64_t keyed_hash(std::uint64_t seed, NodeId id) {
  return simd::keyed_hash(seed, id.value);
}

/// One min-wise sampler: remembers the id with the smallest keyed hash seen.
struct Sampler {
  std::uint64_t hash_seed = 0;
  std::optional<NodeId> stored_id;
  std::uint64_t stored_hash = ~std::uint64_t{0};

  /// Offers id; returns the (possibly new) stored id. Ties keep the old id.
  NodeId next(NodeId id);
};

/// The l2 samplers of a node, stored as parallel lanes so that feeding an id
/// runs one vectorized pass over all samplers.
class SampleList {
 public:
  SampleList() = default;

  /// l2 samplers with independent seeds drawn from rng.
  SampleList(std::size_t l2, Rng& rng);

  static SampleList with_seeds(std::vector<std::uint64_t> seeds);

  std::size_t size() const { return seeds_.size(); }

  /// Offers every id of stream, in order, to every sampler.
  void feed(std::span<const NodeId> stream) { feed(stream, simd::active_isa()); }
  void feed(std::span<const NodeId> stream, simd::Isa isa);

  /// sampler_next on one sampler of the list.
  NodeId next(std::size_t index, NodeId id);

  Sampler sampler(std::size_t index) const;
  std::optional<NodeId> stored(std::size_t index) const;

  bool any_stored() const;

  /// Ids held by the non-empty samplers, in sampler order (may repeat).
  std::vector<NodeId> stored_ids() const;

  /// k ids drawn uniformly with replacement from the non-empty samplers.
  /// Empty when every sampler is empty.
  std::vector<NodeId> random(std::size_t k, Rng& rng) const;

  bool operator==(const SampleList&) const = default;

 private:
  simd::SamplerLanes lanes();

  std::vector<std::uint64_t> seeds_;
  std::vector<std::uint64_t> hashes_;
  std::vector<std::uint64_t> ids_;
  std::vector<std::uint64_t> occupied_;
};

}  // namespace psim
