#include "psim/sampler.hpp"

#include <stdexcept>

namespace psim {

NodeId Sampler::next(NodeId id) {
  const std::uint64_t h = keyed_hash(hash_seed, id);
  if (!stored_id || h < stored_hash) {
    stored_id = id;
    stored_hash = h;
  }
  return *stored_id;
}

SampleList::SampleList(std::size_t l2, Rng& rng) {
  std::vector<std::uint64_t> seeds(l2);
  for (auto& s : seeds) s = rng();
  *this = with_seeds(std::move(seeds));
}

SampleList SampleList::with_seeds(std::vector<std::uint64_t> seeds) {
  SampleList sl;
  const std::size_t n = seeds.size();
  sl.seeds_ = std::move(seeds);
  sl.hashes_.assign(n, ~std::uint64_t{0});
  sl.ids_.assign(n, 0);
  sl.occupied_.assign(n, 0);
  return sl;
}

simd::SamplerLanes SampleList::lanes() {
  return {seeds_.data(), hashes_.data(), ids_.data(), occupied_.data(), seeds_.size()};
}

void SampleList::feed(std::span<const NodeId> stream, simd::Isa isa) {
  static_assert(sizeof(NodeId) == sizeof(std::uint64_t));
  if (stream.empty() || seeds_.empty()) return;
  std::vector<std::uint64_t> raw(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) raw[i] = stream[i].value;
  simd::feed_kernel(isa)(lanes(), raw);
}

NodeId SampleList::next(std::size_t index, NodeId id) {
  Sampler s = sampler(index);
  const NodeId out = s.next(id);
  hashes_[index] = s.stored_hash;
  ids_[index] = s.stored_id->value;
  occupied_[index] = ~std::uint64_t{0};
  return out;
}

Sampler SampleList::sampler(std::size_t index) const {
  if (index >= seeds_.size()) throw std::out_of_range("sampler index");
  Sampler s;
  s.hash_seed = seeds_[index];
  if (occupied_[index]) {
    s.stored_id = NodeId{ids_[index]};
    s.stored_hash = hashes_[index];
  }
  return s;
}

std::optional<NodeId> SampleList::stored(std::size_t index) const {
  return sampler(index).stored_id;
}

bool SampleList::any_stored() const {
  for (auto occ : occupied_) {
    if (occ) return true;
  }
  return false;
}

std::vector<NodeId> SampleList::stored_ids() const {
  std::vector<NodeId> out;
  out.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (occupied_[i]) out.push_back(NodeId{ids_[i]});
  }
  return out;
}

std::vector<NodeId> SampleList::random(std::size_t k, Rng& rng) const {
  const auto pool = stored_ids();
  std::vector<NodeId> out;
  if (pool.empty()) return out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(pool[uniform_index(rng, pool.size())]);
  return out;
}

}  // namespace psim
