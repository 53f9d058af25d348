#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "psim/rng.hpp"

namespace psim {

// Open-addressing map keyed by 64-bit values, sized for a known small number
// of insertions. Used on per-round hot paths where std::unordered_map's
// allocation per node dominates.
class FlatU64Map {
 public:
  explicit FlatU64Map(std::size_t expected) {
    std::size_t cap = std::bit_ceil(expected * 2 + 8);
    keys_.assign(cap, 0);
    values_.assign(cap, 0);
    occupied_.assign((cap + 63) / 64, 0);
    mask_ = cap - 1;
  }

  /// Returns a pointer to the mapped value, or nullptr if absent.
  std::uint64_t* find(std::uint64_t key) {
    for (std::size_t i = slot(key);; i = (i + 1) & mask_) {
      if (!used(i)) return nullptr;
      if (keys_[i] == key) return &values_[i];
    }
  }

  /// Inserts key if absent; returns true on insertion. Existing values are kept.
  bool insert(std::uint64_t key, std::uint64_t value) {
    if ((size_ + 1) * 2 > keys_.size()) grow();
    for (std::size_t i = slot(key);; i = (i + 1) & mask_) {
      if (!used(i)) {
        keys_[i] = key;
        values_[i] = value;
        mark(i);
        ++size_;
        return true;
      }
      if (keys_[i] == key) return false;
    }
  }

  void assign(std::uint64_t key, std::uint64_t value) {
    if (auto* v = find(key)) {
      *v = value;
    } else {
      insert(key, value);
    }
  }

  bool contains(std::uint64_t key) { return find(key) != nullptr; }
  std::size_t size() const { return size_; }

 private:
  std::size_t slot(std::uint64_t key) const { return mix64(key) & mask_; }
  bool used(std::size_t i) const { return (occupied_[i / 64] >> (i % 64)) & 1U; }
  void mark(std::size_t i) { occupied_[i / 64] |= std::uint64_t{1} << (i % 64); }

  void grow() {
    auto old_keys = std::move(keys_);
    auto old_values = std::move(values_);
    auto old_occ = std::move(occupied_);
    std::size_t cap = old_keys.size() * 2;
    keys_.assign(cap, 0);
    values_.assign(cap, 0);
    occupied_.assign((cap + 63) / 64, 0);
    mask_ = cap - 1;
    size_ = 0;
    for (std::size_t i = 0; i < old_keys.size(); ++i) {
      if ((old_occ[i / 64] >> (i % 64)) & 1U) insert(old_keys[i], old_values[i]);
    }
  }

  std::vector<std::uint64_t> keys_;
  std::vector<std::uint64_t> values_;
  std::vector<std::uint64_t> occupied_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
};

/// Draws distinct positions of [0, n) uniformly without replacement, in
/// O(draws) time and memory (sparse Fisher-Yates).
class PositionDrawer {
 public:
  explicit PositionDrawer(std::size_t n, std::size_t expected_draws = 16)
      : n_(n), swapped_(expected_draws) {}

  bool exhausted() const { return drawn_ == n_; }
  std::size_t remaining() const { return n_ - drawn_; }

  std::size_t next(Rng& rng) {
    std::size_t j = uniform_between(rng, drawn_, n_ - 1);
    std::uint64_t at_j = lookup(j);
    std::uint64_t at_k = lookup(drawn_);
    swapped_.assign(j, at_k);
    ++drawn_;
    return static_cast<std::size_t>(at_j);
  }

 private:
  std::uint64_t lookup(std::size_t pos) {
    if (auto* v = swapped_.find(pos)) return *v;
    return pos;
  }

  std::size_t n_;
  std::size_t drawn_ = 0;
  FlatU64Map swapped_;
};

}  // namespace psim
