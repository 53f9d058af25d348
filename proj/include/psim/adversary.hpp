#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "psim/brahms.hpp"
#include "psim/node_id.hpp"
#include "psim/rng.hpp"
#include "psim/sampler.hpp"
#include "psim/trusted.hpp"

namespace psim {

struct AdversaryConfig {
  std::vector<NodeId> byz_ids;
  std::size_t push_budget_per_node = 0;
  double ident_threshold = 0.10;
  double poisoned_injection_fraction = 0.0;

  /// Throws std::invalid_argument when the threshold leaves (0, 1) or the
  /// injection fraction is negative.
  void validate() const;
};

struct PushMessage {
  NodeId target;
  NodeId pushed;
};

/// |byz_ids| * push_budget_per_node faulty pushes, spread round-robin over a
/// random permutation of the correct nodes so per-target counts differ by at
/// most one.
std::vector<PushMessage> balanced_pushes(const AdversaryConfig& cfg, std::span<const NodeId> correct_nodes,
                                         Rng& rng);

/// l1 Byzantine ids; distinct when enough exist, with repeats otherwise.
std::vector<NodeId> byzantine_pull_reply(const AdversaryConfig& cfg, std::size_t l1, Rng& rng);

struct IdentObservation {
  NodeId observer;
  NodeId target;
  double byz_fraction = 0.0;
  std::size_t round = 0;
};

/// Per-target running sums of observed Byzantine fractions.
class IdentTally {
 public:
  void add(NodeId target, double byz_fraction, std::size_t count = 1);
  void add(const IdentObservation& obs) { add(obs.target, obs.byz_fraction); }

  /// Labels targets whose average sits more than threshold below the mean of
  /// per-target averages. Result is sorted by id.
  std::vector<NodeId> label(double threshold) const;

  std::size_t targets() const { return entries_.size(); }

 private:
  struct Entry {
    NodeId target;
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::vector<Entry> entries_;
  std::vector<std::size_t> index_;  // by target id value, or npos
};

/// Trusted-node identification rule over raw observations.
std::vector<NodeId> identify_trusted(std::span<const IdentObservation> observations, double threshold);

struct PoisonedNode {
  NodeId id;
  View view;
  SampleList samples;
  SecretKey key;
};

/// Genuine trusted nodes whose bootstrap happened among Byzantine nodes only:
/// views hold Byzantine ids exclusively and the samplers have seen every
/// Byzantine id.
std::vector<PoisonedNode> bootstrap_poisoned_trusted(const AdversaryConfig& cfg, std::span<const NodeId> ids,
                                                     const SecretKey& trusted_key, const BrahmsParams& params,
                                                     Rng& rng);

}  // namespace psim
