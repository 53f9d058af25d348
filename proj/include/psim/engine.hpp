#pragma once

// Synchronous round-based simulation of a Brahms population with optional
// trusted nodes, a Byzantine adversary and view-poisoned trusted nodes.
//
// Round phases:
//   1. correct nodes push their id to alpha*l1 view targets; the adversary
//      sends its balanced pushes;
//   2. correct nodes authenticate each of their beta*l1 pull targets, then
//      either swap half-views (both trusted) or receive a plain pull reply;
//      every reply reflects the target's view at round start;
//   3. each correct node evicts (trusted only), feeds its samplers, checks
//      for a push flood and renews its view unless blocked;
//   4. inboxes are cleared and the round counter advances.
//
// Every random draw comes from a stream derived from
// (seed, node, round, phase), so a run is a pure function of its config.

#include <cstdint>
#include <optional>
#include <vector>

#include "psim/adversary.hpp"
#include "psim/brahms.hpp"
#include "psim/metrics.hpp"
#include "psim/node_id.hpp"
#include "psim/sampler.hpp"
#include "psim/trusted.hpp"

namespace psim {

struct RunConfig {
  std::size_t n = 1000;
  double f = 0.0;
  double t = 0.0;
  BrahmsParams params{};
  EvictionPolicy eviction = EvictionPolicy::adaptive();
  std::size_t rounds = 200;
  std::uint64_t seed = 1;
  /// Byzantine pushes per node and round, as a multiple of alpha * l1.
  double push_budget_factor = 1.0;
  double ident_threshold = 0.10;
  bool identification = false;
  /// View-poisoned trusted nodes added, as a fraction of n.
  double injection_fraction = 0.0;
  /// Reuse the outcome of the first handshake between a pair of nodes.
  bool cache_handshakes = true;

  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
};

struct NodeRoundStats {
  std::size_t pushes_received = 0;
  std::size_t pull_replies = 0;
  std::size_t pulled_ids = 0;
  std::size_t pull_partners = 0;
  std::size_t trusted_partners = 0;
  std::optional<double> eviction_rate;
  bool blocked = false;
  bool renewed = false;
};

class IdBits {
 public:
  IdBits() = default;
  explicit IdBits(std::size_t n) : words_((n + 63) / 64) {}

  bool test(NodeId id) const { return (words_[id.value / 64] >> (id.value % 64)) & 1U; }
  /// Returns true if the bit was newly set.
  bool set(NodeId id) {
    auto& w = words_[id.value / 64];
    const auto bit = std::uint64_t{1} << (id.value % 64);
    if (w & bit) return false;
    w |= bit;
    return true;
  }

 private:
  std::vector<std::uint64_t> words_;
};

struct NodeState {
  NodeId id;
  NodeClass cls = NodeClass::Honest;
  View view;
  SampleList samples;
  SecretKey key;
  RoundInbox inbox;
  /// Ids ever offered to the samplers. Re-feeding one cannot change a
  /// min-wise sampler, so only fresh ids are fed.
  IdBits fed;
  /// Ids ever present in the view or the sample list, plus the node itself.
  IdBits seen;
  std::size_t seen_correct = 0;
  NodeRoundStats last;
  /// Reseeded from (seed, id, round) at the start of every round.
  Rng rng;
  Rng handshake_rng;
};

/// Per-round record of the adversary's probes for trusted-node identification.
struct ProbeLog {
  std::vector<std::vector<std::uint32_t>> counts;  // [round-1][node]
  std::vector<std::vector<float>> byz_fraction;    // [round-1][node], view at round start
};

class HandshakeCache {
 public:
  explicit HandshakeCache(std::size_t nodes = 0) : nodes_(nodes), known_(bits(nodes)), trusted_(bits(nodes)) {}

  std::optional<bool> lookup(NodeId a, NodeId b) const;
  void store(NodeId a, NodeId b, bool mutual_trust);

 private:
  static std::size_t bits(std::size_t n) { return (n * n + 63) / 64; }
  std::size_t index(NodeId a, NodeId b) const {
    const auto lo = std::min(a.value, b.value);
    const auto hi = std::max(a.value, b.value);
    return lo * nodes_ + hi;
  }
  std::size_t nodes_;
  std::vector<std::uint64_t> known_;
  std::vector<std::uint64_t> trusted_;
};

struct SimulationState {
  RunConfig config;
  std::size_t round = 0;
  std::vector<NodeState> nodes;  // indexed by NodeId::value
  std::vector<NodeId> byz_ids;
  std::vector<NodeId> correct_ids;
  AdversaryConfig adversary;
  HandshakeCache handshakes;
  ProbeLog probes;
  std::size_t handshakes_run = 0;

  bool is_byzantine(NodeId id) const { return nodes[id.value].cls == NodeClass::Byzantine; }
  std::size_t byz_count(const View& view) const;
};

/// Builds round(f*n) Byzantine, round(t*n) trusted and the remaining honest
/// nodes, plus round(injection_fraction*n) view-poisoned trusted nodes.
/// Correct nodes start from a uniform sample of all other ids.
SimulationState build_population(const RunConfig& config);

/// Advances every node by one synchronous round.
void run_round(SimulationState& state, const AdversaryConfig& adversary, const EvictionPolicy& policy);
inline void run_round(SimulationState& state) { run_round(state, state.adversary, state.config.eviction); }

/// Measurement of the current state.
RoundMetrics measure_round(const SimulationState& state);

/// Identification labeling from probes of rounds [1, last_round].
std::vector<NodeId> identification_labels(const SimulationState& state, std::size_t last_round);

struct RunResult {
  std::vector<RoundMetrics> trace;
  std::optional<IdentReport> ident;
};

/// Builds a population, runs config.rounds rounds and measures after each.
RunResult run_experiment(const RunConfig& config);

/// Node transition applied in phase 3, exposed so tests can check that every
/// trusted class shares one implementation.
using NodeTransition = void (*)(SimulationState&, NodeState&, const EvictionPolicy&);
NodeTransition transition_for(NodeClass cls);

}  // namespace psim
