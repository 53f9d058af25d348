#include "psim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "psim/flat_id_set.hpp"

namespace psim {

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (n < 2) fail("n must be at least 2");
  if (!(f >= 0.0 && f <= 1.0)) fail("f must lie in [0, 1]");
  if (!(t >= 0.0 && t <= 1.0)) fail("t must lie in [0, 1]");
  if (f + t > 1.0 + 1e-12) fail("f + t must not exceed 1");
  const auto nd = static_cast<double>(n);
  if (round_half_up(f * nd) + round_half_up(t * nd) > n) fail("round(f*n) + round(t*n) exceeds n");
  if (round_half_up(f * nd) >= n) fail("at least one non-Byzantine node is required");
  params.validate();
  if (!(push_budget_factor >= 0.0) || !std::isfinite(push_budget_factor)) {
    fail("push_budget_factor must be a finite non-negative number");
  }
  if (!(ident_threshold > 0.0 && ident_threshold < 1.0)) fail("ident_threshold must lie in (0, 1)");
  if (!(injection_fraction >= 0.0 && injection_fraction <= 1.0)) fail("injection fraction must lie in [0, 1]");
  if (injection_fraction > 0.0 && round_half_up(injection_fraction * nd) > 0 && round_half_up(f * nd) == 0) {
    fail("view-poisoned nodes need at least one Byzantine node");
  }
}

std::optional<bool> HandshakeCache::lookup(NodeId a, NodeId b) const {
  const auto i = index(a, b);
  if (!((known_[i / 64] >> (i % 64)) & 1U)) return std::nullopt;
  return static_cast<bool>((trusted_[i / 64] >> (i % 64)) & 1U);
}

void HandshakeCache::store(NodeId a, NodeId b, bool mutual_trust) {
  const auto i = index(a, b);
  const auto bit = std::uint64_t{1} << (i % 64);
  known_[i / 64] |= bit;
  if (mutual_trust) trusted_[i / 64] |= bit;
}

std::size_t SimulationState::byz_count(const View& view) const {
  std::size_t c = 0;
  for (const auto& e : view) c += is_byzantine(e.id) ? 1 : 0;
  return c;
}

namespace {

bool correct_class(NodeClass cls) { return cls != NodeClass::Byzantine; }

void mark_seen(const SimulationState& s, NodeState& node, NodeId id) {
  if (node.seen.set(id) && correct_class(s.nodes[id.value].cls)) ++node.seen_correct;
}

void refresh_seen(const SimulationState& s, NodeState& node) {
  for (const auto& e : node.view) mark_seen(s, node, e.id);
  for (NodeId id : node.samples.stored_ids()) mark_seen(s, node, id);
}

// Offers only never-fed ids to the samplers; exact for min-wise samplers.
void feed_fresh(NodeState& node, std::span<const NodeId> ids, std::vector<NodeId>& scratch) {
  for (NodeId id : ids) {
    if (node.fed.set(id)) scratch.push_back(id);
  }
}

// Sampling, flood check and renewal shared by every correct class.
void brahms_step(SimulationState& s, NodeState& node, Rng& rng) {
  const auto& params = s.config.params;
  std::vector<NodeId> fresh;
  feed_fresh(node, node.inbox.pushes, fresh);
  feed_fresh(node, node.inbox.pulled_untrusted, fresh);
  feed_fresh(node, node.inbox.pulled_trusted, fresh);
  node.samples.feed(fresh);

  node.last.blocked = detect_push_flood(node.inbox, params);
  if (node.last.blocked) {
    age_view(node.view);
  } else {
    auto renewed = renew_view(node.view, node.inbox, node.samples, params, node.id, rng);
    node.last.renewed = !renewed.kept_previous;
    node.view = std::move(renewed.view);
  }
  refresh_seen(s, node);
}

void plain_transition(SimulationState& s, NodeState& node, const EvictionPolicy&) { brahms_step(s, node, node.rng); }

void trusted_transition(SimulationState& s, NodeState& node, const EvictionPolicy& policy) {
  const double rate = policy.rate(node.last.trusted_partners, node.last.pull_partners);
  node.last.eviction_rate = rate;
  node.inbox.pulled_untrusted = evict(node.inbox.pulled_untrusted, rate, node.rng);
  brahms_step(s, node, node.rng);
}

void bootstrap_node(SimulationState& s, NodeState& node) {
  node.fed = IdBits(s.nodes.size());
  node.seen = IdBits(s.nodes.size());
  node.fed.set(node.id);  // a node never samples itself
  mark_seen(s, node, node.id);
  std::vector<NodeId> fresh;
  for (const auto& e : node.view) {
    if (node.fed.set(e.id)) fresh.push_back(e.id);
  }
  node.samples.feed(fresh);
  refresh_seen(s, node);
}

}  // namespace

NodeTransition transition_for(NodeClass cls) {
  switch (cls) {
    case NodeClass::Trusted:
    case NodeClass::PoisonedTrusted:
      return &trusted_transition;
    case NodeClass::Honest:
      return &plain_transition;
    case NodeClass::Byzantine:
      return nullptr;
  }
  return nullptr;
}

SimulationState build_population(const RunConfig& config) {
  config.validate();
  const auto& params = config.params;
  const std::size_t n = config.n;
  const auto nd = static_cast<double>(n);
  const std::size_t byz = round_half_up(config.f * nd);
  const std::size_t trusted = round_half_up(config.t * nd);
  const std::size_t poisoned = round_half_up(config.injection_fraction * nd);
  const std::size_t total = n + poisoned;

  std::vector<NodeClass> classes(n, NodeClass::Honest);
  std::fill_n(classes.begin(), byz, NodeClass::Byzantine);
  std::fill_n(classes.begin() + static_cast<std::ptrdiff_t>(byz), trusted, NodeClass::Trusted);
  auto boot = make_stream(config.seed, kGlobalStream, 0, Phase::Bootstrap);
  std::shuffle(classes.begin(), classes.end(), boot);
  classes.resize(total, NodeClass::PoisonedTrusted);

  auto key_rng = make_stream(config.seed, kGlobalStream, 0, Phase::Keys);
  const SecretKey trusted_key = SecretKey::random(key_rng);

  SimulationState s{.config = config,
                    .round = 0,
                    .nodes = {},
                    .byz_ids = {},
                    .correct_ids = {},
                    .adversary = {},
                    .handshakes = HandshakeCache(config.cache_handshakes ? total : 0),
                    .probes = {},
                    .handshakes_run = 0};
  s.nodes.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const NodeId id{i};
    const auto cls = classes[i];
    auto own_keys = make_stream(config.seed, i, 0, Phase::Keys);
    SecretKey key = is_trusted(cls) ? trusted_key : SecretKey::random(own_keys);
    s.nodes.push_back(NodeState{.id = id,
                                .cls = cls,
                                .view = {},
                                .samples = {},
                                .key = std::move(key),
                                .inbox = {},
                                .fed = {},
                                .seen = {},
                                .seen_correct = 0,
                                .last = {},
                                .rng = {},
                                .handshake_rng = {}});
    (cls == NodeClass::Byzantine ? s.byz_ids : s.correct_ids).push_back(id);
  }

  s.adversary.byz_ids = s.byz_ids;
  s.adversary.push_budget_per_node =
      round_half_up(config.push_budget_factor * static_cast<double>(params.push_quota()));
  s.adversary.ident_threshold = config.ident_threshold;
  s.adversary.poisoned_injection_fraction = config.injection_fraction;

  // Uniform bootstrap views over the whole membership (poisoned nodes included).
  const std::size_t view_len = std::min(params.l1, total - 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = s.nodes[i];
    if (node.cls == NodeClass::Byzantine) continue;
    auto rng = make_stream(config.seed, i, 0, Phase::Bootstrap);
    PositionDrawer drawer(total - 1, view_len);
    node.view.reserve(params.l1);
    for (std::size_t k = 0; k < view_len; ++k) {
      std::size_t pos = drawer.next(rng);
      if (pos >= i) ++pos;  // skip self
      node.view.push_back(ViewEntry{NodeId{pos}, 0});
    }
    auto sampler_rng = make_stream(config.seed, i, 0, Phase::Samplers);
    node.samples = SampleList(params.l2, sampler_rng);
  }

  if (poisoned > 0) {
    std::vector<NodeId> ids;
    for (std::size_t i = n; i < total; ++i) ids.push_back(NodeId{i});
    auto rng = make_stream(config.seed, kGlobalStream, 0, Phase::Adversary);
    auto states = bootstrap_poisoned_trusted(s.adversary, ids, trusted_key, params, rng);
    for (auto& p : states) {
      auto& node = s.nodes[p.id.value];
      node.view = std::move(p.view);
      node.samples = std::move(p.samples);
    }
  }

  for (auto& node : s.nodes) {
    if (node.cls == NodeClass::Byzantine) continue;
    bootstrap_node(s, node);
    if (node.cls == NodeClass::PoisonedTrusted) {
      // Their samplers already consumed every Byzantine id.
      for (NodeId b : s.byz_ids) node.fed.set(b);
    }
  }
  return s;
}

namespace {

bool mutual_trust(SimulationState& s, NodeState& initiator, NodeState& responder) {
  const bool cache = s.config.cache_handshakes;
  if (cache) {
    if (auto hit = s.handshakes.lookup(initiator.id, responder.id)) return *hit;
  }
  const auto result = handshake(initiator.key, responder.key, initiator.handshake_rng);
  ++s.handshakes_run;
  const bool both = result.initiator_trusts && result.responder_trusts;
  if (cache) s.handshakes.store(initiator.id, responder.id, both);
  return both;
}

}  // namespace

void run_round(SimulationState& s, const AdversaryConfig& adversary, const EvictionPolicy& policy) {
  const auto& params = s.config.params;
  const std::uint64_t seed = s.config.seed;
  const std::size_t r = s.round + 1;  // streams are keyed by the round being played

  for (NodeId id : s.correct_ids) {
    auto& node = s.nodes[id.value];
    node.inbox.clear();
    node.last = NodeRoundStats{};
    node.rng.seed(derive_seed(seed, id.value, r, Phase::Gossip));
    node.handshake_rng.seed(derive_seed(seed, id.value, r, Phase::Handshake));
  }

  // Phase 1: pushes.
  for (NodeId id : s.correct_ids) {
    auto& node = s.nodes[id.value];
    for (NodeId target : select_push_targets(node.view, params, node.rng)) {
      auto& dst = s.nodes[target.value];
      if (dst.cls != NodeClass::Byzantine) dst.inbox.pushes.push_back(id);
    }
  }
  if (!adversary.byz_ids.empty() && adversary.push_budget_per_node > 0) {
    auto rng = make_stream(seed, kGlobalStream, r, Phase::Adversary);
    for (const auto& msg : balanced_pushes(adversary, s.correct_ids, rng)) {
      s.nodes[msg.target.value].inbox.pushes.push_back(msg.pushed);
    }
  }

  // Phase 2: handshakes and pulls, all against round-start views.
  for (NodeId id : s.correct_ids) {
    auto& node = s.nodes[id.value];
    auto& rng = node.rng;
    const bool node_trusted = is_trusted(node.cls);
    for (NodeId target : select_pull_targets(node.view, params, rng)) {
      auto& peer = s.nodes[target.value];
      ++node.last.pull_partners;
      ++node.last.pull_replies;
      const bool trusted_pair = mutual_trust(s, node, peer);
      if (peer.cls == NodeClass::Byzantine) {
        auto reply = byzantine_pull_reply(adversary, params.l1, rng);
        node.last.pulled_ids += reply.size();
        node.inbox.pulled_untrusted.insert(node.inbox.pulled_untrusted.end(), reply.begin(), reply.end());
      } else if (trusted_pair && node_trusted) {
        ++node.last.trusted_partners;
        auto ex = trusted_exchange(node.view, peer.view, node.id, peer.id, rng);
        node.last.pulled_ids += ex.received_by_initiator.size();
        node.inbox.pulled_trusted.insert(node.inbox.pulled_trusted.end(), ex.received_by_initiator.begin(),
                                         ex.received_by_initiator.end());
        peer.inbox.pulled_trusted.insert(peer.inbox.pulled_trusted.end(), ex.received_by_responder.begin(),
                                         ex.received_by_responder.end());
      } else {
        node.last.pulled_ids += peer.view.size();
        for (const auto& e : peer.view) node.inbox.pulled_untrusted.push_back(e.id);
      }
    }
  }

  // Identification probes: read-only pulls by Byzantine nodes.
  if (s.config.identification) {
    auto& counts = s.probes.counts.emplace_back(s.nodes.size(), 0);
    auto& fracs = s.probes.byz_fraction.emplace_back(s.nodes.size(), 0.0f);
    const std::size_t per_node = params.pull_quota();
    for (NodeId b : s.byz_ids) {
      auto rng = make_stream(seed, b.value, r, Phase::Probe);
      for (std::size_t k = 0; k < per_node && !s.correct_ids.empty(); ++k) {
        const NodeId target = s.correct_ids[uniform_index(rng, s.correct_ids.size())];
        ++counts[target.value];
      }
    }
    for (NodeId id : s.correct_ids) {
      if (counts[id.value] == 0) continue;
      const auto& v = s.nodes[id.value].view;
      fracs[id.value] =
          v.empty() ? 0.0f : static_cast<float>(static_cast<double>(s.byz_count(v)) / static_cast<double>(v.size()));
    }
  }

  // Phase 3: per-node eviction, sampling and renewal.
  s.round = r;
  for (NodeId id : s.correct_ids) {
    auto& node = s.nodes[id.value];
    node.last.pushes_received = node.inbox.pushes.size();
    transition_for(node.cls)(s, node, policy);
  }
  for (auto& node : s.nodes) node.inbox.clear();
}

RoundMetrics measure_round(const SimulationState& s) {
  RoundMetrics m;
  m.round = s.round;
  const double total_correct = static_cast<double>(s.correct_ids.size());
  double sum = 0.0, trusted_sum = 0.0, honest_sum = 0.0;
  std::size_t trusted_n = 0, honest_n = 0;
  double lo = 1.0, hi = 0.0, disc = 1.0;
  double ev_lo = kNaN, ev_hi = kNaN;
  std::vector<double> indeg(s.nodes.size(), 0.0);

  for (NodeId id : s.correct_ids) {
    const auto& node = s.nodes[id.value];
    const double frac = node.view.empty() ? 0.0
                                          : static_cast<double>(s.byz_count(node.view)) /
                                                static_cast<double>(node.view.size());
    sum += frac;
    lo = std::min(lo, frac);
    hi = std::max(hi, frac);
    if (is_trusted(node.cls)) {
      trusted_sum += frac;
      ++trusted_n;
    } else {
      honest_sum += frac;
      ++honest_n;
    }
    disc = std::min(disc, static_cast<double>(node.seen_correct) / total_correct);
    if (node.last.eviction_rate) {
      const double e = *node.last.eviction_rate;
      ev_lo = std::isnan(ev_lo) ? e : std::min(ev_lo, e);
      ev_hi = std::isnan(ev_hi) ? e : std::max(ev_hi, e);
    }
    if (node.last.blocked) ++m.blocked_nodes;
    for (const auto& e : node.view) indeg[e.id.value] += 1.0;
  }

  m.mean_byz_fraction = sum / total_correct;
  m.min_byz_fraction = lo;
  m.max_byz_fraction = hi;
  if (trusted_n) m.trusted_mean_byz_fraction = trusted_sum / static_cast<double>(trusted_n);
  if (honest_n) m.honest_mean_byz_fraction = honest_sum / static_cast<double>(honest_n);
  m.discovery_fraction = disc;
  m.min_eviction_rate = ev_lo;
  m.max_eviction_rate = ev_hi;

  double mean = 0.0;
  for (NodeId id : s.correct_ids) mean += indeg[id.value];
  mean /= total_correct;
  if (mean > 0.0) {
    double var = 0.0;
    for (NodeId id : s.correct_ids) var += (indeg[id.value] - mean) * (indeg[id.value] - mean);
    m.in_degree_cv = std::sqrt(var / total_correct) / mean;
  }
  return m;
}

std::vector<NodeId> identification_labels(const SimulationState& s, std::size_t last_round) {
  IdentTally tally;
  const std::size_t rounds = std::min(last_round, s.probes.counts.size());
  for (std::size_t r = 0; r < rounds; ++r) {
    for (NodeId id : s.correct_ids) {
      const auto c = s.probes.counts[r][id.value];
      if (c) tally.add(id, static_cast<double>(s.probes.byz_fraction[r][id.value]), c);
    }
  }
  return tally.label(s.config.ident_threshold);
}

RunResult run_experiment(const RunConfig& config) {
  auto state = build_population(config);
  RunResult out;
  out.trace.reserve(config.rounds + 1);
  out.trace.push_back(measure_round(state));
  for (std::size_t r = 0; r < config.rounds; ++r) {
    run_round(state);
    out.trace.push_back(measure_round(state));
  }
  mark_stability(out.trace);

  if (config.identification) {
    const auto stab = stability_time(out.trace);
    const std::size_t window = stab ? std::max<std::size_t>(1, *stab) : config.rounds;
    const auto labels = identification_labels(state, window);
    std::vector<NodeId> truth;
    for (NodeId id : state.correct_ids) {
      if (is_trusted(state.nodes[id.value].cls)) truth.push_back(id);
    }
    auto report = ident_report(labels, truth);
    report.poisoned_labeled = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [&](NodeId id) {
      return state.nodes[id.value].cls == NodeClass::PoisonedTrusted;
    }));
    out.ident = report;
  }
  return out;
}

}  // namespace psim
