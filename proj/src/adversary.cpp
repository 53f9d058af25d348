#include "psim/adversary.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace psim {

void AdversaryConfig::validate() const {
  if (!(ident_threshold > 0.0 && ident_threshold < 1.0)) {
    throw std::invalid_argument("ident_threshold must lie in (0, 1)");
  }
  if (!(poisoned_injection_fraction >= 0.0)) {
    throw std::invalid_argument("poisoned injection fraction must be non-negative");
  }
}

std::vector<PushMessage> balanced_pushes(const AdversaryConfig& cfg, std::span<const NodeId> correct_nodes,
                                         Rng& rng) {
  std::vector<PushMessage> out;
  const std::size_t total = cfg.byz_ids.size() * cfg.push_budget_per_node;
  if (total == 0 || correct_nodes.empty()) return out;

  std::vector<NodeId> order(correct_nodes.begin(), correct_nodes.end());
  std::shuffle(order.begin(), order.end(), rng);

  out.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    out.push_back(PushMessage{order[k % order.size()], cfg.byz_ids[uniform_index(rng, cfg.byz_ids.size())]});
  }
  return out;
}

std::vector<NodeId> byzantine_pull_reply(const AdversaryConfig& cfg, std::size_t l1, Rng& rng) {
  std::vector<NodeId> out;
  const auto& byz = cfg.byz_ids;
  if (byz.empty()) return out;
  out.reserve(l1);
  if (byz.size() >= l1) {
    // Partial Fisher-Yates over a scratch copy, on whichever of the subset
    // and its complement is smaller. Reply order carries no information.
    thread_local std::vector<NodeId> pool;
    pool.assign(byz.begin(), byz.end());
    const std::size_t excluded = byz.size() - l1;
    const bool pick_kept = l1 <= excluded;
    const std::size_t draws = pick_kept ? l1 : excluded;
    for (std::size_t i = 0; i < draws; ++i) {
      std::swap(pool[i], pool[uniform_between(rng, i, pool.size() - 1)]);
    }
    if (pick_kept) {
      out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(l1));
    } else {
      out.assign(pool.begin() + static_cast<std::ptrdiff_t>(excluded), pool.end());
    }
  } else {
    for (std::size_t i = 0; i < l1; ++i) out.push_back(byz[uniform_index(rng, byz.size())]);
  }
  return out;
}

void IdentTally::add(NodeId target, double byz_fraction, std::size_t count) {
  if (count == 0) return;
  constexpr auto npos = std::numeric_limits<std::size_t>::max();
  // Dense ids index directly; sparse ones fall back to a scan.
  std::size_t slot = npos;
  if (target.value < (std::size_t{1} << 24)) {
    if (index_.size() <= target.value) index_.resize(target.value + 1, npos);
    slot = index_[target.value];
    if (slot == npos) {
      slot = entries_.size();
      index_[target.value] = slot;
      entries_.push_back(Entry{target});
    }
  } else {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.target == target; });
    slot = static_cast<std::size_t>(it - entries_.begin());
    if (it == entries_.end()) entries_.push_back(Entry{target});
  }
  entries_[slot].sum += byz_fraction * static_cast<double>(count);
  entries_[slot].count += count;
}

std::vector<NodeId> IdentTally::label(double threshold) const {
  std::vector<NodeId> out;
  if (entries_.empty()) return out;
  std::vector<double> avg(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    avg[i] = entries_[i].sum / static_cast<double>(entries_[i].count);
  }
  const double global = std::accumulate(avg.begin(), avg.end(), 0.0) / static_cast<double>(avg.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (global - avg[i] > threshold) out.push_back(entries_[i].target);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> identify_trusted(std::span<const IdentObservation> observations, double threshold) {
  IdentTally tally;
  for (const auto& obs : observations) tally.add(obs);
  return tally.label(threshold);
}

std::vector<PoisonedNode> bootstrap_poisoned_trusted(const AdversaryConfig& cfg, std::span<const NodeId> ids,
                                                     const SecretKey& trusted_key, const BrahmsParams& params,
                                                     Rng& rng) {
  if (cfg.byz_ids.empty() && !ids.empty()) {
    throw std::invalid_argument("poisoned bootstrap needs at least one Byzantine id");
  }
  std::vector<PoisonedNode> out;
  out.reserve(ids.size());
  for (NodeId id : ids) {
    View view;
    view.reserve(params.l1);
    for (NodeId b : byzantine_pull_reply(cfg, params.l1, rng)) view.push_back(ViewEntry{b, 0});
    SampleList samples(params.l2, rng);
    samples.feed(cfg.byz_ids);
    out.push_back(PoisonedNode{id, std::move(view), std::move(samples), trusted_key});
  }
  return out;
}

}  // namespace psim
