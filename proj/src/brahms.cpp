#include "psim/brahms.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "psim/flat_id_set.hpp"

namespace psim {

std::size_t round_half_up(double x) {
  if (x <= 0.0) return 0;
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

void BrahmsParams::validate() const {
  if (l1 == 0) throw std::invalid_argument("l1 must be positive");
  if (l2 == 0) throw std::invalid_argument("l2 must be positive");
  for (double v : {alpha, beta, gamma}) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("alpha, beta and gamma must lie in [0, 1]");
  }
  if (std::abs(alpha + beta + gamma - 1.0) > 1e-9) {
    throw std::invalid_argument("alpha + beta + gamma must equal 1 (got " +
                                std::to_string(alpha + beta + gamma) + ")");
  }
  if (push_quota() + pull_quota() > l1) {
    throw std::invalid_argument("rounded push and pull quotas exceed l1");
  }
}

namespace {

std::vector<NodeId> draw_targets(const View& view, std::size_t count, Rng& rng) {
  count = std::min(count, view.size());
  std::vector<NodeId> out;
  out.reserve(count);
  PositionDrawer drawer(view.size(), count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(view[drawer.next(rng)].id);
  return out;
}

// A source multiset made of up to two contiguous segments, drawn without
// replacement by position.
class Source {
 public:
  Source(std::span<const NodeId> head, std::span<const NodeId> tail, std::size_t expected_draws)
      : head_(head), tail_(tail), drawer_(head.size() + tail.size(), expected_draws) {}

  std::size_t size() const { return head_.size() + tail_.size(); }
  bool exhausted() const { return drawer_.exhausted(); }

  NodeId at(std::size_t pos) const {
    return pos < head_.size() ? head_[pos] : tail_[pos - head_.size()];
  }

  NodeId draw(Rng& rng) { return at(drawer_.next(rng)); }

  bool has_other_than(NodeId self) const {
    for (auto id : head_) {
      if (id != self) return true;
    }
    for (auto id : tail_) {
      if (id != self) return true;
    }
    return false;
  }

 private:
  std::span<const NodeId> head_;
  std::span<const NodeId> tail_;
  PositionDrawer drawer_;
};

}  // namespace

std::vector<NodeId> select_push_targets(const View& view, const BrahmsParams& params, Rng& rng) {
  return draw_targets(view, params.push_quota(), rng);
}

std::vector<NodeId> select_pull_targets(const View& view, const BrahmsParams& params, Rng& rng) {
  return draw_targets(view, params.pull_quota(), rng);
}

bool detect_push_flood(const RoundInbox& inbox, const BrahmsParams& params) {
  return inbox.pushes.size() > params.push_quota();
}

std::vector<NodeId> make_pull_reply(const View& view) {
  std::vector<NodeId> out;
  out.reserve(view.size());
  for (const auto& e : view) out.push_back(e.id);
  return out;
}

void age_view(View& view) {
  for (auto& e : view) ++e.age;
}

RenewResult renew_view(const View& current, const RoundInbox& inbox, const SampleList& samples,
                       const BrahmsParams& params, NodeId self, Rng& rng) {
  const std::size_t l1 = params.l1;
  const std::vector<NodeId> history = samples.stored_ids();

  std::array<std::size_t, 3> quota{params.push_quota(), params.pull_quota(), params.history_quota()};
  std::array<Source, 3> sources{
      Source(inbox.pushes, {}, quota[0]),
      Source(inbox.pulled_untrusted, inbox.pulled_trusted, quota[1]),
      Source(history, {}, quota[2]),
  };

  std::array<bool, 3> usable{};
  std::size_t usable_count = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    usable[s] = sources[s].has_other_than(self);
    usable_count += usable[s] ? 1 : 0;
  }

  RenewResult result;
  if (usable_count == 0) {
    result.view = current;
    age_view(result.view);
    result.kept_previous = true;
    return result;
  }

  // Split the quota of each empty source evenly; the remainder goes to the
  // earliest usable sources (push, pull, history order).
  for (std::size_t s = 0; s < 3; ++s) {
    if (usable[s] || quota[s] == 0) continue;
    const std::size_t share = quota[s] / usable_count;
    std::size_t rem = quota[s] % usable_count;
    quota[s] = 0;
    for (std::size_t o = 0; o < 3; ++o) {
      if (!usable[o]) continue;
      quota[o] += share + (rem > 0 ? 1 : 0);
      if (rem > 0) --rem;
    }
  }

  FlatU64Map old_age(current.size());
  for (const auto& e : current) old_age.insert(e.id.value, e.age);

  FlatU64Map chosen(l1);
  View& view = result.view;
  view.reserve(l1);

  auto admit = [&](NodeId id, std::size_t s) {
    if (id == self || !chosen.insert(id.value, 0)) return false;
    const auto* prev = old_age.find(id.value);
    view.push_back(ViewEntry{id, prev ? static_cast<std::uint32_t>(*prev + 1) : 0U});
    ++result.drawn[s];
    return true;
  };

  for (std::size_t s = 0; s < 3; ++s) {
    if (!usable[s]) continue;
    std::size_t taken = 0;
    while (taken < quota[s] && !sources[s].exhausted()) {
      if (admit(sources[s].draw(rng), s)) ++taken;
    }
  }

  // A source ran out of distinct ids: keep drawing from the others, one
  // admitted id per source per pass.
  bool progress = true;
  while (view.size() < l1 && progress) {
    progress = false;
    for (std::size_t s = 0; s < 3 && view.size() < l1; ++s) {
      while (usable[s] && !sources[s].exhausted()) {
        if (admit(sources[s].draw(rng), s)) {
          progress = true;
          break;
        }
      }
    }
  }

  // Fewer than l1 distinct ids exist: pad with repeats.
  if (view.size() < l1) {
    std::size_t total = 0;
    for (std::size_t s = 0; s < 3; ++s) total += usable[s] ? sources[s].size() : 0;
    while (view.size() < l1) {
      std::size_t pos = uniform_index(rng, total);
      std::size_t s = 0;
      for (; s < 3; ++s) {
        if (!usable[s]) continue;
        if (pos < sources[s].size()) break;
        pos -= sources[s].size();
      }
      const NodeId id = sources[s].at(pos);
      if (id == self) continue;
      const auto* prev = old_age.find(id.value);
      view.push_back(ViewEntry{id, prev ? static_cast<std::uint32_t>(*prev + 1) : 0U});
      ++result.drawn[s];
    }
  }
  return result;
}

}  // namespace psim
