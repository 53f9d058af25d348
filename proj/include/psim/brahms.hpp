#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "psim/node_id.hpp"
#include "psim/rng.hpp"
#include "psim/sampler.hpp"

namespace psim {

struct ViewEntry {
  NodeId id;
  std::uint32_t age = 0;  // completed rounds since insertion

  bool operator==(const ViewEntry&) const = default;
};

/// Dynamic view V. Holds exactly l1 entries after every completed round.
using View = std::vector<ViewEntry>;

/// x rounded half away from zero, tolerant to representation error in x.
std::size_t round_half_up(double x);

struct BrahmsParams {
  std::size_t l1 = 200;
  std::size_t l2 = 200;
  double alpha = 0.4;
  double beta = 0.4;
  double gamma = 0.2;

  std::size_t push_quota() const { return round_half_up(alpha * static_cast<double>(l1)); }
  std::size_t pull_quota() const { return round_half_up(beta * static_cast<double>(l1)); }
  /// Remainder, so the three quotas always sum to l1.
  std::size_t history_quota() const { return l1 - push_quota() - pull_quota(); }

  /// Throws std::invalid_argument on sizes of zero, fractions outside [0, 1],
  /// alpha + beta + gamma != 1, or quotas exceeding l1.
  void validate() const;
};

struct RoundInbox {
  std::vector<NodeId> pushes;
  std::vector<NodeId> pulled_untrusted;
  std::vector<NodeId> pulled_trusted;  // empty for untrusted nodes

  void clear() {
    pushes.clear();
    pulled_untrusted.clear();
    pulled_trusted.clear();
  }
};

/// round(alpha * l1) distinct view positions, uniformly, as ids.
std::vector<NodeId> select_push_targets(const View& view, const BrahmsParams& params, Rng& rng);

/// round(beta * l1) distinct view positions, drawn independently of the pushes.
std::vector<NodeId> select_pull_targets(const View& view, const BrahmsParams& params, Rng& rng);

/// Attack detection: more pushes than the expected alpha * l1.
bool detect_push_flood(const RoundInbox& inbox, const BrahmsParams& params);

/// Full view snapshot sent in answer to a pull request.
std::vector<NodeId> make_pull_reply(const View& view);

/// Ages every entry by one round (blocked or skipped renewal).
void age_view(View& view);

enum class ViewSource : std::uint8_t { Push = 0, Pull = 1, History = 2 };

struct RenewResult {
  View view;
  /// Entries contributed by each ViewSource.
  std::array<std::size_t, 3> drawn{};
  /// True when every source was empty and the old view was kept (aged).
  bool kept_previous = false;
};

/// End-of-round view renewal from pushed, pulled and history ids.
///
/// The pulled stream is inbox.pulled_untrusted (already filtered by any
/// eviction) followed by inbox.pulled_trusted; the history stream is the ids
/// held by the sample list. Each source fills its quota with distinct ids
/// drawn uniformly from its multiset, never including self. The quota of an
/// empty source is split evenly over the non-empty ones. If the sources hold
/// fewer than l1 distinct ids, the view is padded with repeats. Ids carried
/// over from the current view keep their age plus one; new ids start at 0.
RenewResult renew_view(const View& current, const RoundInbox& inbox, const SampleList& samples,
                       const BrahmsParams& params, NodeId self, Rng& rng);

}  // namespace psim
