// Brahms node logic: target selection, flood detection, view renewal.

#include <algorithm>
#include <map>
#include <set>

#include "catch_amalgamated.hpp"
#include "psim/brahms.hpp"

using namespace psim;

namespace {

View make_view(std::uint64_t first, std::size_t n) {
  View v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(ViewEntry{NodeId{first + i}, 0});
  return v;
}

std::vector<NodeId> ids(std::uint64_t first, std::size_t n) {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(NodeId{first + i});
  return out;
}

bool in_view(const View& v, NodeId id) {
  return std::any_of(v.begin(), v.end(), [&](const ViewEntry& e) { return e.id == id; });
}

BrahmsParams small_params() {
  BrahmsParams p;
  p.l1 = 10;
  p.l2 = 10;
  return p;
}

// Source of an id by construction: pushes in [1000, 2000), pulls in
// [2000, 3000), history in [3000, 4000).
int source_of(NodeId id) { return static_cast<int>(id.value / 1000) - 1; }

}  // namespace

TEST_CASE("quota arithmetic", "[brahms]") {
  BrahmsParams p;
  REQUIRE(p.push_quota() == 80);
  REQUIRE(p.pull_quota() == 80);
  REQUIRE(p.history_quota() == 40);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    BrahmsParams q;
    q.l1 = 1 + rng() % 500;
    q.alpha = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    q.beta = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    q.gamma = 1.0 - q.alpha - q.beta;
    REQUIRE(q.push_quota() + q.pull_quota() + q.history_quota() == q.l1);
  }
  BrahmsParams bad;
  bad.gamma = 0.3;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  REQUIRE_NOTHROW(BrahmsParams{}.validate());
}

TEST_CASE("push targets", "[brahms]") {
  const auto p = small_params();
  const View v = make_view(100, 10);
  Rng rng(4);
  const auto t = select_push_targets(v, p, rng);
  REQUIRE(t.size() == 4);
  REQUIRE(std::set<NodeId>(t.begin(), t.end()).size() == 4);
  for (auto id : t) REQUIRE(in_view(v, id));

  BrahmsParams all = p;
  all.alpha = 1.0;
  all.beta = 0.0;
  all.gamma = 0.0;
  auto whole = select_push_targets(v, all, rng);
  std::sort(whole.begin(), whole.end());
  REQUIRE(whole == ids(100, 10));

  Rng r1(77), r2(77);
  REQUIRE(select_push_targets(v, p, r1) == select_push_targets(v, p, r2));

  // Short bootstrap views return everything they hold.
  REQUIRE(select_push_targets(make_view(1, 3), p, rng).size() == 3);
}

TEST_CASE("pull targets", "[brahms]") {
  BrahmsParams p;
  const View v = make_view(1, 200);
  Rng rng(8);
  const auto t = select_pull_targets(v, p, rng);
  REQUIRE(t.size() == 80);
  REQUIRE(std::set<NodeId>(t.begin(), t.end()).size() == 80);

  BrahmsParams none = p;
  none.beta = 0.0;
  none.gamma = 0.6;
  REQUIRE(select_pull_targets(v, none, rng).empty());

  // Independent draws overlap with the push targets sometimes.
  bool overlap = false;
  for (int i = 0; i < 50 && !overlap; ++i) {
    const auto push = select_push_targets(v, p, rng);
    const auto pull = select_pull_targets(v, p, rng);
    const std::set<NodeId> ps(push.begin(), push.end());
    overlap = std::any_of(pull.begin(), pull.end(), [&](NodeId id) { return ps.count(id) > 0; });
  }
  REQUIRE(overlap);
}

TEST_CASE("push flood detection", "[brahms]") {
  const auto p = small_params();
  RoundInbox in;
  REQUIRE_FALSE(detect_push_flood(in, p));
  in.pushes = ids(1, 4);
  REQUIRE_FALSE(detect_push_flood(in, p));
  in.pushes = ids(1, 5);
  REQUIRE(detect_push_flood(in, p));
}

TEST_CASE("pull replies", "[brahms]") {
  const View v = make_view(1, 200);
  REQUIRE(make_pull_reply(v).size() == 200);
  REQUIRE(make_pull_reply(make_view(1, 5)) == ids(1, 5));
  const NodeId self{0};
  for (auto id : make_pull_reply(v)) REQUIRE(id != self);
}

TEST_CASE("renewal composition with all sources", "[brahms]") {
  const auto p = small_params();
  Rng rng(12);
  SampleList samples(10, rng);
  samples.feed(ids(3000, 50));
  RoundInbox in;
  in.pushes = ids(1000, 30);
  in.pulled_untrusted = ids(2000, 30);
  const auto res = renew_view(make_view(1, 10), in, samples, p, NodeId{0}, rng);
  REQUIRE(res.view.size() == 10);
  std::array<std::size_t, 3> seen{};
  for (const auto& e : res.view) {
    ++seen[static_cast<std::size_t>(source_of(e.id))];
    REQUIRE(e.age == 0);
  }
  REQUIRE(seen == std::array<std::size_t, 3>{4, 4, 2});
  REQUIRE(res.drawn == seen);
}

TEST_CASE("renewal composition property", "[brahms][property]") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    BrahmsParams p;
    p.l1 = 5 + rng() % 60;
    p.l2 = 5 + rng() % 30;
    p.alpha = std::uniform_real_distribution<double>(0.1, 0.5)(rng);
    p.beta = std::uniform_real_distribution<double>(0.1, 0.4)(rng);
    p.gamma = 1.0 - p.alpha - p.beta;
    SampleList samples(p.l2, rng);
    samples.feed(ids(3000, 200));
    RoundInbox in;
    in.pushes = ids(1000, p.l1 * 2);
    in.pulled_untrusted = ids(2000, p.l1);
    in.pulled_trusted = ids(2500, p.l1);
    // Samplers may share ids; the history quota needs enough distinct ones.
    const auto stored = samples.stored_ids();
    if (std::set<NodeId>(stored.begin(), stored.end()).size() < p.history_quota()) continue;
    const auto res = renew_view({}, in, samples, p, NodeId{0}, rng);
    std::array<std::size_t, 3> seen{};
    for (const auto& e : res.view) ++seen[static_cast<std::size_t>(source_of(e.id))];
    REQUIRE(seen == std::array<std::size_t, 3>{p.push_quota(), p.pull_quota(), p.history_quota()});
  }
}

TEST_CASE("empty push stream reassigns its quota", "[brahms]") {
  const auto p = small_params();
  Rng rng(5);
  SampleList samples(10, rng);
  samples.feed(ids(3000, 100));
  RoundInbox in;
  in.pulled_untrusted = ids(2000, 40);
  const auto res = renew_view(make_view(1, 10), in, samples, p, NodeId{0}, rng);
  REQUIRE(res.view.size() == 10);
  // Push quota 4 splits 2/2: pull 4+2, history 2+2.
  std::array<std::size_t, 3> seen{};
  for (const auto& e : res.view) ++seen[static_cast<std::size_t>(source_of(e.id))];
  REQUIRE(seen == std::array<std::size_t, 3>{0, 6, 4});
}

TEST_CASE("all sources empty keeps the view", "[brahms]") {
  const auto p = small_params();
  Rng rng(5);
  SampleList samples(10, rng);
  View v = make_view(1, 10);
  RoundInbox in;
  in.pushes = {NodeId{0}};  // only self: unusable
  const auto res = renew_view(v, in, samples, p, NodeId{0}, rng);
  REQUIRE(res.kept_previous);
  for (std::size_t i = 0; i < v.size(); ++i) {
    REQUIRE(res.view[i].id == v[i].id);
    REQUIRE(res.view[i].age == 1);
  }
}

TEST_CASE("blocked rounds only age the view", "[brahms]") {
  View v = make_view(1, 10);
  v[3].age = 7;
  auto copy = v;
  age_view(copy);
  for (std::size_t i = 0; i < v.size(); ++i) {
    REQUIRE(copy[i].id == v[i].id);
    REQUIRE(copy[i].age == v[i].age + 1);
  }
}

TEST_CASE("own id never enters the view", "[brahms]") {
  const auto p = small_params();
  Rng rng(2);
  const NodeId self{2005};
  for (int trial = 0; trial < 100; ++trial) {
    SampleList samples(10, rng);
    samples.feed(ids(2000, 12));
    RoundInbox in;
    in.pushes = std::vector<NodeId>(20, self);
    in.pushes.push_back(NodeId{1001});
    in.pulled_untrusted = ids(2000, 12);
    const auto res = renew_view({}, in, samples, p, self, rng);
    REQUIRE(res.view.size() == 10);
    REQUIRE_FALSE(in_view(res.view, self));
  }
}

TEST_CASE("duplicates only when distinct ids run out", "[brahms]") {
  const auto p = small_params();
  Rng rng(9);
  SampleList samples(10, rng);
  samples.feed(ids(3000, 2));
  RoundInbox in;
  in.pushes = ids(1000, 2);
  in.pulled_untrusted = ids(2000, 1);
  const auto res = renew_view({}, in, samples, p, NodeId{0}, rng);
  REQUIRE(res.view.size() == 10);
  std::set<NodeId> distinct;
  for (const auto& e : res.view) distinct.insert(e.id);
  REQUIRE(distinct.size() == 5);

  // Plenty of distinct ids: no duplicates at all.
  in.pushes = ids(1000, 100);
  in.pulled_untrusted = ids(2000, 100);
  samples.feed(ids(3000, 100));
  const auto full = renew_view({}, in, samples, p, NodeId{0}, rng);
  distinct.clear();
  for (const auto& e : full.view) distinct.insert(e.id);
  REQUIRE(distinct.size() == 10);
}

TEST_CASE("pushes are sampled as a multiset", "[brahms]") {
  // One sender pushing many times dominates the push quota.
  BrahmsParams p = small_params();
  p.alpha = 0.1;  // one pushed slot
  p.beta = 0.5;
  p.gamma = 0.4;
  Rng rng(6);
  SampleList samples(10, rng);
  samples.feed(ids(3000, 40));
  RoundInbox in;
  in.pushes = std::vector<NodeId>(9, NodeId{1000});
  in.pushes.push_back(NodeId{1001});
  in.pulled_untrusted = ids(2000, 40);
  int heavy = 0;
  for (int i = 0; i < 2000; ++i) heavy += in_view(renew_view({}, in, samples, p, NodeId{0}, rng).view, NodeId{1000});
  REQUIRE(heavy / 2000.0 == Catch::Approx(0.9).margin(0.03));
}

TEST_CASE("ages count rounds since insertion", "[brahms][property]") {
  const auto p = small_params();
  Rng rng(40);
  SampleList samples(10, rng);
  samples.feed(ids(3000, 30));
  View view = make_view(5000, 10);
  std::map<NodeId, std::size_t> inserted;
  for (const auto& e : view) inserted[e.id] = 0;
  for (std::size_t round = 1; round <= 60; ++round) {
    RoundInbox in;
    // Narrow pools so ids persist across rounds.
    for (int i = 0; i < 6; ++i) in.pushes.push_back(NodeId{1000 + rng() % 8});
    for (int i = 0; i < 12; ++i) in.pulled_untrusted.push_back(NodeId{2000 + rng() % 8});
    const View prev = view;
    if (round % 7 == 0) {
      age_view(view);
    } else {
      view = renew_view(view, in, samples, p, NodeId{0}, rng).view;
    }
    for (const auto& e : view) {
      if (!in_view(prev, e.id)) inserted[e.id] = round;
      REQUIRE(e.age == round - inserted[e.id]);
    }
  }
}
