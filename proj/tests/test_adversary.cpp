#include <algorithm>
#include <map>
#include <set>

#include "catch_amalgamated.hpp"
#include "psim/adversary.hpp"

using namespace psim;

namespace {

std::vector<NodeId> range_ids(std::uint64_t first, std::size_t n) {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(NodeId{first + i});
  return out;
}

IdentObservation obs(std::uint64_t target, double frac) {
  return IdentObservation{NodeId{9999}, NodeId{target}, frac, 1};
}

}  // namespace

TEST_CASE("adversary config validation", "[adversary]") {
  AdversaryConfig c;
  REQUIRE_NOTHROW(c.validate());
  c.ident_threshold = 0.0;
  REQUIRE_THROWS_AS(c.validate(), std::invalid_argument);
  c.ident_threshold = 1.0;
  REQUIRE_THROWS_AS(c.validate(), std::invalid_argument);
  c.ident_threshold = 0.1;
  c.poisoned_injection_fraction = -0.01;
  REQUIRE_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("balanced pushes", "[adversary]") {
  Rng rng(1);
  AdversaryConfig c;
  c.byz_ids = range_ids(1000, 10);
  c.push_budget_per_node = 4;
  const auto correct = range_ids(0, 100);

  const auto pushes = balanced_pushes(c, correct, rng);
  REQUIRE(pushes.size() == 40);
  std::map<NodeId, int> per_target;
  for (const auto& p : pushes) {
    ++per_target[p.target];
    REQUIRE(std::binary_search(c.byz_ids.begin(), c.byz_ids.end(), p.pushed));
    REQUIRE(p.target.value < 100);
  }
  for (const auto& [t, n] : per_target) REQUIRE(n == 1);

  c.push_budget_per_node = 0;
  REQUIRE(balanced_pushes(c, correct, rng).empty());
}

TEST_CASE("balanced pushes stay balanced", "[adversary][property]") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    AdversaryConfig c;
    c.byz_ids = range_ids(5000, 1 + rng() % 60);
    c.push_budget_per_node = rng() % 30;
    const auto correct = range_ids(0, 1 + rng() % 150);
    const auto pushes = balanced_pushes(c, correct, rng);
    REQUIRE(pushes.size() == c.byz_ids.size() * c.push_budget_per_node);
    std::vector<int> count(correct.size(), 0);
    for (const auto& p : pushes) {
      ++count[p.target.value];
      REQUIRE(p.pushed.value >= 5000);
    }
    const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
    REQUIRE(*hi - *lo <= 1);
  }
}

TEST_CASE("byzantine pull reply", "[adversary]") {
  Rng rng(3);
  AdversaryConfig c;
  c.byz_ids = range_ids(100, 1000);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = byzantine_pull_reply(c, 200, rng);
    REQUIRE(r.size() == 200);
    REQUIRE(std::set<NodeId>(r.begin(), r.end()).size() == 200);
    for (NodeId id : r) REQUIRE((id.value >= 100 && id.value < 1100));
  }
  // The large-subset path picks the complement.
  const auto big = byzantine_pull_reply(c, 900, rng);
  REQUIRE(std::set<NodeId>(big.begin(), big.end()).size() == 900);
  const auto all = byzantine_pull_reply(c, 1000, rng);
  REQUIRE(std::set<NodeId>(all.begin(), all.end()).size() == 1000);

  c.byz_ids = {NodeId{42}};
  const auto single = byzantine_pull_reply(c, 200, rng);
  REQUIRE(single == std::vector<NodeId>(200, NodeId{42}));
}

TEST_CASE("byzantine pull reply is uniform over the subset", "[adversary][property]") {
  Rng rng(4);
  AdversaryConfig c;
  c.byz_ids = range_ids(0, 20);
  for (std::size_t l1 : {5, 15}) {
    std::vector<int> hits(20, 0);
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) {
      for (NodeId id : byzantine_pull_reply(c, l1, rng)) ++hits[id.value];
    }
    for (int h : hits) REQUIRE(h / double(trials) == Catch::Approx(l1 / 20.0).margin(0.02));
  }
}

TEST_CASE("identification rule", "[adversary]") {
  // Averages 0.45, 0.50, 0.40, 0.25: global 0.40.
  std::vector<IdentObservation> o = {obs(1, 0.40), obs(1, 0.50), obs(2, 0.50), obs(3, 0.40), obs(4, 0.25)};
  REQUIRE(identify_trusted(o, 0.10) == std::vector<NodeId>{NodeId{4}});

  // Target at 0.35 against a 0.40 global average.
  std::vector<IdentObservation> p = {obs(1, 0.45), obs(2, 0.35)};
  REQUIRE(identify_trusted(p, 0.10).empty());

  std::vector<IdentObservation> single = {obs(7, 0.0), obs(7, 0.9)};
  REQUIRE(identify_trusted(single, 0.0001).empty());
}

TEST_CASE("identification thresholds", "[adversary][property]") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<IdentObservation> o;
    std::map<std::uint64_t, std::pair<double, int>> acc;
    for (int i = 0; i < 200; ++i) {
      const std::uint64_t t = rng() % 30;
      const double frac = (rng() % 1001) / 1000.0;
      o.push_back(obs(t, frac));
      acc[t].first += frac;
      ++acc[t].second;
    }
    REQUIRE(identify_trusted(o, 1.0).empty());

    double global = 0.0;
    for (const auto& [t, a] : acc) global += a.first / a.second;
    global /= static_cast<double>(acc.size());
    std::vector<NodeId> below;
    for (const auto& [t, a] : acc) {
      if (a.first / a.second < global) below.push_back(NodeId{t});
    }
    REQUIRE(identify_trusted(o, 0.0) == below);
  }
}

TEST_CASE("tally with counts matches repeated observations", "[adversary]") {
  IdentTally a, b;
  a.add(NodeId{3}, 0.2, 4);
  a.add(NodeId{5}, 0.6, 1);
  for (int i = 0; i < 4; ++i) b.add(NodeId{3}, 0.2);
  b.add(NodeId{5}, 0.6);
  REQUIRE(a.label(0.1) == b.label(0.1));
  REQUIRE(a.label(0.1) == std::vector<NodeId>{NodeId{3}});
  a.add(NodeId{1} , 0.5, 0);
  REQUIRE(a.targets() == 2);
  IdentTally sparse;
  sparse.add(NodeId{std::uint64_t{1} << 40}, 0.0);
  sparse.add(NodeId{2}, 0.5);
  REQUIRE(sparse.label(0.1) == std::vector<NodeId>{NodeId{std::uint64_t{1} << 40}});
}

TEST_CASE("poisoned bootstrap", "[adversary]") {
  Rng rng(6);
  AdversaryConfig c;
  c.byz_ids = range_ids(500, 50);
  BrahmsParams params;
  params.l1 = 20;
  params.l2 = 20;
  const auto trusted_key = SecretKey::random(rng);

  REQUIRE(bootstrap_poisoned_trusted(c, {}, trusted_key, params, rng).empty());

  const auto ids = range_ids(900, 5);
  const auto nodes = bootstrap_poisoned_trusted(c, ids, trusted_key, params, rng);
  REQUIRE(nodes.size() == 5);
  for (const auto& n : nodes) {
    REQUIRE(n.view.size() == 20);
    for (const auto& e : n.view) REQUIRE((e.id.value >= 500 && e.id.value < 550));
    for (NodeId s : n.samples.stored_ids()) REQUIRE((s.value >= 500 && s.value < 550));
    const auto h = handshake(n.key, trusted_key, rng);
    REQUIRE(h.initiator_trusts);
    REQUIRE(h.responder_trusts);
    const auto back = handshake(trusted_key, n.key, rng);
    REQUIRE(back.initiator_trusts);
    REQUIRE(back.responder_trusts);
  }

  AdversaryConfig empty;
  REQUIRE_THROWS_AS(bootstrap_poisoned_trusted(empty, ids, trusted_key, params, rng), std::invalid_argument);
}
