// Acceptance run: one PASS/FAIL line per criterion, at desk scale
// (N=1000, l1=100, 200 rounds, seeds 1-5). Takes several minutes.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "psim/csv_io.hpp"
#include "psim/engine.hpp"
#include "psim/metrics.hpp"
#include "psim/sampler.hpp"
#include "psim/trusted.hpp"

using namespace psim;

namespace {

constexpr std::size_t kSeeds = 5;
constexpr std::size_t kSteadyFrom = 101;

RunConfig desk(double f, double t, std::uint64_t seed) {
  RunConfig c;
  c.n = 1000;
  c.f = f;
  c.t = t;
  c.params.l1 = 100;
  c.params.l2 = 100;
  c.rounds = 200;
  c.seed = seed;
  return c;
}

struct Run {
  RunConfig config;
  RunResult result;
};

// A named group of runs, one per seed.
using Group = std::vector<Run>;

std::vector<RunResult> run_all(const std::vector<RunConfig>& configs) {
  std::vector<RunResult> out(configs.size());
  std::atomic<std::size_t> next{0}, done{0};
  const std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
          out[i] = run_experiment(configs[i]);
          std::fprintf(stderr, "  run %zu/%zu\n", ++done, configs.size());
        }
      });
    }
  }
  return out;
}

double steady_mean(const std::vector<RoundMetrics>& trace) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : trace) {
    if (r.round < kSteadyFrom) continue;
    s += r.mean_byz_fraction;
    ++n;
  }
  return s / static_cast<double>(n);
}

double steady_gap(const std::vector<RoundMetrics>& trace) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : trace) {
    if (r.round < kSteadyFrom) continue;
    s += r.trusted_mean_byz_fraction - r.honest_mean_byz_fraction;
    ++n;
  }
  return s / static_cast<double>(n);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string fmt(std::optional<double> v) { return v ? fmt(*v) : "n/a"; }

std::string list(const std::vector<std::optional<double>>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
  return s + "]";
}

std::string stab_list(const Group& g) {
  std::size_t reached = 0;
  for (const auto& r : g) reached += stability_time(r.result.trace).has_value();
  return std::to_string(reached) + "/" + std::to_string(g.size()) + " stabilised";
}

// Per-seed improvement against the matched baseline, post-stability.
std::vector<std::optional<double>> improvements(const Group& runs, const Group& baselines) {
  std::vector<std::optional<double>> out;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    out.push_back(resilience_improvement(runs[i].result.trace, baselines[i].result.trace));
  }
  return out;
}

// Same ratio over the rounds >= kSteadyFrom window, for diagnostics only.
double steady_improvement(const Group& runs, const Group& baselines) {
  std::vector<double> v;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const double b = steady_mean(baselines[i].result.trace);
    v.push_back((b - steady_mean(runs[i].result.trace)) / b);
  }
  return mean_of(v);
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& v) {
  std::vector<double> x;
  for (const auto& o : v) {
    if (!o) return std::nullopt;
    x.push_back(*o);
  }
  return mean_of(x);
}

int failures = 0;

void report(int n, bool pass, const std::string& what, const std::string& detail) {
  failures += pass ? 0 : 1;
  std::printf("criterion %2d: %s  %s: %s\n", n, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
}

// Criterion 1 oracle: splitmix-style keyed hash written out independently.
std::uint64_t ref_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t ref_hash(std::uint64_t seed, std::uint64_t id) { return ref_mix(ref_mix(id + 0x9e3779b97f4a7c15ULL) ^ seed); }

void sampler_oracle() {
  Rng rng(2024);
  std::size_t mismatches = 0, checked = 0;
  for (int s = 0; s < 100; ++s) {
    const std::size_t len = 1 + rng() % 10000;
    const std::uint64_t universe = 1 + rng() % 20000;
    std::vector<NodeId> stream(len);
    for (auto& id : stream) id = NodeId{rng() % universe};
    std::vector<std::uint64_t> seeds(16);
    for (auto& x : seeds) x = rng();
    auto list = SampleList::with_seeds(seeds);
    // Folded in random-size chunks.
    for (std::size_t pos = 0; pos < len;) {
      const std::size_t chunk = std::min(len - pos, 1 + rng() % 700);
      list.feed(std::span(stream).subspan(pos, chunk));
      pos += chunk;
    }
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      NodeId best = stream.front();
      for (NodeId id : stream) {
        if (ref_hash(seeds[k], id.value) < ref_hash(seeds[k], best.value)) best = id;
      }
      ++checked;
      mismatches += list.stored(k) != best;
    }
  }
  report(1, mismatches == 0, "sampler oracle equivalence",
         std::to_string(checked) + " samplers over 100 streams, " + std::to_string(mismatches) + " mismatches");
}

void handshake_trials() {
  Rng rng(77);
  const auto shared = SecretKey::random(rng);
  std::size_t false_trust = 0, shared_ok = 0, shared_n = 0;
  for (int i = 0; i < 10000; ++i) {
    if (i % 2 == 0) {
      ++shared_n;
      const auto r = handshake(shared, shared, rng);
      shared_ok += r.initiator_trusts && r.responder_trusts;
    } else {
      const auto a = i % 4 == 1 ? shared : SecretKey::random(rng);
      const auto r = handshake(a, SecretKey::random(rng), rng);
      false_trust += r.initiator_trusts + r.responder_trusts;
    }
  }
  report(2, false_trust == 0 && shared_ok == shared_n, "handshake soundness and completeness",
         std::to_string(false_trust) + " false identifications in 5000 mixed trials, " + std::to_string(shared_ok) +
             "/" + std::to_string(shared_n) + " shared-key successes");
}

}  // namespace

int main() {
  sampler_oracle();
  handshake_trials();

  // Every desk run, declared up front and executed in one batch.
  std::vector<RunConfig> configs;
  std::map<std::string, std::pair<std::size_t, std::size_t>> groups;  // name -> [begin, end)
  auto add_group = [&](const std::string& name, const std::function<RunConfig(std::uint64_t)>& make) {
    const auto begin = configs.size();
    for (std::uint64_t s = 1; s <= kSeeds; ++s) configs.push_back(make(s));
    groups[name] = {begin, configs.size()};
  };
  add_group("base18", [](auto s) { return desk(0.18, 0, s); });
  add_group("base10", [](auto s) { return desk(0.10, 0, s); });
  add_group("base30", [](auto s) { return desk(0.30, 0, s); });
  add_group("t01", [](auto s) {
    auto c = desk(0.10, 0.01, s);
    c.identification = true;
    return c;
  });
  add_group("t10", [](auto s) {
    auto c = desk(0.10, 0.10, s);
    c.identification = true;
    return c;
  });
  add_group("t30", [](auto s) { return desk(0.10, 0.30, s); });
  add_group("er1_f10", [](auto s) {
    auto c = desk(0.10, 0.10, s);
    c.eviction = EvictionPolicy::fixed(1.0);
    return c;
  });
  add_group("er1_f30", [](auto s) {
    auto c = desk(0.30, 0.10, s);
    c.eviction = EvictionPolicy::fixed(1.0);
    return c;
  });
  add_group("inj05", [](auto s) {
    auto c = desk(0.10, 0.01, s);
    c.injection_fraction = 0.05;
    return c;
  });
  const std::size_t sanity_index = configs.size();
  configs.push_back(desk(0.0, 0.0, 1));
  const std::size_t repeat_index = configs.size();
  configs.push_back(configs[groups["t01"].first]);

  std::fprintf(stderr, "running %zu desk-scale simulations\n", configs.size());
  auto results = run_all(configs);
  auto group = [&](const std::string& name) {
    Group g;
    for (auto i = groups[name].first; i < groups[name].second; ++i) g.push_back(Run{configs[i], results[i]});
    return g;
  };
  const auto base18 = group("base18"), base10 = group("base10"), base30 = group("base30");
  const auto t01 = group("t01"), t10 = group("t10"), t30 = group("t30");
  const auto er1_f10 = group("er1_f10"), er1_f30 = group("er1_f30"), inj05 = group("inj05");

  {
    std::vector<std::optional<double>> means;
    std::vector<double> steady;
    for (const auto& r : base18) {
      means.push_back(post_stability_mean(r.result.trace));
      steady.push_back(steady_mean(r.result.trace));
    }
    const auto m = mean_defined(means);
    report(3, m && *m >= 0.70 && *m <= 0.90, "baseline pollution at f=0.18 in [0.70, 0.90]",
           "post-stability mean " + fmt(m) + " (" + stab_list(base18) + "); rounds 101-200 mean " +
               fmt(mean_of(steady)));
  }
  {
    const auto imp = improvements(t01, base10);
    const auto m = mean_defined(imp);
    bool each = true;
    for (const auto& x : imp) each = each && x && *x >= 0.05;
    report(4, each && m && *m >= 0.08, "improvement at t=0.01, f=0.10 (each >= 0.05, mean >= 0.08)",
           "per seed " + list(imp) + " (" + stab_list(t01) + ", baselines " + stab_list(base10) +
               "); rounds 101-200 improvement " + fmt(steady_improvement(t01, base10)));
  }
  {
    const auto m1 = mean_defined(improvements(t01, base10));
    const auto m10 = mean_defined(improvements(t10, base10));
    const auto m30 = mean_defined(improvements(t30, base10));
    bool pass = m1 && m10 && m30;
    if (pass) {
      const double d1 = *m1 - *m10, d2 = *m10 - *m30;  // positive means a decrease
      const int violations = (d1 > 0) + (d2 > 0);
      pass = violations == 0 || (violations == 1 && std::max(d1, d2) <= 0.02);
    }
    report(5, pass, "improvement non-decreasing in t over {0.01, 0.10, 0.30}",
           "post-stability means " + fmt(m1) + " " + fmt(m10) + " " + fmt(m30) + "; rounds 101-200 " +
               fmt(steady_improvement(t01, base10)) + " " + fmt(steady_improvement(t10, base10)) + " " +
               fmt(steady_improvement(t30, base10)));
  }
  {
    const auto a = mean_defined(improvements(er1_f10, base10));
    const auto b = mean_defined(improvements(er1_f30, base30));
    report(6, a && b && *a - *b >= 0.05, "eviction 1.0: improvement at f=0.10 exceeds f=0.30 by >= 0.05",
           "post-stability " + fmt(a) + " vs " + fmt(b) + " (" + stab_list(er1_f10) + ", " + stab_list(er1_f30) +
               "); rounds 101-200 " + fmt(steady_improvement(er1_f10, base10)) + " vs " +
               fmt(steady_improvement(er1_f30, base30)));
  }
  {
    double lo = 1.0, hi = 0.0;
    std::size_t rows = 0;
    for (const auto* g : {&t01, &t10, &t30, &inj05}) {
      for (const auto& r : *g) {
        for (const auto& row : r.result.trace) {
          if (std::isnan(row.min_eviction_rate)) continue;
          lo = std::min(lo, row.min_eviction_rate);
          hi = std::max(hi, row.max_eviction_rate);
          ++rows;
        }
      }
    }
    report(7, rows > 0 && lo >= 0.20 && hi <= 0.80, "adaptive eviction rates within [0.20, 0.80]",
           std::to_string(rows) + " round records, observed range [" + fmt(lo) + ", " + fmt(hi) + "]");
  }
  {
    std::vector<std::optional<double>> gaps;
    std::vector<double> steady;
    for (const auto* g : {&t01, &t10, &t30}) {
      for (const auto& r : *g) {
        gaps.push_back(post_stability_class_gap(r.result.trace));
        steady.push_back(steady_gap(r.result.trace));
      }
    }
    const auto m = mean_defined(gaps);
    report(8, m && std::abs(*m) <= 0.05, "post-stability |trusted - honest| pollution <= 0.05",
           "mean gap " + fmt(m) + "; rounds 101-200 mean gap " + fmt(mean_of(steady)) +
               " over t in {0.01, 0.10, 0.30}");
  }
  {
    bool pass = true;
    std::string detail;
    for (const auto& [name, g] : {std::pair{"t=0.01", &t01}, std::pair{"t=0.10", &t10}}) {
      std::vector<double> p, r;
      std::size_t labeled = 0;
      for (const auto& run : *g) {
        p.push_back(run.result.ident->precision);
        r.push_back(run.result.ident->recall);
        labeled += run.result.ident->labeled_count;
      }
      pass = pass && mean_of(p) <= 0.35 && mean_of(r) <= 0.35;
      detail += std::string(detail.empty() ? "" : "; ") + name + " precision " + fmt(mean_of(p)) + " recall " +
                fmt(mean_of(r)) + " (max " + fmt(*std::max_element(p.begin(), p.end())) + "/" +
                fmt(*std::max_element(r.begin(), r.end())) + ", " + std::to_string(labeled) + " labeled)";
    }
    report(9, pass, "identification precision and recall <= 0.35", detail);
  }
  {
    const auto imp = improvements(inj05, base10);
    bool pass = true;
    for (const auto& x : imp) pass = pass && x && *x >= 0.0;
    report(10, pass, "improvement >= 0 with 5% poisoned injection",
           "per seed " + list(imp) + " (" + stab_list(inj05) + "); rounds 101-200 improvement " +
               fmt(steady_improvement(inj05, base10)));
  }
  {
    auto text = [](const RunConfig& c, const RunResult& r) {
      std::ostringstream os;
      write_trace(os, TraceLabel{"repeat", c.seed, c.n, c.f, c.t, "adaptive", "adaptive"}, r.trace);
      return os.str();
    };
    const auto& c = configs[repeat_index];
    const auto a = text(c, results[groups["t01"].first]);
    const auto b = text(c, results[repeat_index]);
    report(11, a == b, "identical config and seed give byte-identical traces",
           std::to_string(a.size()) + " bytes compared");
  }
  {
    const auto& trace = results[sanity_index].trace;
    const auto disc = discovery_time(trace);
    double worst = 0.0;
    if (disc) {
      for (const auto& row : trace) {
        if (row.round >= *disc) worst = std::max(worst, row.in_degree_cv);
      }
    }
    report(12, disc && *disc < 200 && worst < 0.35, "f=0 discovery within 200 rounds, in-degree CV < 0.35",
           "discovery round " + (disc ? std::to_string(*disc) : std::string("none")) +
               ", max in-degree CV after it " + fmt(worst));
  }
  return failures == 0 ? 0 : 1;
}
