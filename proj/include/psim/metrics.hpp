#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "psim/node_id.hpp"

namespace psim {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One measurement row, taken after each round (row 0 is the initial state).
/// Pollution fractions are over non-Byzantine nodes; absent classes are NaN.
struct RoundMetrics {
  std::size_t round = 0;
  double mean_byz_fraction = 0.0;
  double min_byz_fraction = 0.0;
  double max_byz_fraction = 0.0;
  double trusted_mean_byz_fraction = kNaN;
  double honest_mean_byz_fraction = kNaN;
  double discovery_fraction = 0.0;
  bool stability_reached = false;

  // Not part of the per-round CSV.
  double min_eviction_rate = kNaN;
  double max_eviction_rate = kNaN;
  double in_degree_cv = kNaN;
  std::size_t blocked_nodes = 0;
};

struct IdentReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t labeled_count = 0;
  /// Labeled nodes that are view-poisoned trusted nodes.
  std::size_t poisoned_labeled = 0;
};

enum class StabilityBand { Absolute, Relative };

/// First round from which every node has discovered at least threshold of the
/// non-Byzantine ids.
std::optional<std::size_t> discovery_time(std::span<const RoundMetrics> trace, double threshold = 0.75);

/// First round from which every non-Byzantine node stays within band of the
/// mean pollution until the end of the trace.
std::optional<std::size_t> stability_time(std::span<const RoundMetrics> trace, double band = 0.10,
                                          StabilityBand mode = StabilityBand::Absolute);

/// Sets stability_reached on every row from stability_time onwards.
void mark_stability(std::vector<RoundMetrics>& trace, double band = 0.10,
                    StabilityBand mode = StabilityBand::Absolute);

/// Mean of mean_byz_fraction over rows from stability onwards.
std::optional<double> post_stability_mean(std::span<const RoundMetrics> trace);

/// Mean of trusted minus honest pollution over rows from stability onwards.
std::optional<double> post_stability_class_gap(std::span<const RoundMetrics> trace);

/// Relative drop of post-stability pollution against a matched baseline.
/// Empty when either trace never stabilises or the baseline mean is 0.
std::optional<double> resilience_improvement(std::span<const RoundMetrics> trace,
                                             std::span<const RoundMetrics> baseline);

/// Same quantity from already reduced post-stability means.
std::optional<double> resilience_improvement(std::optional<double> mean, std::optional<double> baseline_mean);

/// (value - baseline) / baseline, empty when either is missing or baseline is 0.
std::optional<double> relative_overhead(std::optional<std::size_t> value, std::optional<std::size_t> baseline);

IdentReport ident_report(std::span<const NodeId> labeled, std::span<const NodeId> ground_truth_trusted);

}  // namespace psim
