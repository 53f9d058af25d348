#include "psim/metrics.hpp"

#include <algorithm>
#include <unordered_set>

namespace psim {

std::optional<std::size_t> discovery_time(std::span<const RoundMetrics> trace, double threshold) {
  for (const auto& row : trace) {
    if (row.discovery_fraction + 1e-12 >= threshold) return row.round;
  }
  return std::nullopt;
}

namespace {

bool within_band(const RoundMetrics& row, double band, StabilityBand mode) {
  const double width = mode == StabilityBand::Absolute ? band : band * row.mean_byz_fraction;
  constexpr double eps = 1e-12;
  return row.max_byz_fraction - row.mean_byz_fraction <= width + eps &&
         row.mean_byz_fraction - row.min_byz_fraction <= width + eps;
}

}  // namespace

std::optional<std::size_t> stability_time(std::span<const RoundMetrics> trace, double band, StabilityBand mode) {
  std::optional<std::size_t> first;
  for (const auto& row : trace) {
    if (within_band(row, band, mode)) {
      if (!first) first = row.round;
    } else {
      first.reset();
    }
  }
  return first;
}

void mark_stability(std::vector<RoundMetrics>& trace, double band, StabilityBand mode) {
  const auto stab = stability_time(trace, band, mode);
  for (auto& row : trace) row.stability_reached = stab && row.round >= *stab;
}

std::optional<double> post_stability_mean(std::span<const RoundMetrics> trace) {
  const auto stab = stability_time(trace);
  if (!stab) return std::nullopt;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& row : trace) {
    if (row.round < *stab) continue;
    sum += row.mean_byz_fraction;
    ++n;
  }
  return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt;
}

std::optional<double> post_stability_class_gap(std::span<const RoundMetrics> trace) {
  const auto stab = stability_time(trace);
  if (!stab) return std::nullopt;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& row : trace) {
    if (row.round < *stab || std::isnan(row.trusted_mean_byz_fraction) ||
        std::isnan(row.honest_mean_byz_fraction)) {
      continue;
    }
    sum += row.trusted_mean_byz_fraction - row.honest_mean_byz_fraction;
    ++n;
  }
  return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt;
}

std::optional<double> resilience_improvement(std::optional<double> mean, std::optional<double> baseline_mean) {
  if (!mean || !baseline_mean || *baseline_mean <= 0.0) return std::nullopt;
  return (*baseline_mean - *mean) / *baseline_mean;
}

std::optional<double> resilience_improvement(std::span<const RoundMetrics> trace,
                                             std::span<const RoundMetrics> baseline) {
  return resilience_improvement(post_stability_mean(trace), post_stability_mean(baseline));
}

std::optional<double> relative_overhead(std::optional<std::size_t> value, std::optional<std::size_t> baseline) {
  if (!value || !baseline || *baseline == 0) return std::nullopt;
  return (static_cast<double>(*value) - static_cast<double>(*baseline)) / static_cast<double>(*baseline);
}

IdentReport ident_report(std::span<const NodeId> labeled, std::span<const NodeId> ground_truth_trusted) {
  IdentReport r;
  const std::unordered_set<NodeId> truth(ground_truth_trusted.begin(), ground_truth_trusted.end());
  const std::unordered_set<NodeId> picked(labeled.begin(), labeled.end());
  std::size_t hits = 0;
  for (const auto& id : picked) hits += truth.count(id);
  r.labeled_count = picked.size();
  r.precision = picked.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(picked.size());
  r.recall = truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

}  // namespace psim
