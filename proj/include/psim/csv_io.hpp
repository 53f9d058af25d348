#pragma once

// CSV output for per-round traces and per-run summaries.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psim/metrics.hpp"

namespace psim {

/// "%.6f", or an empty field for NaN.
std::string format_fixed(double value);
std::string format_optional(std::optional<double> value);
std::string format_optional(std::optional<std::size_t> value);

/// Identifying columns repeated on every trace row.
struct TraceLabel {
  std::string run_id;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double f = 0.0;
  double t = 0.0;
  std::string eviction_mode;  // "fixed", "adaptive" or "none" for baselines
  std::string eviction_value; // rate, "adaptive" or "none"
};

extern const std::vector<std::string> kTraceColumns;

void write_trace(std::ostream& out, const TraceLabel& label, std::span<const RoundMetrics> trace);

struct SummaryRow {
  std::string run_id;
  std::string kind;  // "trusted" or "baseline"
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double f = 0.0;
  double t = 0.0;
  std::string eviction_mode;
  std::string eviction_value;
  double injection = 0.0;
  std::string baseline_run_id;
  std::optional<std::size_t> discovery_time;
  std::optional<std::size_t> stability_time;
  std::optional<double> post_stability_mean;
  std::optional<double> resilience_improvement;
  std::optional<double> discovery_overhead;
  std::optional<double> stability_overhead;
  std::optional<double> class_gap;
  std::optional<double> ident_precision;
  std::optional<double> ident_recall;
  std::optional<double> ident_f1;
  std::optional<std::size_t> ident_poisoned_labeled;
};

extern const std::vector<std::string> kSummaryColumns;

void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const SummaryRow& row);

/// Reads back one row written by write_summary_row (used when resuming).
SummaryRow parse_summary_row(const std::string& line);

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace psim
