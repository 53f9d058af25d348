#pragma once

// Sweep expansion and execution: one job per (f, t, eviction, injection,
// repetition) plus one t=0 baseline per (f, repetition) sharing its seed.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "psim/config.hpp"
#include "psim/csv_io.hpp"
#include "psim/engine.hpp"

namespace psim {

struct SweepJob {
  std::string run_id;
  bool baseline = false;
  std::string baseline_run_id;  // empty for baselines
  double injection = 0.0;
  RunConfig config;
};

/// Filesystem-safe name built from every parameter that affects the run.
std::string make_run_id(const RunConfig& config, bool baseline);

/// Jobs in deterministic order; baselines first within each (f, repetition).
std::vector<SweepJob> plan_sweep(const ExperimentConfig& config);

TraceLabel trace_label(const SweepJob& job);

/// Runs one job and returns its per-run summary (resilience columns unset).
SummaryRow execute_job(const SweepJob& job, std::vector<RoundMetrics>* trace_out = nullptr);

/// Fills resilience improvement and overheads from each row's baseline.
void attach_baselines(std::vector<SummaryRow>& rows);

struct SweepOptions {
  std::size_t workers = 1;
  bool force = false;
};

struct SweepOutcome {
  std::size_t ran = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes <out>/<run_id>.csv, <out>/<run_id>.summary.csv and <out>/summary.csv.
/// Throws OutputError before any simulation if the directory is unusable.
SweepOutcome run_sweep(const ExperimentConfig& config, const SweepOptions& options, std::ostream& log);

}  // namespace psim
