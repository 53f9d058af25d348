#include "psim/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace psim {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string make_run_id(const RunConfig& c, bool baseline) {
  std::ostringstream os;
  os << (baseline ? "baseline" : "trusted") << "_n" << c.n << "_f" << num(c.f) << "_t" << num(c.t);
  if (!baseline) os << "_ev" << (c.eviction.is_adaptive() ? "adaptive" : num(c.eviction.fixed_rate()));
  os << "_inj" << num(c.injection_fraction) << "_l1-" << c.params.l1 << "_l2-" << c.params.l2 << "_a"
     << num(c.params.alpha) << "_b" << num(c.params.beta) << "_g" << num(c.params.gamma) << "_r" << c.rounds
     << "_pb" << num(c.push_budget_factor);
  if (c.identification) os << "_id" << num(c.ident_threshold);
  if (!c.cache_handshakes) os << "_nocache";
  os << "_s" << c.seed;
  return os.str();
}

std::vector<SweepJob> plan_sweep(const ExperimentConfig& cfg) {
  std::vector<double> injections{0.0};
  if (cfg.injection) {
    for (double x : cfg.injection_fractions) {
      if (x > 0.0) injections.push_back(x);
    }
  }
  std::vector<SweepJob> jobs;
  for (double f : cfg.f_values) {
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      const std::uint64_t seed = cfg.seed + rep;
      SweepJob base;
      base.baseline = true;
      base.config = cfg.run_config(f, 0.0, EvictionPolicy::adaptive(), 0.0, seed, false);
      base.run_id = make_run_id(base.config, true);
      jobs.push_back(base);
      for (double t : cfg.t_values) {
        for (const auto& ev : cfg.evictions) {
          for (double inj : injections) {
            SweepJob job;
            job.config = cfg.run_config(f, t, ev, inj, seed, cfg.identification);
            job.run_id = make_run_id(job.config, false);
            job.baseline_run_id = base.run_id;
            job.injection = inj;
            jobs.push_back(std::move(job));
          }
        }
      }
    }
  }
  return jobs;
}

TraceLabel trace_label(const SweepJob& job) {
  TraceLabel l;
  l.run_id = job.run_id;
  l.seed = job.config.seed;
  l.n = job.config.n;
  l.f = job.config.f;
  l.t = job.config.t;
  l.eviction_mode = job.baseline ? "none" : job.config.eviction.mode_name();
  l.eviction_value = job.baseline ? "none" : job.config.eviction.label();
  return l;
}

SummaryRow execute_job(const SweepJob& job, std::vector<RoundMetrics>* trace_out) {
  auto result = run_experiment(job.config);
  const auto label = trace_label(job);
  SummaryRow row;
  row.run_id = job.run_id;
  row.kind = job.baseline ? "baseline" : "trusted";
  row.seed = job.config.seed;
  row.n = job.config.n;
  row.f = job.config.f;
  row.t = job.config.t;
  row.eviction_mode = label.eviction_mode;
  row.eviction_value = label.eviction_value;
  row.injection = job.injection;
  row.baseline_run_id = job.baseline_run_id;
  row.discovery_time = discovery_time(result.trace);
  row.stability_time = stability_time(result.trace);
  row.post_stability_mean = post_stability_mean(result.trace);
  row.class_gap = post_stability_class_gap(result.trace);
  if (result.ident) {
    row.ident_precision = result.ident->precision;
    row.ident_recall = result.ident->recall;
    row.ident_f1 = result.ident->f1;
    row.ident_poisoned_labeled = result.ident->poisoned_labeled;
  }
  if (trace_out) *trace_out = std::move(result.trace);
  return row;
}

void attach_baselines(std::vector<SummaryRow>& rows) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < rows.size(); ++i) by_id[rows[i].run_id] = i;
  for (auto& row : rows) {
    if (row.baseline_run_id.empty()) continue;
    auto it = by_id.find(row.baseline_run_id);
    if (it == by_id.end()) continue;
    const auto& base = rows[it->second];
    row.resilience_improvement = resilience_improvement(row.post_stability_mean, base.post_stability_mean);
    row.discovery_overhead = relative_overhead(row.discovery_time, base.discovery_time);
    row.stability_overhead = relative_overhead(row.stability_time, base.stability_time);
  }
}

namespace {

std::filesystem::path trace_path(const std::filesystem::path& dir, const SweepJob& job) {
  return dir / (job.run_id + ".csv");
}

std::filesystem::path summary_path(const std::filesystem::path& dir, const SweepJob& job) {
  return dir / (job.run_id + ".summary.csv");
}

std::optional<SummaryRow> load_existing(const std::filesystem::path& dir, const SweepJob& job) {
  if (!std::filesystem::exists(trace_path(dir, job))) return std::nullopt;
  std::ifstream in(summary_path(dir, job));
  std::string header, line;
  if (!in || !std::getline(in, header) || !std::getline(in, line)) return std::nullopt;
  try {
    return parse_summary_row(line);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void ensure_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw OutputError("cannot create output directory " + dir.string());
  }
  const auto probe = dir / ".psim-write-probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok")) throw OutputError("output directory is not writable: " + dir.string());
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace

SweepOutcome run_sweep(const ExperimentConfig& config, const SweepOptions& options, std::ostream& log) {
  ensure_writable(config.out);
  const auto jobs = plan_sweep(config);
  std::vector<std::optional<SummaryRow>> rows(jobs.size());
  std::atomic<std::size_t> next{0}, ran{0}, skipped{0}, failed{0};
  std::mutex log_mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      std::string line;
      try {
        if (!options.force) {
          if (auto existing = load_existing(config.out, job)) {
            rows[i] = std::move(existing);
            ++skipped;
            std::lock_guard lock(log_mu);
            log << "skip " << job.run_id << " (exists)\n";
            continue;
          }
        }
        std::vector<RoundMetrics> trace;
        auto row = execute_job(job, &trace);
        std::ostringstream trace_csv, summary_csv;
        write_trace(trace_csv, trace_label(job), trace);
        write_summary_header(summary_csv);
        write_summary_row(summary_csv, row);
        write_file_atomically(trace_path(config.out, job), trace_csv.str());
        write_file_atomically(summary_path(config.out, job), summary_csv.str());
        std::ostringstream msg;
        msg << "done " << job.run_id << " stability=" << format_optional(row.stability_time)
            << " discovery=" << format_optional(row.discovery_time)
            << " pollution=" << format_optional(row.post_stability_mean);
        line = msg.str();
        rows[i] = std::move(row);
        ++ran;
      } catch (const std::exception& e) {
        ++failed;
        line = "FAILED " + job.run_id + ": " + e.what();
      }
      std::lock_guard lock(log_mu);
      log << line << '\n';
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, jobs.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  std::vector<SummaryRow> done;
  for (auto& r : rows) {
    if (r) done.push_back(*r);
  }
  attach_baselines(done);
  std::ostringstream summary;
  write_summary_header(summary);
  for (const auto& r : done) write_summary_row(summary, r);
  write_file_atomically(config.out / "summary.csv", summary.str());

  return SweepOutcome{ran.load(), skipped.load(), failed.load()};
}

}  // namespace psim
