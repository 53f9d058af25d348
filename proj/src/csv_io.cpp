#include "psim/csv_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace psim {

std::string format_fixed(double value) {
  if (std::isnan(value)) return {};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string format_optional(std::optional<double> value) { return value ? format_fixed(*value) : std::string{}; }

std::string format_optional(std::optional<std::size_t> value) {
  return value ? std::to_string(*value) : std::string{};
}

const std::vector<std::string> kTraceColumns = {
    "run_id",         "seed",          "round",
    "n",              "f",             "t",
    "eviction_mode",  "eviction_rate_or_adaptive",
    "mean_byz_fraction", "min_byz_fraction", "max_byz_fraction",
    "trusted_mean_byz_fraction", "honest_mean_byz_fraction",
    "discovery_fraction", "stability_reached",
};

namespace {

void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

}  // namespace

void write_trace(std::ostream& out, const TraceLabel& label, std::span<const RoundMetrics> trace) {
  write_header(out, kTraceColumns);
  const std::string prefix_f = format_fixed(label.f);
  const std::string prefix_t = format_fixed(label.t);
  for (const auto& row : trace) {
    out << label.run_id << ',' << label.seed << ',' << row.round << ',' << label.n << ',' << prefix_f << ','
        << prefix_t << ',' << label.eviction_mode << ',' << label.eviction_value << ','
        << format_fixed(row.mean_byz_fraction) << ',' << format_fixed(row.min_byz_fraction) << ','
        << format_fixed(row.max_byz_fraction) << ',' << format_fixed(row.trusted_mean_byz_fraction) << ','
        << format_fixed(row.honest_mean_byz_fraction) << ',' << format_fixed(row.discovery_fraction) << ','
        << (row.stability_reached ? "true" : "false") << '\n';
  }
}

const std::vector<std::string> kSummaryColumns = {
    "run_id",          "kind",             "seed",
    "n",               "f",                "t",
    "eviction_mode",   "eviction_rate_or_adaptive",
    "injection",       "baseline_run_id",  "discovery_time",
    "stability_time",  "post_stability_mean", "resilience_improvement",
    "discovery_overhead", "stability_overhead", "trusted_honest_gap",
    "ident_precision", "ident_recall",     "ident_f1",
    "ident_poisoned_labeled",
};

void write_summary_header(std::ostream& out) { write_header(out, kSummaryColumns); }

void write_summary_row(std::ostream& out, const SummaryRow& r) {
  out << r.run_id << ',' << r.kind << ',' << r.seed << ',' << r.n << ',' << format_fixed(r.f) << ','
      << format_fixed(r.t) << ',' << r.eviction_mode << ',' << r.eviction_value << ',' << format_fixed(r.injection)
      << ',' << r.baseline_run_id << ',' << format_optional(r.discovery_time) << ','
      << format_optional(r.stability_time) << ',' << format_optional(r.post_stability_mean) << ','
      << format_optional(r.resilience_improvement) << ',' << format_optional(r.discovery_overhead) << ','
      << format_optional(r.stability_overhead) << ',' << format_optional(r.class_gap) << ','
      << format_optional(r.ident_precision) << ',' << format_optional(r.ident_recall) << ','
      << format_optional(r.ident_f1) << ',' << format_optional(r.ident_poisoned_labeled) << '\n';
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> opt_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

std::optional<std::size_t> opt_size(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return static_cast<std::size_t>(std::stoull(s));
}

}  // namespace

SummaryRow parse_summary_row(const std::string& line) {
  const auto v = split_fields(line);
  if (v.size() != kSummaryColumns.size()) throw std::runtime_error("malformed summary row: " + line);
  SummaryRow r;
  r.run_id = v[0];
  r.kind = v[1];
  r.seed = std::stoull(v[2]);
  r.n = std::stoull(v[3]);
  r.f = std::stod(v[4]);
  r.t = std::stod(v[5]);
  r.eviction_mode = v[6];
  r.eviction_value = v[7];
  r.injection = std::stod(v[8]);
  r.baseline_run_id = v[9];
  r.discovery_time = opt_size(v[10]);
  r.stability_time = opt_size(v[11]);
  r.post_stability_mean = opt_double(v[12]);
  r.resilience_improvement = opt_double(v[13]);
  r.discovery_overhead = opt_double(v[14]);
  r.stability_overhead = opt_double(v[15]);
  r.class_gap = opt_double(v[16]);
  r.ident_precision = opt_double(v[17]);
  r.ident_recall = opt_double(v[18]);
  r.ident_f1 = opt_double(v[19]);
  r.ident_poisoned_labeled = opt_size(v[20]);
  return r;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace psim
