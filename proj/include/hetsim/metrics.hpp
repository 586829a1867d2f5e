#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hetsim {

/// Raw run totals, filled by the engine.
struct Accumulators {
  std::int64_t subframes = 0;
  int macro_pico_handovers = 0;
  int pue_outages = 0;
  int mue_outages = 0;
  std::vector<double> user_tp_sum_bps;  // per user, summed over subframes
  double femto_tier_tp_sum_bps = 0.0;
  // Femto throughput while a trigger is active on it (own windows).
  double gain_tp_sum_bps = 0.0;
  std::int64_t gain_samples = 0;
  // Same quantity over externally supplied windows (paired baseline runs).
  double mask_tp_sum_bps = 0.0;
  std::int64_t mask_samples = 0;
  int total_actions = 0;
  int femto_count = 0;
};

struct MetricsReport {
  std::string label;
  int macro_pico_handovers = 0;
  int pue_outages = 0;
  int mue_outages = 0;
  double femto_eicic_tp_gain_mbps = 0.0;
  std::optional<double> femto_eicic_tp_gain_percent;
  double pedestrian_sum_tp_kbps = 0.0;
  double femto_tier_sum_tp_mbps = 0.0;
  double eicic_actions_per_femto_per_10min = 0.0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

struct SinrTrace {
  int user_id = -1;
  std::vector<std::pair<std::int64_t, double>> samples;  // (time_ms, sinr_db)

  friend bool operator==(const SinrTrace&, const SinrTrace&) = default;
};

class BaselineMissing : public std::runtime_error {
 public:
  BaselineMissing() : std::runtime_error("baseline missing") {}
};

/// Percent of the baseline's throughput over the same sample windows.
inline double gain_percent(const Accumulators& run, const Accumulators& baseline) {
  if (baseline.mask_samples != run.gain_samples) throw std::invalid_argument("baseline sampled different windows");
  if (baseline.mask_tp_sum_bps <= 0.0) return run.gain_tp_sum_bps > 0.0 ? 100.0 : 0.0;
  return run.gain_tp_sum_bps / baseline.mask_tp_sum_bps * 100.0;
}

/// `baseline` is the paired no-eICIC run sampled over this run's trigger windows.
inline MetricsReport finalize(const Accumulators& acc, const Accumulators* baseline, std::string label = {}) {
  MetricsReport r;
  r.label = std::move(label);
  r.macro_pico_handovers = acc.macro_pico_handovers;
  r.pue_outages = acc.pue_outages;
  r.mue_outages = acc.mue_outages;
  if (acc.subframes <= 0) {
    if (baseline) r.femto_eicic_tp_gain_percent = 0.0;
    return r;
  }
  const double n = static_cast<double>(acc.subframes);
  double ped = 0.0;
  for (double s : acc.user_tp_sum_bps) ped += s / n;
  r.pedestrian_sum_tp_kbps = ped / 1e3;
  r.femto_tier_sum_tp_mbps = acc.femto_tier_tp_sum_bps / n / 1e6;
  if (acc.gain_samples > 0) r.femto_eicic_tp_gain_mbps = acc.gain_tp_sum_bps / acc.gain_samples / 1e6;
  if (baseline) r.femto_eicic_tp_gain_percent = gain_percent(acc, *baseline);
  const double duration_s = n / 1000.0;
  if (acc.femto_count > 0)
    r.eicic_actions_per_femto_per_10min = acc.total_actions / static_cast<double>(acc.femto_count) / (duration_s / 600.0);
  return r;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kMetricsHeader =
    "label,macro_pico_handovers,pue_outages,mue_outages,femto_eicic_tp_gain_mbps,femto_eicic_tp_gain_percent,"
    "pedestrian_sum_tp_kbps,femto_tier_sum_tp_mbps,eicic_actions_per_femto_per_10min";

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v == 0.0 ? 0.0 : v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string metrics_csv_row(const MetricsReport& r) {
  std::ostringstream o;
  o << csv_field(r.label) << ',' << r.macro_pico_handovers << ',' << r.pue_outages << ',' << r.mue_outages << ','
    << fixed2(r.femto_eicic_tp_gain_mbps) << ','
    << (r.femto_eicic_tp_gain_percent ? fixed2(*r.femto_eicic_tp_gain_percent) : std::string()) << ','
    << fixed2(r.pedestrian_sum_tp_kbps) << ',' << fixed2(r.femto_tier_sum_tp_mbps) << ','
    << fixed2(r.eicic_actions_per_femto_per_10min);
  return o.str();
}

inline std::string metrics_csv(const std::vector<MetricsReport>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const MetricsReport& r : rows) out += metrics_csv_row(r) + "\n";
  return out;
}

inline std::string trace_csv(const SinrTrace& t) {
  std::string out = "time_ms,sinr_db\n";
  char buf[64];
  for (const auto& [ms, v] : t.samples) {
    std::snprintf(buf, sizeof buf, "%lld,%.4f\n", static_cast<long long>(ms), v);
    out += buf;
  }
  return out;
}

/// Writes `content` to `path` through a sibling temporary file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename into '" + path.string() + "': " + ec.message());
  }
}

/// Writes metrics.csv and one trace_<user>.csv per non-empty trace. All
/// content is rendered before the first file is touched.
inline void emit_csv(const std::vector<MetricsReport>& reports, const std::vector<SinrTrace>& traces,
                     const std::filesystem::path& out_dir) {
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  files.emplace_back(out_dir / "metrics.csv", metrics_csv(reports));
  for (const SinrTrace& t : traces)
    if (!t.samples.empty()) files.emplace_back(out_dir / ("trace_" + std::to_string(t.user_id) + ".csv"), trace_csv(t));
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw std::runtime_error("cannot create output directory '" + out_dir.string() + "'");
  for (const auto& [p, content] : files) write_file_atomic(p, content);
}

inline void emit_csv(const MetricsReport& report, const std::vector<SinrTrace>& traces,
                     const std::filesystem::path& out_dir) {
  emit_csv(std::vector<MetricsReport>{report}, traces, out_dir);
}

}  // namespace hetsim
