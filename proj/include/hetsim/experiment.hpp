#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "hetsim/engine.hpp"
#include "hetsim/metrics.hpp"
#include "hetsim/scenario.hpp"

namespace hetsim {

struct ExperimentSpec {
  std::string label;
  MethodAssignment methods;
};

struct ExperimentResult {
  std::string label;
  MetricsReport report;
  RunResult run;
  std::optional<Accumulators> baseline;  // paired no-eICIC run over this run's windows
};

/// The eight femto configurations of the comparison table, macro ABSF as configured in `cfg`.
inline std::vector<ExperimentSpec> table2_specs(const ScenarioConfig& cfg) {
  const MacroAbsfConfig macro = cfg.eicic.macro_absf;
  Power4 p4;
  p4.sinr_tar_mue_db = 5.0;
  return {
      {"none", {NoEicic{}, macro}},
      {"time", {TimeAbsf{absf_pattern(AbsfDuty::Half)}, macro}},
      {"power1 alpha=1 beta=60", {Power1{1.0, 60.0}, macro}},
      {"power1 alpha=1 beta=75", {Power1{1.0, 75.0}, macro}},
      {"power2", {Power2{80.0, 50.0}, macro}},
      {"power3 tar=0", {Power3{0.0}, macro}},
      {"power3 tar=5", {Power3{5.0}, macro}},
      {"power4 tar=5", {p4, macro}},
  };
}

/// Time-compressed copy: duration divided by `factor`, user speeds multiplied by it.
inline ScenarioConfig compress_time(ScenarioConfig cfg, double factor) {
  cfg.sim.duration_s /= factor;
  for (UserSpec& u : cfg.users) u.speed_mps *= factor;
  return cfg;
}

inline constexpr double kFastDurationS = 60.0;

inline ScenarioConfig fast_preset(const ScenarioConfig& cfg) {
  if (cfg.sim.duration_s <= kFastDurationS) return cfg;
  return compress_time(cfg, cfg.sim.duration_s / kFastDurationS);
}

/// Worker count: hardware concurrency capped by HETSIM_THREADS and the job count.
inline unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HETSIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

/// Runs jobs[i]() for every i with up to worker_count threads. The first
/// exception (lowest index) is rethrown after all workers finish.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned w = worker_count(n);
  if (w <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < w; ++k) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Paired baseline: the same scenario under method None, femto throughput
/// sampled over `run`'s trigger windows.
inline Accumulators paired_baseline(const ScenarioConfig& cfg, const MethodAssignment& methods, const RunResult& run) {
  if (std::holds_alternative<NoEicic>(methods.femto)) {
    // None is its own baseline; its windows are sampled at every subframe.
    Accumulators b = run.acc;
    b.mask_tp_sum_bps = run.acc.gain_tp_sum_bps;
    b.mask_samples = run.acc.gain_samples;
    return b;
  }
  MethodAssignment none = methods;
  none.femto = NoEicic{};
  return hetsim::run(cfg, none, run.windows).acc;
}

/// Runs every spec (and its paired baseline when requested) in parallel; results keep spec order.
inline std::vector<ExperimentResult> run_experiments(const ScenarioConfig& cfg, const std::vector<ExperimentSpec>& specs,
                                                     bool with_baseline) {
  validate(cfg);
  std::vector<ExperimentResult> out(specs.size());
  parallel_for(specs.size(), [&](std::size_t i) {
    ExperimentResult& r = out[i];
    r.label = specs[i].label;
    r.run = hetsim::run(cfg, specs[i].methods);
  });
  if (with_baseline) {
    parallel_for(specs.size(), [&](std::size_t i) { out[i].baseline = paired_baseline(cfg, specs[i].methods, out[i].run); });
  }
  for (ExperimentResult& r : out)
    r.report = finalize(r.run.acc, r.baseline ? &*r.baseline : nullptr, r.label);
  return out;
}

/// Runs one spec per scenario variant (sweeps over scenario parameters).
inline std::vector<ExperimentResult> run_variants(const std::vector<ScenarioConfig>& cfgs,
                                                  const std::vector<ExperimentSpec>& specs, bool with_baseline) {
  if (cfgs.size() != specs.size()) throw std::invalid_argument("run_variants: size mismatch");
  for (const ScenarioConfig& c : cfgs) validate(c);
  std::vector<ExperimentResult> out(specs.size());
  parallel_for(specs.size(), [&](std::size_t i) {
    ExperimentResult& r = out[i];
    r.label = specs[i].label;
    r.run = hetsim::run(cfgs[i], specs[i].methods);
    if (with_baseline) r.baseline = paired_baseline(cfgs[i], specs[i].methods, r.run);
  });
  for (ExperimentResult& r : out)
    r.report = finalize(r.run.acc, r.baseline ? &*r.baseline : nullptr, r.label);
  return out;
}

}  // namespace hetsim
