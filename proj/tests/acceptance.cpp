// Acceptance run: prints PASS/FAIL per criterion, exit status 1 if any fails.
// Criteria 2-7 are checked on the default scenario at full length and with the fast preset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gen.hpp"
#include "hetsim/hetsim.hpp"
#include "oracles.hpp"

using namespace hetsim;

namespace {

// Pinned tolerances and budgets.
constexpr double kOracleTolDb = 1e-9;
constexpr int kOracleCases = 1000;
constexpr double kOracleBudgetS = 1.0;
constexpr double kRunBudgetS = 120.0;
constexpr double kInvariantBudgetS = 60.0;
constexpr int kMinNoneMueOutages = 50;
constexpr int kPlannedCrossings = 5;
constexpr double kOutageThresholdDb = -4.0;
constexpr double kDominanceTolDb = 1e-9;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "  ok   " : "  FAIL ") + what);
  }
};

std::map<int, Verdict> verdicts;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Row {
  std::string label;
  ExperimentSpec spec;
  RunResult run;
  MetricsReport report;
  double seconds = 0.0;
};

std::vector<Row> run_table(const ScenarioConfig& cfg) {
  const std::vector<ExperimentSpec> specs = table2_specs(cfg);
  std::vector<Row> rows(specs.size());
  parallel_for(specs.size(), [&](std::size_t i) {
    Row& r = rows[i];
    r.label = specs[i].label;
    r.spec = specs[i];
    const auto t0 = Clock::now();
    r.run = hetsim::run(cfg, specs[i].methods);
    r.seconds = since(t0);
    const Accumulators base = paired_baseline(cfg, specs[i].methods, r.run);
    r.report = finalize(r.run.acc, &base, r.label);
  });
  return rows;
}

const Row& row(const std::vector<Row>& rows, const std::string& label) {
  for (const Row& r : rows)
    if (r.label == label) return r;
  throw std::runtime_error("no row " + label);
}

const std::vector<std::string> kZeroOutage{"time", "power1 alpha=1 beta=60", "power2", "power3 tar=0", "power4 tar=5"};
const std::vector<std::string> kMistuned{"power1 alpha=1 beta=75", "power3 tar=5"};
const std::vector<std::string> kPowerZeroOutage{"power1 alpha=1 beta=60", "power2", "power3 tar=0", "power4 tar=5"};

void criterion1() {
  Verdict& v = verdicts[1];
  const auto t0 = Clock::now();
  gen::Rng r(1001);
  double worst = 0.0;
  int mismatched_patterns = 0;
  for (int i = 0; i < kOracleCases; ++i) {
    PowerControlInputs in;
    in.p_max_dbm = r.uniform(0, 30);
    in.p_min_dbm = r.uniform(-20, in.p_max_dbm);
    in.p_m_dbm = r.uniform(-120, -30);
    in.p_ipl_db = r.uniform(30, 120);
    in.pl_hat_db = r.uniform(40, 110);
    in.interference_dbm = r.uniform(-130, -40);
    in.noise_dbm = r.uniform(-110, -85);
    in.p_sinr_db = r.uniform(-30, 30);
    const double a = r.uniform(0, 2), b = r.uniform(20, 100), hi = r.uniform(40, 100), lo = r.uniform(20, hi);
    const double tar = r.uniform(-10, 20), b4 = r.uniform(-20, 40);
    worst = std::max(worst, std::abs(power_method_1(in, a, b) - oracle::power1(in.p_m_dbm, a, b, in.p_max_dbm, in.p_min_dbm)));
    worst = std::max(worst, std::abs(power_method_2(in, hi, lo) -
                                     oracle::power2(in.p_m_dbm, in.p_ipl_db, hi, lo, in.p_max_dbm, in.p_min_dbm)));
    worst = std::max(worst, std::abs(power_method_3(in, tar) - oracle::power3(in.pl_hat_db, in.interference_dbm,
                                                                              in.noise_dbm, tar, in.p_max_dbm,
                                                                              in.p_min_dbm)));
    worst = std::max(worst, std::abs(power_method_4(in, a, b4) -
                                     oracle::power4(in.p_sinr_db, a, b4, in.p_max_dbm, in.p_min_dbm)));
    const double x = r.uniform(-50, 50), y = r.uniform(-50, 50), z = r.uniform(-50, 50);
    worst = std::max(worst, std::abs(med3(x, y, z) - oracle::median_of_three(x, y, z)));
    const double s = r.uniform(-110, -30), n = r.uniform(-110, -85);
    const std::vector<double> itf = r.doubles(r.integer(0, 6), -130, -40);
    worst = std::max(worst, std::abs(sinr_db(s, itf, n, 1e9) - oracle::sinr_db(s, itf, n)));
    const std::string& d = r.pick(gen::duties());
    const std::int64_t t = r.integer(0, 1000000);
    if (is_blanked(absf_pattern(d), t) != oracle::blanked(oracle::absf(d), t)) ++mismatched_patterns;
  }
  const double secs = since(t0);
  v.require(worst <= kOracleTolDb, "max |library - oracle| = " + fmt("%.3g dB", worst) + " over " +
                                       std::to_string(kOracleCases) + " cases per formula");
  v.require(mismatched_patterns == 0, "absf_pattern mismatches: " + std::to_string(mismatched_patterns));
  v.require(secs < kOracleBudgetS, "runtime " + fmt("%.3f s", secs));
}

void criterion2(const std::string& tag, const std::vector<Row>& rows) {
  Verdict& v = verdicts[2];
  const int none = row(rows, "none").report.mue_outages;
  v.require(none >= kMinNoneMueOutages, tag + " none MUE outages " + std::to_string(none) + " >= 50");
  for (const std::string& l : kZeroOutage) {
    const int n = row(rows, l).report.mue_outages;
    v.require(n == 0, tag + " " + l + " MUE outages " + std::to_string(n) + " == 0");
  }
  for (const std::string& l : kMistuned) {
    const int n = row(rows, l).report.mue_outages;
    v.require(n >= 1, tag + " " + l + " MUE outages " + std::to_string(n) + " >= 1");
  }
  double slowest = 0.0;
  for (const Row& r : rows) slowest = std::max(slowest, r.seconds);
  v.require(slowest < kRunBudgetS, tag + " slowest run " + fmt("%.1f s", slowest));
}

void criterion3(const std::string& tag, const std::vector<Row>& rows) {
  Verdict& v = verdicts[3];
  const auto pct = [&](const std::string& l) { return row(rows, l).report.femto_eicic_tp_gain_percent.value_or(NAN); };
  v.require(fixed2(pct("none")) == "100.00", tag + " none gain " + fixed2(pct("none")) + "% == 100.00%");
  v.require(fixed2(pct("time")) == "0.00", tag + " time gain " + fixed2(pct("time")) + "% == 0.00%");
  for (const std::string& l : kPowerZeroOutage) {
    const double p = pct(l);
    v.require(p > 0.0 && p < 100.0, tag + " " + l + " gain " + fixed2(p) + "% in (0, 100)");
  }
  v.require(pct("power2") > pct("power3 tar=0"),
            tag + " power2 gain " + fixed2(pct("power2")) + "% > power3 tar=0 gain " + fixed2(pct("power3 tar=0")) + "%");
}

void criterion4(const std::string& tag, const std::vector<Row>& rows) {
  Verdict& v = verdicts[4];
  std::vector<const Row*> by_ped, by_tier;
  for (const Row& r : rows) {
    by_ped.push_back(&r);
    by_tier.push_back(&r);
  }
  std::stable_sort(by_ped.begin(), by_ped.end(), [](const Row* a, const Row* b) {
    return a->report.pedestrian_sum_tp_kbps > b->report.pedestrian_sum_tp_kbps;
  });
  std::stable_sort(by_tier.begin(), by_tier.end(), [](const Row* a, const Row* b) {
    return a->report.femto_tier_sum_tp_mbps < b->report.femto_tier_sum_tp_mbps;
  });
  std::ostringstream p, t;
  bool reversed = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    p << (i ? " > " : "") << by_ped[i]->label << " (" << fixed2(by_ped[i]->report.pedestrian_sum_tp_kbps) << ")";
    t << (i ? " < " : "") << by_tier[i]->label << " (" << fixed2(by_tier[i]->report.femto_tier_sum_tp_mbps) << ")";
    reversed = reversed && by_ped[i] == by_tier[i];
  }
  v.notes.push_back("       " + tag + " pedestrian kbps: " + p.str());
  v.notes.push_back("       " + tag + " femto tier Mbps: " + t.str());
  v.require(by_ped.front()->label == "time", tag + " time maximal in pedestrian TP (got " + by_ped.front()->label + ")");
  v.require(by_tier.back()->label == "none", tag + " none maximal in femto-tier TP (got " + by_tier.back()->label + ")");
  v.require(reversed, tag + " pedestrian ranking is the exact reverse of femto-tier ranking");
}

void criterion5(const std::string& tag, const ScenarioConfig& base) {
  Verdict& v = verdicts[5];
  ScenarioConfig cfg = base;
  cfg.sim.pico_bias_db = 10.0;
  const MacroAbsfConfig on{true, AbsfDuty::Half}, off{false, AbsfDuty::Half};
  const auto res = run_experiments(cfg, {{"on", {NoEicic{}, on}}, {"off", {NoEicic{}, off}}}, false);
  const MetricsReport& a = res[0].report;
  const MetricsReport& b = res[1].report;
  v.require(a.pue_outages == 0, tag + " macro ABSF 1/2: PUE outages " + std::to_string(a.pue_outages) + " == 0");
  v.require(a.macro_pico_handovers == kPlannedCrossings,
            tag + " macro ABSF 1/2: macro-pico HOs " + std::to_string(a.macro_pico_handovers) + " == 5");
  const int need = std::max(1, static_cast<int>(std::ceil(0.2 * kPlannedCrossings)));
  v.require(b.pue_outages >= need,
            tag + " macro ABSF off: PUE outages " + std::to_string(b.pue_outages) + " >= " + std::to_string(need));
}

void criterion6(const std::string& tag, const std::vector<Row>& rows) {
  Verdict& v = verdicts[6];
  const auto act = [&](const std::string& l) { return row(rows, l).report.eicic_actions_per_femto_per_10min; };
  const double p1 = act("power1 alpha=1 beta=60");
  v.require(act("power2") > p1, tag + " power2 actions " + fixed2(act("power2")) + " > power1 beta=60 " + fixed2(p1));
  v.require(act("power4 tar=5") > p1,
            tag + " power4 actions " + fixed2(act("power4 tar=5")) + " > power1 beta=60 " + fixed2(p1));
}

struct Pass {
  int user = -1;
  int femto = -1;
};

// First triggered window of `femto` for `user` in a run: [delivery, window end).
std::optional<std::pair<std::int64_t, std::int64_t>> pass_window(const RunResult& r, const Pass& p) {
  for (const EicicEvent& e : r.events) {
    if (e.kind != MessageKind::Trigger || e.victim_user != p.user || e.femto_cell != p.femto) continue;
    for (const TriggerWindow& w : r.windows)
      if (w.femto_cell == p.femto && w.start_ms <= e.time_ms && e.time_ms < w.end_ms) return std::make_pair(e.time_ms, w.end_ms);
  }
  return std::nullopt;
}

const SinrTrace& trace_of(const RunResult& r, int user) {
  for (const SinrTrace& t : r.traces)
    if (t.user_id == user) return t;
  throw std::runtime_error("no trace");
}

void criterion7(const std::string& tag, const std::vector<Row>& rows) {
  Verdict& v = verdicts[7];
  const RunResult& none = row(rows, "none").run;
  // The first pass in the no-eICIC run whose trace dips below the outage threshold.
  std::optional<Pass> pass;
  for (const EicicEvent& e : none.events) {
    if (e.kind != MessageKind::Trigger) continue;
    const Pass p{e.victim_user, e.femto_cell};
    const auto w = pass_window(none, p);
    if (!w) continue;
    for (const auto& [t, s] : trace_of(none, p.user).samples)
      if (t >= w->first && t < w->second && s < kOutageThresholdDb) pass = p;
    if (pass) break;
  }
  v.require(pass.has_value(), tag + " no-eICIC trace dips below -4 dB during a femto pass");
  if (!pass) return;
  v.notes.push_back("       " + tag + " pass: user " + std::to_string(pass->user) + " at femto " + std::to_string(pass->femto));

  std::map<std::string, std::pair<std::int64_t, std::int64_t>> windows;
  for (const std::string& l : kZeroOutage) {
    const RunResult& r = row(rows, l).run;
    const auto w = pass_window(r, *pass);
    v.require(w.has_value(), tag + " " + l + " triggers on the pass");
    if (!w) continue;
    windows[l] = *w;
    double lowest = INFINITY;
    for (const auto& [t, s] : trace_of(r, pass->user).samples)
      if (t >= w->first && t < w->second) lowest = std::min(lowest, s);
    v.require(lowest >= kOutageThresholdDb,
              tag + " " + l + " min SINR after first delivery " + fmt("%.2f dB", lowest) + " >= -4");
  }
  if (!windows.count("time")) return;
  std::map<std::int64_t, double> time_trace;
  for (const auto& [t, s] : trace_of(row(rows, "time").run, pass->user).samples) time_trace[t] = s;
  for (const std::string& l : kPowerZeroOutage) {
    if (!windows.count(l)) continue;
    const std::int64_t from = std::max(windows["time"].first, windows[l].first);
    const std::int64_t to = std::min(windows["time"].second, windows[l].second);
    int compared = 0, below = 0;
    double worst = 0.0;
    for (const auto& [t, s] : trace_of(row(rows, l).run, pass->user).samples) {
      if (t < from || t >= to || !time_trace.count(t)) continue;
      ++compared;
      if (time_trace[t] + kDominanceTolDb < s) {
        ++below;
        worst = std::max(worst, s - time_trace[t]);
      }
    }
    v.require(compared > 0 && below == 0, tag + " time >= " + l + " on " + std::to_string(compared) +
                                              " shared samples (violations " + std::to_string(below) +
                                              ", worst " + fmt("%.3f dB", worst) + ")");
  }
}

void criterion8(const ScenarioConfig& fast_cfg, const std::vector<std::vector<Row>>& tables) {
  Verdict& v = verdicts[8];
  const auto t0 = Clock::now();
  MethodAssignment m = MethodAssignment::from(fast_cfg);
  m.femto = Power2{};
  const RunResult a = hetsim::run(fast_cfg, m);
  const RunResult b = hetsim::run(fast_cfg, m);
  const bool same = a.traces == b.traces && a.events == b.events && a.windows == b.windows &&
                    a.acc.user_tp_sum_bps == b.acc.user_tp_sum_bps &&
                    a.acc.femto_tier_tp_sum_bps == b.acc.femto_tier_tp_sum_bps &&
                    finalize(a.acc, nullptr) == finalize(b.acc, nullptr);
  v.require(same, "repeated fast power2 runs are bit-identical");

  OutageDetector d(kOutageThresholdDb, 200);
  for (int i = 0; i < 10000; ++i) d.update(kOutageThresholdDb);
  v.require(d.outage_count() == 0, "constant SINR of exactly -4 dB yields zero outages");

  gen::Rng r(1008);
  const std::vector<CellSite> cells{{0, CellKind::Macro, {0, 0}, 46, AccessMode::Open, {}, 20, std::nullopt},
                                    {1, CellKind::Pico, {1, 0}, 30, AccessMode::Open, {}, 20, std::nullopt},
                                    {2, CellKind::Femto, {2, 0}, 20, AccessMode::Csg, {}, 20, std::nullopt}};
  int bias_mismatch = 0, clamp_violations = 0;
  for (int i = 0; i < 2000; ++i) {
    UserSpec u;
    if (r.coin()) u.csg_memberships = {2};
    const std::vector<double> rss = r.doubles(3, -120, -40);
    const BiasMap bm{r.uniform(-5, 5), r.uniform(0, 15), r.uniform(-5, 5)};
    const double k = r.uniform(-30, 30);
    if (select_from_rss(u, cells, rss, bm).cell_id !=
        select_from_rss(u, cells, rss, {bm.macro_db + k, bm.pico_db + k, bm.femto_db + k}).cell_id)
      ++bias_mismatch;
    PowerControlInputs in;
    in.p_max_dbm = r.uniform(0, 30);
    in.p_min_dbm = r.uniform(-20, in.p_max_dbm);
    in.p_m_dbm = r.uniform(-200, 50);
    in.p_ipl_db = r.uniform(0, 200);
    in.pl_hat_db = r.uniform(0, 200);
    in.interference_dbm = r.uniform(-200, 0);
    in.noise_dbm = r.uniform(-120, -80);
    in.p_sinr_db = r.uniform(-60, 60);
    for (const EicicMethod& mm : std::vector<EicicMethod>{Power1{r.uniform(0, 3), r.uniform(-50, 150)}, Power2{},
                                                          Power3{r.uniform(-10, 20)}, Power4{}}) {
      const double p = method_power(mm, in);
      if (p < in.p_min_dbm || p > in.p_max_dbm) ++clamp_violations;
    }
  }
  v.require(bias_mismatch == 0, "argmax invariant under a common bias shift (" + std::to_string(bias_mismatch) + " mismatches)");
  v.require(clamp_violations == 0, "power methods within [p_min, p_max] (" + std::to_string(clamp_violations) + " violations)");

  int duty_errors = 0;
  for (const std::string& dd : gen::duties()) {
    const AbsfPattern p = absf_pattern(dd);
    for (int start = 0; start < 100; ++start) {
      int n = 0;
      for (int t = start; t < start + p.period; ++t) n += is_blanked(p, t) ? 1 : 0;
      if (n != static_cast<int>(p.blanked.size())) ++duty_errors;
    }
  }
  v.require(duty_errors == 0, "duty cycle exact in every period-long window");

  int early = 0, events = 0;
  for (const auto& table : tables)
    for (const Row& row : table)
      for (const EicicEvent& e : row.run.events) {
        ++events;
        if (e.time_ms < e.sent_ms + fast_cfg.eicic.femto_backhaul_ms) ++early;
      }
  v.require(early == 0, "no coordination message applied before send + backhaul (" + std::to_string(events) + " checked)");
  const double secs = since(t0);
  v.require(secs < kInvariantBudgetS, "determinism and invariant checks " + fmt("%.1f s", secs));
}

}  // namespace

int main() {
  const auto start = Clock::now();
  std::printf("acceptance: default scenario seed 42, threads %u\n", worker_count(64));
  criterion1();

  const ScenarioConfig full = generate_default_scenario(42);
  const ScenarioConfig fast = fast_preset(full);
  std::vector<std::vector<Row>> tables;
  for (const auto& [tag, cfg] : std::vector<std::pair<std::string, ScenarioConfig>>{{"[600s]", full}, {"[fast]", fast}}) {
    const auto t0 = Clock::now();
    std::vector<Row> rows = run_table(cfg);
    std::printf("%s table computed in %.1f s\n", tag.c_str(), since(t0));
    for (const Row& r : rows) std::printf("  %s %s\n", tag.c_str(), metrics_csv_row(r.report).c_str());
    criterion2(tag, rows);
    criterion3(tag, rows);
    criterion4(tag, rows);
    criterion5(tag, cfg);
    criterion6(tag, rows);
    criterion7(tag, rows);
    tables.push_back(std::move(rows));
  }
  criterion8(fast, tables);

  const char* names[] = {"",
                         "formula oracles",
                         "outage ordering",
                         "femto gain anchors",
                         "pedestrian vs femto-tier anti-ordering",
                         "pico protection",
                         "adaptive-method retriggering",
                         "trace shape on a victim pass",
                         "determinism and invariants"};
  bool all = true;
  for (const auto& [id, v] : verdicts) {
    std::printf("%s criterion %d: %s\n", v.pass ? "PASS" : "FAIL", id, names[id]);
    for (const std::string& n : v.notes) std::printf("%s\n", n.c_str());
    all = all && v.pass;
  }
  std::printf("acceptance %s in %.1f s\n", all ? "PASSED" : "FAILED", since(start));
  return all ? 0 : 1;
}
