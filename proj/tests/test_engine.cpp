#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "gen.hpp"
#include "hetsim/engine.hpp"
#include "hetsim/experiment.hpp"
#include "oracles.hpp"

using namespace hetsim;

namespace {

MethodAssignment with(const ScenarioConfig& s, EicicMethod m) {
  MethodAssignment a = MethodAssignment::from(s);
  a.femto = std::move(m);
  return a;
}

std::int64_t first_delivery(const RunResult& r) {
  for (const EicicEvent& e : r.events)
    if (e.kind == MessageKind::Trigger) return e.time_ms;
  return -1;
}

}  // namespace

TEST(OutageDetector, StrictAtThreshold) {
  OutageDetector d(-4.0, 200);
  for (int i = 0; i < 5000; ++i) d.update(-4.0);
  EXPECT_EQ(d.outage_count(), 0);
  OutageDetector e(-4.0, 200);
  for (int i = 0; i < 199; ++i) EXPECT_FALSE(e.update(-4.000001));
  EXPECT_TRUE(e.update(-4.000001));
  for (int i = 0; i < 1000; ++i) EXPECT_FALSE(e.update(-10.0));
  EXPECT_EQ(e.outage_count(), 1);
  e.update(0.0);
  for (int i = 0; i < 200; ++i) e.update(-5.0);
  EXPECT_EQ(e.outage_count(), 2);
}

TEST(OutageDetector, MatchesRunLengthOracle) {
  gen::Rng r(61);
  for (int c = 0; c < 200; ++c) {
    std::vector<double> s;
    while (s.size() < 3000) {
      const double v = r.coin() ? r.uniform(-8.0, -4.0001) : r.uniform(-4.0, 5.0);
      const int len = r.integer(1, 400);
      s.insert(s.end(), static_cast<std::size_t>(len), v);
    }
    OutageDetector d(-4.0, 200);
    for (double v : s) d.update(v);
    EXPECT_EQ(d.outage_count(), oracle::outages(s, -4.0, 200));
  }
}

TEST(Engine, ZeroDurationIsEmpty) {
  ScenarioConfig s = fixture::street_pass(0.0);
  const RunResult r = run(s, with(s, Power2{}));
  EXPECT_EQ(r.acc.subframes, 0);
  const MetricsReport m = finalize(r.acc, nullptr, "x");
  EXPECT_EQ(m, (MetricsReport{"x"}));
  for (const SinrTrace& t : r.traces) EXPECT_TRUE(t.samples.empty());
}

TEST(Engine, RepeatedRunsAreBitIdentical) {
  ScenarioConfig s = fixture::with_pico(40.0);
  s.radio.shadowing_sigma_db = 6.0;
  s.eicic.pl_estimation_sigma_db = 2.0;
  for (const EicicMethod& m : std::vector<EicicMethod>{NoEicic{}, TimeAbsf{}, Power2{}, Power4{}}) {
    const RunResult a = run(s, with(s, m));
    const RunResult b = run(s, with(s, m));
    EXPECT_EQ(a.traces, b.traces);
    EXPECT_EQ(a.events, b.events);
    EXPECT_EQ(a.windows, b.windows);
    EXPECT_EQ(a.acc.user_tp_sum_bps, b.acc.user_tp_sum_bps);
    EXPECT_EQ(a.acc.femto_tier_tp_sum_bps, b.acc.femto_tier_tp_sum_bps);
    EXPECT_EQ(finalize(a.acc, nullptr), finalize(b.acc, nullptr));
  }
}

TEST(Engine, ShadowingIsSeeded) {
  ScenarioConfig s = fixture::street_pass(20.0);
  const RunResult flat = run(s);
  s.radio.shadowing_sigma_db = 8.0;
  const RunResult a = run(s);
  EXPECT_NE(a.traces, flat.traces);
  s.sim.seed = 7;
  const RunResult b = run(s);
  EXPECT_NE(a.traces, b.traces);
}

TEST(Engine, VictimPassCausesOutageWithoutEicic) {
  const ScenarioConfig s = fixture::street_pass();
  const RunResult r = run(s, with(s, NoEicic{}));
  EXPECT_GE(r.acc.mue_outages, 1);
  EXPECT_EQ(r.acc.pue_outages, 0);
  ASSERT_FALSE(r.windows.empty());
  double lowest = 0.0;
  for (const auto& [t, v] : r.traces[0].samples) lowest = std::min(lowest, v);
  EXPECT_LT(lowest, -4.0);
}

TEST(Engine, EveryMethodProtectsTheFixtureVictim) {
  const ScenarioConfig s = fixture::street_pass();
  for (const EicicMethod& m :
       std::vector<EicicMethod>{TimeAbsf{}, Power1{1, 60}, Power2{}, Power3{0}, Power4{}}) {
    const RunResult r = run(s, with(s, m));
    EXPECT_EQ(r.acc.mue_outages, 0) << method_name(m);
    const std::int64_t t0 = first_delivery(r);
    ASSERT_GE(t0, 0) << method_name(m);
    EXPECT_GE(r.acc.total_actions, 1) << method_name(m);
  }
}

TEST(Engine, MessagesAreNeverEarly) {
  const ScenarioConfig s = fixture::with_pico();
  for (const EicicMethod& m : std::vector<EicicMethod>{NoEicic{}, TimeAbsf{}, Power2{}, Power4{}}) {
    const RunResult r = run(s, with(s, m));
    ASSERT_FALSE(r.events.empty());
    for (const EicicEvent& e : r.events) {
      EXPECT_GE(e.time_ms, e.sent_ms + s.eicic.femto_backhaul_ms);
      EXPECT_EQ(e.sent_ms % s.radio.cqi_report_period_ms, 0);
    }
  }
}

TEST(Engine, RouteEndClampsAndLoops) {
  ScenarioConfig s = fixture::street_pass(60.0);
  {
    Simulator sim(s, MethodAssignment::from(s));
    while (!sim.done()) sim.step();
    EXPECT_EQ(sim.user_position(0), (Point{130.0, 99.5}));
  }
  s.users[0].loop_route = true;
  Simulator sim(s, MethodAssignment::from(s));
  while (!sim.done()) sim.step();
  // 59.999 s at 1.1 m/s wraps once around the 50 m route.
  const double s_end = std::fmod(1.1 * 59.999, 50.0);
  EXPECT_NEAR(sim.user_position(0).x, 80.0 + s_end, 1e-9);
}

TEST(Engine, ScheduleLoadsUnderTimeAbsf) {
  ScenarioConfig s = fixture::street_pass();
  s.eicic.macro_absf.enabled = false;
  Simulator sim(s, with(s, TimeAbsf{}));
  while (!sim.done() && !sim.trigger_state(1).pattern_active) sim.step();
  ASSERT_TRUE(sim.trigger_state(1).pattern_active);
  for (std::int64_t t = sim.clock_ms(); t < sim.clock_ms() + 40; ++t) {
    const auto a = sim.schedule_loads(t);
    EXPECT_EQ(a[0], 1.0);
    EXPECT_EQ(a[1], t % 2 == 1 ? 1.0 : 0.0);
  }
}

TEST(Engine, ScheduleLoadsUnderPowerControl) {
  ScenarioConfig s = fixture::street_pass();
  s.eicic.macro_absf = {true, AbsfDuty::OneEighth};
  Simulator sim(s, with(s, Power2{}));
  while (!sim.done() && !sim.trigger_state(1).active) sim.step();
  ASSERT_TRUE(sim.trigger_state(1).active);
  EXPECT_LT(sim.cell_power_dbm(1), 20.0);
  for (std::int64_t t = 0; t < 40; ++t) {
    const auto a = sim.schedule_loads(t);
    EXPECT_EQ(a[0], t % 8 == 0 ? 0.0 : 1.0);
    EXPECT_EQ(a[1], 1.0);
  }
}

TEST(Engine, ProtectedSinrIndependentOfFemtoPower) {
  ScenarioConfig hi = fixture::street_pass();
  ScenarioConfig lo = hi;
  lo.cells[1].max_tx_power_dbm = 12.0;
  const RunResult a = run(hi, with(hi, TimeAbsf{}));
  const RunResult b = run(lo, with(lo, TimeAbsf{}));
  ASSERT_FALSE(a.windows.empty());
  ASSERT_FALSE(b.windows.empty());
  const std::int64_t from = std::max(a.windows.front().start_ms, b.windows.front().start_ms) + 20;
  const std::int64_t to = std::min(a.windows.front().end_ms, b.windows.front().end_ms) - 20;
  ASSERT_LT(from, to);
  std::map<std::int64_t, double> sa(a.traces[0].samples.begin(), a.traces[0].samples.end());
  int compared = 0;
  for (const auto& [t, v] : b.traces[0].samples) {
    if (t < from || t >= to || !sa.count(t)) continue;
    EXPECT_NEAR(sa[t], v, 1e-9) << "t=" << t;
    ++compared;
  }
  EXPECT_GT(compared, 10);
}

TEST(Engine, ResidualLeaksIntoProtectedSubframes) {
  ScenarioConfig s = fixture::street_pass();
  const RunResult clean = run(s, with(s, TimeAbsf{}));
  s.eicic.absf_residual_offset_db = 10.0;
  const RunResult leaky = run(s, with(s, TimeAbsf{}));
  const TriggerWindow& w = clean.windows.front();
  std::map<std::int64_t, double> c(clean.traces[0].samples.begin(), clean.traces[0].samples.end());
  int lower = 0;
  for (const auto& [t, v] : leaky.traces[0].samples) {
    if (t < w.start_ms + 20 || t >= w.end_ms || !c.count(t)) continue;
    EXPECT_LE(v, c[t] + 1e-9);
    lower += v < c[t] - 1e-6 ? 1 : 0;
  }
  EXPECT_GT(lower, 0);
}

TEST(Engine, TimeAbsfFemtoThroughputAtMostHalf) {
  ScenarioConfig s = fixture::street_pass();
  s.eicic.macro_absf.enabled = false;
  Simulator none(s, with(s, NoEicic{}));
  none.step();
  const double full = none.last_femto_tp_bps(1);
  Simulator sim(s, with(s, TimeAbsf{}));
  while (!sim.done() && !sim.trigger_state(1).pattern_active) sim.step();
  double sum = 0.0;
  for (int k = 0; k < 2; ++k) {
    sim.step();
    sum += sim.last_femto_tp_bps(1);
  }
  EXPECT_GT(full, 0.0);
  EXPECT_LE(sum / 2.0, full / 2.0 + 1e-9);
}

TEST(Engine, LowerInterfererPowerNeverAddsOutages) {
  gen::Rng r(62);
  ScenarioConfig s = fixture::with_pico();
  std::vector<double> powers = r.doubles(5, -5.0, 20.0);
  std::sort(powers.begin(), powers.end());
  int prev = -1;
  for (double p : powers) {
    s.cells[1].max_tx_power_dbm = p;
    const RunResult res = run(s, with(s, NoEicic{}));
    if (prev >= 0) EXPECT_GE(res.acc.mue_outages, prev) << "power " << p;
    prev = res.acc.mue_outages;
  }
}

TEST(Engine, MacroPicoCounterMatchesHandoverLog) {
  ScenarioConfig s = fixture::with_pico(60.0);
  s.users[1].route = {{0.0, 150.0}, {60.0, 150.0}, {0.0, 150.0}};
  const RunResult r = run(s);
  int mp = 0;
  for (const HandoverEvent& h : r.handovers)
    mp += (h.from_cell == 0 && h.to_cell == 2) || (h.from_cell == 2 && h.to_cell == 0) ? 1 : 0;
  EXPECT_GT(mp, 0);
  EXPECT_EQ(r.acc.macro_pico_handovers, mp);
}

TEST(Engine, OutageOnsetIsSampledInTrace) {
  const ScenarioConfig s = fixture::street_pass();
  Simulator sim(s, with(s, NoEicic{}));
  OutageDetector d(s.radio.outage_threshold_db, s.radio.outage_window_ms);
  std::vector<std::int64_t> onsets;
  while (!sim.done()) {
    sim.step();
    if (d.update(sim.last_accounted_sinr(0))) onsets.push_back(sim.clock_ms() - 1);
  }
  const RunResult r = sim.finish();
  ASSERT_FALSE(onsets.empty());
  for (std::int64_t t : onsets) {
    bool found = false;
    for (const auto& [ts, v] : r.traces[0].samples) found = found || ts == t;
    EXPECT_TRUE(found) << t;
  }
  for (const auto& [ts, v] : r.traces[0].samples) {
    const bool onset = std::find(onsets.begin(), onsets.end(), ts) != onsets.end();
    EXPECT_TRUE(ts % s.sim.trace_decimation_ms == 0 || onset);
  }
}

TEST(Engine, GainAnchorsOnFixture) {
  const ScenarioConfig s = fixture::street_pass();
  const auto res = run_experiments(
      s, {{"none", with(s, NoEicic{})}, {"time", with(s, TimeAbsf{})}, {"p1", with(s, Power1{1, 60})}}, true);
  EXPECT_DOUBLE_EQ(*res[0].report.femto_eicic_tp_gain_percent, 100.0);
  EXPECT_DOUBLE_EQ(*res[1].report.femto_eicic_tp_gain_percent, 0.0);
  EXPECT_GT(*res[2].report.femto_eicic_tp_gain_percent, 0.0);
  EXPECT_LT(*res[2].report.femto_eicic_tp_gain_percent, 100.0);
}

TEST(Engine, ValidationErrorsPropagate) {
  ScenarioConfig s = fixture::street_pass();
  s.cells[0].access = AccessMode::Csg;
  EXPECT_THROW(run(s), ValidationError);
}

TEST(Engine, PedestrianSumIsSumOfUserMeans) {
  const ScenarioConfig s = fixture::with_pico(30.0);
  const RunResult r = run(s, with(s, Power2{}));
  const MetricsReport m = finalize(r.acc, nullptr);
  double sum = 0.0;
  for (double u : r.acc.user_tp_sum_bps) sum += u / static_cast<double>(r.acc.subframes);
  EXPECT_NEAR(m.pedestrian_sum_tp_kbps, sum / 1e3, 1e-9);
}
