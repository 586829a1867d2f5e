#include <gtest/gtest.h>

#include <cmath>

#include "gen.hpp"
#include "hetsim/radio.hpp"

using namespace hetsim;

TEST(Radio, DbmConversionsRoundTrip) {
  EXPECT_DOUBLE_EQ(dbm_to_mw(0.0), 1.0);
  EXPECT_DOUBLE_EQ(dbm_to_mw(30.0), 1000.0);
  EXPECT_DOUBLE_EQ(mw_to_dbm(1.0), 0.0);
  EXPECT_EQ(mw_to_dbm(0.0), kNegInf);
  gen::Rng r(11);
  for (int i = 0; i < 500; ++i) {
    const double x = r.uniform(-150.0, 60.0);
    EXPECT_NEAR(mw_to_dbm(dbm_to_mw(x)), x, 1e-9);
  }
}

TEST(Radio, MacroPathLossAtReference) {
  const PathLossModel m = macro_path_loss();
  EXPECT_NEAR(distance_loss_db(m, 1000.0), 128.1, 1e-12);
  EXPECT_NEAR(distance_loss_db(m, 100.0), 128.1 - 37.6, 1e-12);
  const PathLossModel p = pico_path_loss();
  EXPECT_NEAR(distance_loss_db(p, 100.0), 140.7 - 36.7, 1e-12);
  const PathLossModel f = femto_path_loss();
  EXPECT_NEAR(distance_loss_db(f, 10.0), 127.0 - 60.0, 1e-12);
}

TEST(Radio, DistanceIsFlooredAtMinimum) {
  const PathLossModel m = femto_path_loss();
  EXPECT_DOUBLE_EQ(distance_loss_db(m, 0.0), distance_loss_db(m, 1.0));
  EXPECT_DOUBLE_EQ(distance_loss_db(m, 0.3), distance_loss_db(m, 1.0));
}

TEST(Radio, WallLossPerIndoorEnd) {
  const PathLossModel m = femto_path_loss();
  const IndoorRef out{};
  const IndoorRef a{3, 10.0}, b{4, 7.0};
  EXPECT_EQ(wall_loss_db(m, out, out), 0.0);
  EXPECT_EQ(wall_loss_db(m, a, out), 10.0);
  EXPECT_EQ(wall_loss_db(m, out, b), 7.0);
  EXPECT_EQ(wall_loss_db(m, a, b), 17.0);
  EXPECT_EQ(wall_loss_db(m, a, a), 0.0);
  PathLossModel no_wall = m;
  no_wall.wall_loss = false;
  EXPECT_EQ(wall_loss_db(no_wall, a, b), 0.0);
}

TEST(Radio, ObstructionCountIsCapped) {
  const PathLossModel m = femto_path_loss();
  const Point a{0, 0}, b{50, 0};
  const double base = path_loss_db(m, a, b);
  EXPECT_NEAR(path_loss_db(m, a, b, {}, {}, 1), base + 10.0, 1e-12);
  EXPECT_NEAR(path_loss_db(m, a, b, {}, {}, 2), base + 20.0, 1e-12);
  EXPECT_NEAR(path_loss_db(m, a, b, {}, {}, 9), base + 20.0, 1e-12);
}

TEST(Radio, NoiseFloor) {
  EXPECT_NEAR(noise_floor_dbm(20e6, 9.0), -174.0 + 10.0 * std::log10(20e6) + 9.0, 1e-12);
}

TEST(Radio, SinrZeroDenominatorUsesCeiling) {
  EXPECT_EQ(sinr_db_mw(1.0, 0.0, 0.0), kSinrCeilingDb);
  EXPECT_EQ(sinr_db_mw(1.0, 0.0, 0.0, 17.0), 17.0);
  EXPECT_EQ(sinr_db_mw(0.0, 1.0, 1.0), kNegInf);
}

TEST(Radio, SinrMonotoneInInterference) {
  gen::Rng r(12);
  for (int i = 0; i < 500; ++i) {
    const double s = r.uniform(1e-12, 1e-6), n = r.uniform(1e-12, 1e-9);
    const double i1 = r.uniform(0.0, 1e-7), i2 = i1 + r.uniform(0.0, 1e-7);
    EXPECT_GE(sinr_db_mw(s, i1, n, 1e9), sinr_db_mw(s, i2, n, 1e9));
  }
}

TEST(Radio, SpectralEfficiencyBounds) {
  const LinkRateParams p;
  EXPECT_EQ(spectral_efficiency(-10.01, p), 0.0);
  EXPECT_GT(spectral_efficiency(-10.0, p), 0.0);
  EXPECT_EQ(spectral_efficiency(kNegInf, p), 0.0);
  EXPECT_NEAR(spectral_efficiency(0.0, p), 0.6, 1e-12);
  EXPECT_EQ(spectral_efficiency(60.0, p), 4.4);
  EXPECT_NEAR(throughput_bps(0.0, 1e6, 0.5, p), 0.3e6, 1e-6);
  gen::Rng r(13);
  double prev = -1.0;
  for (double s = -15.0; s < 40.0; s += 0.1) {
    const double e = spectral_efficiency(s, p);
    EXPECT_GE(e, prev);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, p.eta_max);
    prev = e;
  }
}
