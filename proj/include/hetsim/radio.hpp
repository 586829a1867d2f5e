#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "hetsim/geometry.hpp"

namespace hetsim {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

inline double mw_to_dbm(double mw) { return mw > 0.0 ? 10.0 * std::log10(mw) : kNegInf; }

/// Median of three values.
inline double med3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

/// PL = fixed_offset + coeff * log10(d / reference), d floored at min_distance.
struct PathLossModel {
  double fixed_offset_db = 128.1;
  double distance_coeff_db = 37.6;
  double reference_km = 1.0;
  double min_distance_m = 1.0;
  bool wall_loss = true;
  double obstruction_loss_db = 0.0;  // per intermediate building
  int max_obstructions = 0;

  friend bool operator==(const PathLossModel&, const PathLossModel&) = default;
};

inline PathLossModel macro_path_loss() { return {128.1, 37.6, 1.0, 1.0, true, 0.0, 0}; }
inline PathLossModel pico_path_loss() { return {140.7, 36.7, 1.0, 1.0, true, 0.0, 0}; }
inline PathLossModel femto_path_loss() { return {127.0, 30.0, 1.0, 1.0, true, 10.0, 2}; }

/// Building context of one link end: which building (if any) and its wall loss.
struct IndoorRef {
  int building_id = -1;
  double wall_loss_db = 0.0;

  bool indoor() const { return building_id >= 0; }
};

inline double distance_loss_db(const PathLossModel& m, double d_m) {
  const double d_km = std::max(d_m, m.min_distance_m) / 1000.0;
  return m.fixed_offset_db + m.distance_coeff_db * std::log10(d_km / m.reference_km);
}

/// Walls crossed between the two ends: none within one building, otherwise one per indoor end.
inline double wall_loss_db(const PathLossModel& m, IndoorRef tx, IndoorRef rx) {
  if (!m.wall_loss) return 0.0;
  if (tx.indoor() && rx.indoor() && tx.building_id == rx.building_id) return 0.0;
  double loss = 0.0;
  if (tx.indoor()) loss += tx.wall_loss_db;
  if (rx.indoor()) loss += rx.wall_loss_db;
  return loss;
}

inline double path_loss_db(const PathLossModel& m, Point tx, Point rx, IndoorRef tx_in = {}, IndoorRef rx_in = {},
                           int obstructions = 0) {
  const int n = std::clamp(obstructions, 0, std::max(0, m.max_obstructions));
  return distance_loss_db(m, distance(tx, rx)) + wall_loss_db(m, tx_in, rx_in) + n * m.obstruction_loss_db;
}

inline double rss_dbm(double tx_power_dbm, double path_loss) { return tx_power_dbm - path_loss; }

inline double noise_floor_dbm(double bandwidth_hz, double noise_figure_db, double thermal_dbm_per_hz = -174.0) {
  return thermal_dbm_per_hz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

inline constexpr double kSinrCeilingDb = 30.0;

/// SINR from linear-domain powers, clamped to the measurement ceiling.
inline double sinr_db_mw(double serving_mw, double interference_mw, double noise_mw,
                         double ceiling_db = kSinrCeilingDb) {
  const double den = interference_mw + noise_mw;
  if (den <= 0.0) return ceiling_db;
  if (serving_mw <= 0.0) return kNegInf;
  return std::min(10.0 * std::log10(serving_mw / den), ceiling_db);
}

inline double sinr_db(double serving_dbm, std::span<const double> interferers_dbm, double noise_dbm,
                      double ceiling_db = kSinrCeilingDb) {
  double i_mw = 0.0;
  for (double i : interferers_dbm) i_mw += dbm_to_mw(i);
  return sinr_db_mw(dbm_to_mw(serving_dbm), i_mw, dbm_to_mw(noise_dbm), ceiling_db);
}

struct LinkRateParams {
  double attenuation = 0.6;
  double eta_max = 4.4;  // bit/s/Hz
  double sinr_min_db = -10.0;

  friend bool operator==(const LinkRateParams&, const LinkRateParams&) = default;
};

inline double spectral_efficiency(double sinr, const LinkRateParams& p = {}) {
  if (!(sinr >= p.sinr_min_db)) return 0.0;
  const double eta = p.attenuation * std::log2(1.0 + std::pow(10.0, sinr / 10.0));
  return std::min(p.eta_max, std::max(0.0, eta));
}

inline double throughput_bps(double sinr, double bandwidth_hz, double active_fraction, const LinkRateParams& p = {}) {
  return active_fraction * bandwidth_hz * spectral_efficiency(sinr, p);
}

}  // namespace hetsim
