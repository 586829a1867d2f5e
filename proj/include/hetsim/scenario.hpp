#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetsim/eicic.hpp"
#include "hetsim/geometry.hpp"
#include "hetsim/radio.hpp"

namespace hetsim {

enum class CellKind { Macro, Pico, Femto };
enum class AccessMode { Open, Csg };
enum class Service { Voip, FullBuffer };

inline const char* to_string(CellKind k) {
  switch (k) {
    case CellKind::Macro: return "macro";
    case CellKind::Pico: return "pico";
    case CellKind::Femto: return "femto";
  }
  return "?";
}

struct Building {
  int id = 0;
  Rect footprint;
  double wall_loss_db = 10.0;

  friend bool operator==(const Building&, const Building&) = default;
};

struct CellSite {
  int id = 0;
  CellKind kind = CellKind::Macro;
  Point position;
  double max_tx_power_dbm = 46.0;
  AccessMode access = AccessMode::Open;
  std::vector<int> subscribers;  // user ids, Csg only
  double bandwidth_mhz = 20.0;
  std::optional<int> host_building;

  friend bool operator==(const CellSite&, const CellSite&) = default;
};

struct UserSpec {
  int id = 0;
  std::vector<Point> route;
  double speed_mps = 1.1;
  Service service = Service::Voip;
  std::vector<int> csg_memberships;  // cell ids
  bool loop_route = false;

  friend bool operator==(const UserSpec&, const UserSpec&) = default;
};

struct RadioParams {
  double noise_figure_db = 9.0;
  double thermal_noise_dbm_per_hz = -174.0;
  double system_bandwidth_mhz = 20.0;
  PathLossModel macro_model = macro_path_loss();
  PathLossModel pico_model = pico_path_loss();
  PathLossModel femto_model = femto_path_loss();
  double min_femto_power_dbm = -10.0;
  int cqi_report_period_ms = 10;
  double outage_threshold_db = -4.0;
  int outage_window_ms = 200;
  double trigger_threshold_db = -3.0;
  double sinr_ceiling_db = kSinrCeilingDb;
  LinkRateParams link_rate;
  double hue_path_loss_db = 77.0;     // femto -> its own indoor user
  bool pm_includes_wall_loss = false;  // macro RSS at the femto measured indoors
  double shadowing_sigma_db = 0.0;

  const PathLossModel& model(CellKind k) const {
    switch (k) {
      case CellKind::Macro: return macro_model;
      case CellKind::Pico: return pico_model;
      case CellKind::Femto: return femto_model;
    }
    return macro_model;
  }

  friend bool operator==(const RadioParams&, const RadioParams&) = default;
};

struct MacroAbsfConfig {
  bool enabled = true;
  AbsfDuty duty = AbsfDuty::OneEighth;

  friend bool operator==(const MacroAbsfConfig&, const MacroAbsfConfig&) = default;
};

struct EicicConfig {
  EicicMethod femto_method = NoEicic{};
  MacroAbsfConfig macro_absf;
  int femto_backhaul_ms = 50;
  int pico_backhaul_ms = 10;
  double release_hysteresis_db = 3.0;
  int release_hold_ms = 500;
  std::optional<double> absf_residual_offset_db;  // blanked cell leaks tx power minus this; unset = silent
  double pl_estimation_sigma_db = 0.0;
  int report_top_k = 4;

  friend bool operator==(const EicicConfig&, const EicicConfig&) = default;
};

struct SimParams {
  double duration_s = 600.0;
  int subframe_ms = 1;
  std::uint64_t seed = 42;
  double macro_bias_db = 0.0;
  double pico_bias_db = 10.0;
  double femto_bias_db = 0.0;
  double ho_hysteresis_db = 0.0;
  int ho_time_to_trigger_ms = 0;
  int voip_interval_ms = 20;
  double voip_bandwidth_mhz = 1.44;
  double macro_background_activity = 1.0;
  int trace_decimation_ms = 10;
  double link_update_distance_m = 0.05;
  double route_margin_m = 500.0;  // waypoints may lie this far outside the area

  double bias(CellKind k) const {
    switch (k) {
      case CellKind::Macro: return macro_bias_db;
      case CellKind::Pico: return pico_bias_db;
      case CellKind::Femto: return femto_bias_db;
    }
    return 0.0;
  }

  friend bool operator==(const SimParams&, const SimParams&) = default;
};

struct ScenarioConfig {
  double area_width_m = 300.0;
  double area_height_m = 300.0;
  std::vector<Building> buildings;
  std::vector<CellSite> cells;
  std::vector<UserSpec> users;
  RadioParams radio;
  EicicConfig eicic;
  SimParams sim;

  Rect area() const { return {0.0, 0.0, area_width_m, area_height_m}; }
  const CellSite* cell(int id) const {
    for (const CellSite& c : cells)
      if (c.id == id) return &c;
    return nullptr;
  }
  const Building* building(int id) const {
    for (const Building& b : buildings)
      if (b.id == id) return &b;
    return nullptr;
  }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lowest id among buildings whose footprint contains p (boundary inclusive).
inline std::optional<int> is_indoor(Point p, const std::vector<Building>& buildings) {
  std::optional<int> best;
  for (const Building& b : buildings)
    if (b.footprint.contains(p) && (!best || b.id < *best)) best = b.id;
  return best;
}

inline bool may_access(const UserSpec& u, const CellSite& c) {
  if (c.access == AccessMode::Open) return true;
  return std::find(c.subscribers.begin(), c.subscribers.end(), u.id) != c.subscribers.end() ||
         std::find(u.csg_memberships.begin(), u.csg_memberships.end(), c.id) != u.csg_memberships.end();
}

namespace detail {
inline bool finite(double v) { return std::isfinite(v); }
inline bool finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }
}  // namespace detail

/// Throws ValidationError naming the first violated invariant.
inline void validate(const ScenarioConfig& s) {
  auto fail = [](const std::string& m) { throw ValidationError(m); };
  if (!(s.area_width_m > 0.0) || !(s.area_height_m > 0.0)) fail("area: width and height must be positive");
  if (s.sim.subframe_ms != 1) fail("sim: subframe_ms must be 1");
  if (!(s.sim.duration_s >= 0.0) || !detail::finite(s.sim.duration_s)) fail("sim: duration_s must be >= 0");

  std::set<int> ids;
  for (const Building& b : s.buildings) {
    const std::string tag = "building " + std::to_string(b.id);
    if (!ids.insert(b.id).second) fail(tag + ": duplicate id");
    if (!(b.footprint.width() > 0.0) || !(b.footprint.height() > 0.0)) fail(tag + ": footprint must have positive size");
    if (!(b.wall_loss_db >= 0.0)) fail(tag + ": wall_loss_db must be >= 0");
  }

  ids.clear();
  if (s.cells.empty()) fail("cells: at least one cell is required");
  for (const CellSite& c : s.cells) {
    const std::string tag = "cell " + std::to_string(c.id);
    if (!ids.insert(c.id).second) fail(tag + ": duplicate id");
    if (!detail::finite(c.position)) fail(tag + ": position must be finite");
    if (!detail::finite(c.max_tx_power_dbm)) fail(tag + ": max_tx_power_dbm must be finite");
    if (!(c.bandwidth_mhz > 0.0)) fail(tag + ": bandwidth_mhz must be positive");
    if (c.access == AccessMode::Csg && c.kind != CellKind::Femto) fail(tag + ": CSG on non-femto");
    if (c.host_building) {
      if (c.kind != CellKind::Femto) fail(tag + ": host_building on non-femto");
      const Building* b = s.building(*c.host_building);
      if (!b) fail(tag + ": unknown host_building " + std::to_string(*c.host_building));
      if (!b->footprint.contains(c.position)) fail(tag + ": position outside host_building");
    }
    if (c.kind == CellKind::Femto && s.radio.min_femto_power_dbm > c.max_tx_power_dbm)
      fail(tag + ": max_tx_power_dbm below min_femto_power_dbm");
  }

  const Rect box{-s.sim.route_margin_m, -s.sim.route_margin_m, s.area_width_m + s.sim.route_margin_m,
                 s.area_height_m + s.sim.route_margin_m};
  std::set<int> uids;
  for (const UserSpec& u : s.users) {
    const std::string tag = "user " + std::to_string(u.id);
    if (!uids.insert(u.id).second) fail(tag + ": duplicate id");
    if (!(u.speed_mps > 0.0) || !detail::finite(u.speed_mps)) fail(tag + ": speed_mps must be positive");
    if (u.route.empty()) fail(tag + ": route must have at least one waypoint");
    for (Point p : u.route)
      if (!detail::finite(p) || !box.contains(p)) fail(tag + ": waypoint outside the route bounding box");
    for (int cid : u.csg_memberships)
      if (!s.cell(cid)) fail(tag + ": membership in unknown cell " + std::to_string(cid));
  }

  const RadioParams& r = s.radio;
  if (!(r.outage_threshold_db < r.trigger_threshold_db))
    fail("radio: outage_threshold_db must be below trigger_threshold_db");
  if (r.cqi_report_period_ms <= 0) fail("radio: cqi_report_period_ms must be positive");
  if (r.outage_window_ms <= 0) fail("radio: outage_window_ms must be positive");
  if (!(r.system_bandwidth_mhz > 0.0)) fail("radio: system_bandwidth_mhz must be positive");
  for (CellKind k : {CellKind::Macro, CellKind::Pico, CellKind::Femto}) {
    const PathLossModel& m = r.model(k);
    const std::string tag = std::string("radio: ") + to_string(k) + " path loss";
    if (!(m.distance_coeff_db > 0.0)) fail(tag + " coefficient must be positive");
    if (!(m.reference_km > 0.0) || !(m.min_distance_m > 0.0)) fail(tag + " distances must be positive");
    if (!(m.obstruction_loss_db >= 0.0) || m.max_obstructions < 0) fail(tag + " obstruction must be >= 0");
  }
  if (!(r.shadowing_sigma_db >= 0.0)) fail("radio: shadowing_sigma_db must be >= 0");

  const EicicConfig& e = s.eicic;
  try {
    validate_method(e.femto_method);
  } catch (const std::invalid_argument& ex) {
    fail(std::string("eicic: ") + ex.what());
  }
  if (e.femto_backhaul_ms < 0 || e.pico_backhaul_ms < 0) fail("eicic: backhaul delays must be >= 0");
  if (e.release_hold_ms <= 0) fail("eicic: release_hold_ms must be positive");
  if (e.report_top_k <= 0) fail("eicic: report_top_k must be positive");
  if (!(e.pl_estimation_sigma_db >= 0.0)) fail("eicic: pl_estimation_sigma_db must be >= 0");

  const SimParams& sp = s.sim;
  if (sp.voip_interval_ms <= 0) fail("sim: voip_interval_ms must be positive");
  if (!(sp.voip_bandwidth_mhz > 0.0)) fail("sim: voip_bandwidth_mhz must be positive");
  if (!(sp.macro_background_activity >= 0.0 && sp.macro_background_activity <= 1.0))
    fail("sim: macro_background_activity must be in [0, 1]");
  if (sp.trace_decimation_ms <= 0) fail("sim: trace_decimation_ms must be positive");
  if (!(sp.ho_hysteresis_db >= 0.0) || sp.ho_time_to_trigger_ms < 0) fail("sim: handover hysteresis/ttt must be >= 0");
}

}  // namespace hetsim
