#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hetsim/scenario.hpp"

namespace hetsim {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace json_detail {

using nlohmann::json;

template <class T>
void get_opt(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

inline json point_to_json(Point p) { return json::array({p.x, p.y}); }
inline Point point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("point must be a [x, y] array");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json model_to_json(const PathLossModel& m) {
  return {{"fixed_offset_db", m.fixed_offset_db},   {"distance_coeff_db", m.distance_coeff_db},
          {"reference_km", m.reference_km},         {"min_distance_m", m.min_distance_m},
          {"wall_loss", m.wall_loss},               {"obstruction_loss_db", m.obstruction_loss_db},
          {"max_obstructions", m.max_obstructions}};
}
inline void model_from_json(const json& j, PathLossModel& m) {
  get_opt(j, "fixed_offset_db", m.fixed_offset_db);
  get_opt(j, "distance_coeff_db", m.distance_coeff_db);
  get_opt(j, "reference_km", m.reference_km);
  get_opt(j, "min_distance_m", m.min_distance_m);
  get_opt(j, "wall_loss", m.wall_loss);
  get_opt(j, "obstruction_loss_db", m.obstruction_loss_db);
  get_opt(j, "max_obstructions", m.max_obstructions);
}

inline CellKind kind_from(const std::string& s) {
  if (s == "macro") return CellKind::Macro;
  if (s == "pico") return CellKind::Pico;
  if (s == "femto") return CellKind::Femto;
  throw ParseError("unknown cell kind '" + s + "'");
}

inline json pattern_to_json(const AbsfPattern& p) { return {{"period", p.period}, {"blanked", p.blanked}}; }

}  // namespace json_detail

inline nlohmann::json method_to_json(const EicicMethod& m) {
  using nlohmann::json;
  json j{{"method", method_name(m)}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TimeAbsf>) {
          j["pattern"] = json_detail::pattern_to_json(p.pattern);
        } else if constexpr (std::is_same_v<T, Power1>) {
          j["alpha"] = p.alpha;
          j["beta_db"] = p.beta_db;
        } else if constexpr (std::is_same_v<T, Power2>) {
          j["p_ofst_max_db"] = p.p_ofst_max_db;
          j["p_ofst_min_db"] = p.p_ofst_min_db;
        } else if constexpr (std::is_same_v<T, Power3>) {
          j["sinr_tar_hue_db"] = p.sinr_tar_hue_db;
        } else if constexpr (std::is_same_v<T, Power4>) {
          j["alpha"] = p.alpha;
          j["beta_db"] = p.beta_db ? json(*p.beta_db) : json(nullptr);
          j["sinr_tar_mue_db"] = p.sinr_tar_mue_db;
        }
      },
      m);
  return j;
}

inline EicicMethod method_from_json(const nlohmann::json& j) {
  using json_detail::get_opt;
  const std::string name = j.value("method", std::string("none"));
  if (name == "none") return NoEicic{};
  if (name == "time") {
    TimeAbsf t;
    if (j.contains("duty")) {
      t.pattern = absf_pattern(j.at("duty").get<std::string>());
    } else if (j.contains("pattern")) {
      t.pattern.period = j.at("pattern").at("period").get<int>();
      t.pattern.blanked = j.at("pattern").at("blanked").get<std::vector<int>>();
      std::sort(t.pattern.blanked.begin(), t.pattern.blanked.end());
    }
    return t;
  }
  if (name == "power1") {
    Power1 p;
    get_opt(j, "alpha", p.alpha);
    get_opt(j, "beta_db", p.beta_db);
    return p;
  }
  if (name == "power2") {
    Power2 p;
    get_opt(j, "p_ofst_max_db", p.p_ofst_max_db);
    get_opt(j, "p_ofst_min_db", p.p_ofst_min_db);
    return p;
  }
  if (name == "power3") {
    Power3 p;
    get_opt(j, "sinr_tar_hue_db", p.sinr_tar_hue_db);
    return p;
  }
  if (name == "power4") {
    Power4 p;
    get_opt(j, "alpha", p.alpha);
    if (auto it = j.find("beta_db"); it != j.end() && !it->is_null()) p.beta_db = it->get<double>();
    get_opt(j, "sinr_tar_mue_db", p.sinr_tar_mue_db);
    return p;
  }
  throw ParseError("unknown eICIC method '" + name + "'");
}

inline nlohmann::json to_json_value(const ScenarioConfig& s) {
  using nlohmann::json;
  using namespace json_detail;
  json buildings = json::array();
  for (const Building& b : s.buildings)
    buildings.push_back({{"id", b.id},
                         {"footprint", {b.footprint.x_min, b.footprint.y_min, b.footprint.x_max, b.footprint.y_max}},
                         {"wall_loss_db", b.wall_loss_db}});
  json cells = json::array();
  for (const CellSite& c : s.cells) {
    json jc{{"id", c.id},
            {"kind", to_string(c.kind)},
            {"position", point_to_json(c.position)},
            {"max_tx_power_dbm", c.max_tx_power_dbm},
            {"access", c.access == AccessMode::Csg ? "csg" : "open"},
            {"bandwidth_mhz", c.bandwidth_mhz}};
    if (c.access == AccessMode::Csg) jc["subscribers"] = c.subscribers;
    if (c.host_building) jc["host_building"] = *c.host_building;
    cells.push_back(std::move(jc));
  }
  json users = json::array();
  for (const UserSpec& u : s.users) {
    json route = json::array();
    for (Point p : u.route) route.push_back(point_to_json(p));
    users.push_back({{"id", u.id},
                     {"route", std::move(route)},
                     {"speed_mps", u.speed_mps},
                     {"service", u.service == Service::Voip ? "voip" : "full_buffer"},
                     {"csg_memberships", u.csg_memberships},
                     {"loop_route", u.loop_route}});
  }
  const RadioParams& r = s.radio;
  json radio{{"noise_figure_db", r.noise_figure_db},
             {"thermal_noise_dbm_per_hz", r.thermal_noise_dbm_per_hz},
             {"system_bandwidth_mhz", r.system_bandwidth_mhz},
             {"pathloss_models",
              {{"macro", model_to_json(r.macro_model)},
               {"pico", model_to_json(r.pico_model)},
               {"femto", model_to_json(r.femto_model)}}},
             {"min_femto_power_dbm", r.min_femto_power_dbm},
             {"cqi_report_period_ms", r.cqi_report_period_ms},
             {"outage_threshold_db", r.outage_threshold_db},
             {"outage_window_ms", r.outage_window_ms},
             {"trigger_threshold_db", r.trigger_threshold_db},
             {"sinr_ceiling_db", r.sinr_ceiling_db},
             {"link_rate",
              {{"attenuation", r.link_rate.attenuation},
               {"eta_max", r.link_rate.eta_max},
               {"sinr_min_db", r.link_rate.sinr_min_db}}},
             {"hue_path_loss_db", r.hue_path_loss_db},
             {"pm_includes_wall_loss", r.pm_includes_wall_loss},
             {"shadowing_sigma_db", r.shadowing_sigma_db}};
  const EicicConfig& e = s.eicic;
  json eicic{{"femto_method", method_to_json(e.femto_method)},
             {"macro_absf", {{"enabled", e.macro_absf.enabled}, {"duty", to_string(e.macro_absf.duty)}}},
             {"femto_backhaul_ms", e.femto_backhaul_ms},
             {"pico_backhaul_ms", e.pico_backhaul_ms},
             {"release_hysteresis_db", e.release_hysteresis_db},
             {"release_hold_ms", e.release_hold_ms},
             {"absf_residual_offset_db", e.absf_residual_offset_db ? json(*e.absf_residual_offset_db) : json(nullptr)},
             {"pl_estimation_sigma_db", e.pl_estimation_sigma_db},
             {"report_top_k", e.report_top_k}};
  const SimParams& p = s.sim;
  json sim{{"duration_s", p.duration_s},
           {"subframe_ms", p.subframe_ms},
           {"seed", p.seed},
           {"macro_bias_db", p.macro_bias_db},
           {"pico_bias_db", p.pico_bias_db},
           {"femto_bias_db", p.femto_bias_db},
           {"ho_hysteresis_db", p.ho_hysteresis_db},
           {"ho_time_to_trigger_ms", p.ho_time_to_trigger_ms},
           {"voip_interval_ms", p.voip_interval_ms},
           {"voip_bandwidth_mhz", p.voip_bandwidth_mhz},
           {"macro_background_activity", p.macro_background_activity},
           {"trace_decimation_ms", p.trace_decimation_ms},
           {"link_update_distance_m", p.link_update_distance_m},
           {"route_margin_m", p.route_margin_m}};
  return {{"area", {{"width_m", s.area_width_m}, {"height_m", s.area_height_m}}},
          {"buildings", std::move(buildings)},
          {"cells", std::move(cells)},
          {"users", std::move(users)},
          {"radio", std::move(radio)},
          {"eicic", std::move(eicic)},
          {"sim", std::move(sim)}};
}

/// Builds a config from a parsed document without validating it.
inline ScenarioConfig from_json_value(const nlohmann::json& j) {
  using namespace json_detail;
  if (!j.is_object()) throw ParseError("scenario document must be a JSON object");
  ScenarioConfig s;
  try {
    if (auto it = j.find("area"); it != j.end()) {
      get_opt(*it, "width_m", s.area_width_m);
      get_opt(*it, "height_m", s.area_height_m);
    }
    for (const json& jb : j.value("buildings", json::array())) {
      Building b;
      b.id = jb.at("id").get<int>();
      const auto fp = jb.at("footprint").get<std::vector<double>>();
      if (fp.size() != 4) throw ParseError("building footprint must be [x_min, y_min, x_max, y_max]");
      b.footprint = {fp[0], fp[1], fp[2], fp[3]};
      get_opt(jb, "wall_loss_db", b.wall_loss_db);
      s.buildings.push_back(b);
    }
    for (const json& jc : j.value("cells", json::array())) {
      CellSite c;
      c.id = jc.at("id").get<int>();
      c.kind = kind_from(jc.at("kind").get<std::string>());
      c.position = point_from_json(jc.at("position"));
      c.max_tx_power_dbm = c.kind == CellKind::Macro ? 46.0 : c.kind == CellKind::Pico ? 30.0 : 20.0;
      get_opt(jc, "max_tx_power_dbm", c.max_tx_power_dbm);
      const std::string access = jc.value("access", std::string("open"));
      if (access == "csg") c.access = AccessMode::Csg;
      else if (access != "open") throw ParseError("unknown access mode '" + access + "'");
      get_opt(jc, "subscribers", c.subscribers);
      get_opt(jc, "bandwidth_mhz", c.bandwidth_mhz);
      if (auto it = jc.find("host_building"); it != jc.end() && !it->is_null()) c.host_building = it->get<int>();
      s.cells.push_back(std::move(c));
    }
    for (const json& ju : j.value("users", json::array())) {
      UserSpec u;
      u.id = ju.at("id").get<int>();
      for (const json& p : ju.at("route")) u.route.push_back(point_from_json(p));
      get_opt(ju, "speed_mps", u.speed_mps);
      const std::string svc = ju.value("service", std::string("voip"));
      if (svc == "full_buffer") u.service = Service::FullBuffer;
      else if (svc != "voip") throw ParseError("unknown service '" + svc + "'");
      get_opt(ju, "csg_memberships", u.csg_memberships);
      get_opt(ju, "loop_route", u.loop_route);
      s.users.push_back(std::move(u));
    }
    if (auto it = j.find("radio"); it != j.end()) {
      const json& jr = *it;
      RadioParams& r = s.radio;
      get_opt(jr, "noise_figure_db", r.noise_figure_db);
      get_opt(jr, "thermal_noise_dbm_per_hz", r.thermal_noise_dbm_per_hz);
      get_opt(jr, "system_bandwidth_mhz", r.system_bandwidth_mhz);
      if (auto pm = jr.find("pathloss_models"); pm != jr.end()) {
        if (pm->contains("macro")) model_from_json(pm->at("macro"), r.macro_model);
        if (pm->contains("pico")) model_from_json(pm->at("pico"), r.pico_model);
        if (pm->contains("femto")) model_from_json(pm->at("femto"), r.femto_model);
      }
      get_opt(jr, "min_femto_power_dbm", r.min_femto_power_dbm);
      get_opt(jr, "cqi_report_period_ms", r.cqi_report_period_ms);
      get_opt(jr, "outage_threshold_db", r.outage_threshold_db);
      get_opt(jr, "outage_window_ms", r.outage_window_ms);
      get_opt(jr, "trigger_threshold_db", r.trigger_threshold_db);
      get_opt(jr, "sinr_ceiling_db", r.sinr_ceiling_db);
      if (auto lr = jr.find("link_rate"); lr != jr.end()) {
        get_opt(*lr, "attenuation", r.link_rate.attenuation);
        get_opt(*lr, "eta_max", r.link_rate.eta_max);
        get_opt(*lr, "sinr_min_db", r.link_rate.sinr_min_db);
      }
      get_opt(jr, "hue_path_loss_db", r.hue_path_loss_db);
      get_opt(jr, "pm_includes_wall_loss", r.pm_includes_wall_loss);
      get_opt(jr, "shadowing_sigma_db", r.shadowing_sigma_db);
    }
    if (auto it = j.find("eicic"); it != j.end()) {
      const json& je = *it;
      EicicConfig& e = s.eicic;
      if (je.contains("femto_method")) e.femto_method = method_from_json(je.at("femto_method"));
      if (auto ma = je.find("macro_absf"); ma != je.end()) {
        get_opt(*ma, "enabled", e.macro_absf.enabled);
        if (ma->contains("duty")) e.macro_absf.duty = parse_duty(ma->at("duty").get<std::string>());
      }
      get_opt(je, "femto_backhaul_ms", e.femto_backhaul_ms);
      get_opt(je, "pico_backhaul_ms", e.pico_backhaul_ms);
      get_opt(je, "release_hysteresis_db", e.release_hysteresis_db);
      get_opt(je, "release_hold_ms", e.release_hold_ms);
      if (auto r = je.find("absf_residual_offset_db"); r != je.end() && !r->is_null())
        e.absf_residual_offset_db = r->get<double>();
      get_opt(je, "pl_estimation_sigma_db", e.pl_estimation_sigma_db);
      get_opt(je, "report_top_k", e.report_top_k);
    }
    if (auto it = j.find("sim"); it != j.end()) {
      const json& jp = *it;
      SimParams& p = s.sim;
      get_opt(jp, "duration_s", p.duration_s);
      get_opt(jp, "subframe_ms", p.subframe_ms);
      get_opt(jp, "seed", p.seed);
      get_opt(jp, "macro_bias_db", p.macro_bias_db);
      get_opt(jp, "pico_bias_db", p.pico_bias_db);
      get_opt(jp, "femto_bias_db", p.femto_bias_db);
      get_opt(jp, "ho_hysteresis_db", p.ho_hysteresis_db);
      get_opt(jp, "ho_time_to_trigger_ms", p.ho_time_to_trigger_ms);
      get_opt(jp, "voip_interval_ms", p.voip_interval_ms);
      get_opt(jp, "voip_bandwidth_mhz", p.voip_bandwidth_mhz);
      get_opt(jp, "macro_background_activity", p.macro_background_activity);
      get_opt(jp, "trace_decimation_ms", p.trace_decimation_ms);
      get_opt(jp, "link_update_distance_m", p.link_update_distance_m);
      get_opt(jp, "route_margin_m", p.route_margin_m);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("scenario: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw ParseError(std::string("scenario: ") + ex.what());
  }
  return s;
}

/// Parses and validates a scenario document.
inline ScenarioConfig load_scenario(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ParseError(std::string("malformed scenario document: ") + ex.what());
  }
  ScenarioConfig s = from_json_value(j);
  validate(s);
  return s;
}

inline ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

inline std::string save_scenario(const ScenarioConfig& s) { return to_json_value(s).dump(2) + "\n"; }

}  // namespace hetsim
