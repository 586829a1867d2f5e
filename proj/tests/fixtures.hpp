#pragma once

#include "hetsim/scenario.hpp"

namespace fixture {

/// One macro far to the south-east, one CSG femto in a 10 m house and one
/// pedestrian walking along the house's southern wall, 0.5 m out.
inline hetsim::ScenarioConfig street_pass(double duration_s = 60.0) {
  using namespace hetsim;
  ScenarioConfig s;
  s.area_width_m = 200.0;
  s.area_height_m = 200.0;
  s.buildings.push_back({0, {100.0, 100.0, 110.0, 110.0}, 10.0});
  s.cells.push_back({0, CellKind::Macro, {400.0, -200.0}, 46.0, AccessMode::Open, {}, 20.0, std::nullopt});
  s.cells.push_back({1, CellKind::Femto, {105.0, 105.0}, 20.0, AccessMode::Csg, {}, 20.0, 0});
  UserSpec u;
  u.id = 0;
  u.route = {{80.0, 99.5}, {130.0, 99.5}};
  s.users.push_back(u);
  s.sim.duration_s = duration_s;
  return s;
}

/// street_pass plus a pico near the start of the route and a second user
/// that crosses the pico's biased boundary.
inline hetsim::ScenarioConfig with_pico(double duration_s = 60.0) {
  using namespace hetsim;
  ScenarioConfig s = street_pass(duration_s);
  s.cells.push_back({2, CellKind::Pico, {0.0, 200.0}, 30.0, AccessMode::Open, {}, 20.0, std::nullopt});
  UserSpec u;
  u.id = 1;
  u.route = {{0.0, 150.0}, {60.0, 150.0}};
  s.users.push_back(u);
  return s;
}

}  // namespace fixture
