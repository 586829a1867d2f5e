#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "hetsim/environment.hpp"
#include "hetsim/random.hpp"
#include "hetsim/scenario.hpp"

namespace hetsim {

struct GeneratorOptions {
  int grid = 20;  // houses per side
  double pitch_m = 15.0;
  double house_m = 10.0;
  double wall_loss_db = 10.0;
  int femto_count = 63;
  double femto_power_dbm = 20.0;
  double macro_east_m = 200.0;
  double macro_south_m = 200.0;
  double pico_bias_db = 10.0;
  // A house may host a femto only if pico RSS + bias stays this far below the macro there.
  double femto_exclusion_db = 8.0;

  int user_count = 8;
  int pico_crossings = 5;
  double speed_mps = 1.1;
  double duration_s = 600.0;
  double route_fill = 0.95;  // route length as a fraction of speed * duration
  double facade_offset_m = 0.5;
  double sample_step_m = 0.5;

  // Street classification, nominal powers.
  double clean_sinr_db = -1.0;       // below this a sample needs a single culprit femto
  double victim_rest_sinr_db = 3.0;  // SINR with the culprit removed
  double victim_depth_db = -5.0;     // a victim edge must dip below this
  double pue_sinr_db = 3.0;          // picocell user SINR with the macro blanked
  double victim_weight = 6.0;
  int min_victim_femtos = 5;
  double proximity_m = 5.0;
  double pico_dwell_m = 90.0;
  int max_attempts = 400;
};

namespace gen_detail {

enum class EdgeClass { Clean, Victim, Pico, Crossing, Avoid };

struct StreetEdge {
  int u = 0;
  int v = 0;
  EdgeClass cls = EdgeClass::Avoid;
  int femto_cell = -1;
  std::vector<Point> path;  // u -> v, both ends included
  double length = 0.0;
};

struct Sample {
  bool pico_served = false;
  double sinr_all = 0.0;
  int dominant_femto = -1;  // cell index
  double sinr_without_dominant = 0.0;
  double pue_protected = 0.0;
};

class Sampler {
 public:
  Sampler(const ScenarioConfig& cfg, const RadioEnvironment& env, double bias)
      : cfg_(cfg), env_(env), bias_(bias), mw_(cfg.cells.size()) {}

  bool pico_served(Point p) const {
    double m = kNegInf, pc = kNegInf;
    for (std::size_t i = 0; i < cfg_.cells.size(); ++i) {
      const CellSite& c = cfg_.cells[i];
      if (c.kind == CellKind::Femto) continue;
      const double r = c.max_tx_power_dbm - env_.path_loss(i, p, {});
      if (c.kind == CellKind::Macro) m = std::max(m, r);
      else pc = std::max(pc, r + bias_);
    }
    return pc > m;
  }

  Sample at(Point p) {
    Sample s;
    const IndoorRef in = env_.indoor_ref(p);
    std::optional<std::size_t> serving;
    double best = kNegInf;
    double femto_mw = 0.0;
    double dom_mw = 0.0;
    for (std::size_t i = 0; i < cfg_.cells.size(); ++i) {
      const CellSite& c = cfg_.cells[i];
      const double r = c.max_tx_power_dbm - env_.path_loss(i, p, in);
      mw_[i] = dbm_to_mw(r);
      if (c.kind == CellKind::Femto) {
        femto_mw += mw_[i];
        if (mw_[i] > dom_mw) {
          dom_mw = mw_[i];
          s.dominant_femto = static_cast<int>(i);
        }
        continue;
      }
      const double v = r + (c.kind == CellKind::Pico ? bias_ : 0.0);
      if (!serving || v > best) {
        serving = i;
        best = v;
      }
    }
    const double noise = dbm_to_mw(env_.noise_dbm());
    double total = 0.0;
    for (double v : mw_) total += v;
    const double sig = mw_[*serving];
    s.pico_served = cfg_.cells[*serving].kind == CellKind::Pico;
    s.sinr_all = sinr_db_mw(sig, total - sig, noise);
    s.sinr_without_dominant = sinr_db_mw(sig, total - sig - dom_mw, noise);
    s.pue_protected = s.pico_served ? sinr_db_mw(sig, femto_mw, noise) : kNegInf;
    return s;
  }

 private:
  const ScenarioConfig& cfg_;
  const RadioEnvironment& env_;
  double bias_;
  std::vector<double> mw_;
};

inline std::vector<Point> resample(const std::vector<Point>& path, double step) {
  std::vector<Point> out;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double len = distance(path[k - 1], path[k]);
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 0; i < n; ++i) {
      const double f = static_cast<double>(i) / n;
      out.push_back({path[k - 1].x + f * (path[k].x - path[k - 1].x), path[k - 1].y + f * (path[k].y - path[k - 1].y)});
    }
  }
  out.push_back(path.back());
  return out;
}

inline double path_length(const std::vector<Point>& p) {
  double l = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) l += distance(p[i - 1], p[i]);
  return l;
}

struct StreetGraph {
  int side = 21;  // nodes per side
  std::vector<StreetEdge> edges;
  std::vector<std::vector<int>> adj;
  std::vector<bool> node_pico;

  Point node_pos(int n, double pitch) const { return {(n / side) * pitch, (n % side) * pitch}; }
  int other(int e, int n) const { return edges[e].u == n ? edges[e].v : edges[e].u; }
};

/// Builds and classifies the street graph. `femto_at_house[h]` is the femto cell index or -1.
inline StreetGraph build_graph(const GeneratorOptions& o, const std::vector<int>& femto_at_house, Sampler& sampler) {
  StreetGraph g;
  g.side = o.grid + 1;
  const int side = g.side;
  g.adj.assign(static_cast<std::size_t>(side * side), {});
  g.node_pico.assign(static_cast<std::size_t>(side * side), false);
  for (int n = 0; n < side * side; ++n) g.node_pico[n] = sampler.pico_served(g.node_pos(n, o.pitch_m));

  const double half_gap = (o.pitch_m - o.house_m) / 2.0;
  const double hug = half_gap - o.facade_offset_m;  // lateral offset of the facade path from the centre line
  auto house = [&](int i, int j) -> int {
    if (i < 0 || j < 0 || i >= o.grid || j >= o.grid) return -1;
    return femto_at_house[static_cast<std::size_t>(i * o.grid + j)];
  };

  for (int a = 0; a < side; ++a) {
    for (int b = 0; b < side; ++b) {
      for (int dir = 0; dir < 2; ++dir) {
        const int a2 = a + (dir == 0 ? 1 : 0);
        const int b2 = b + (dir == 1 ? 1 : 0);
        if (a2 >= side || b2 >= side) continue;
        StreetEdge e;
        e.u = a * side + b;
        e.v = a2 * side + b2;
        const Point p0{a * o.pitch_m, b * o.pitch_m};
        const Point p1{a2 * o.pitch_m, b2 * o.pitch_m};
        // Bordering houses: (left/below, right/above) of the street segment.
        const int h_neg = dir == 0 ? house(a, b - 1) : house(a - 1, b);
        const int h_pos = dir == 0 ? house(a, b) : house(a, b);
        if (h_neg >= 0 && h_pos >= 0) {
          e.cls = EdgeClass::Avoid;
          e.path = {p0, p1};
          e.length = path_length(e.path);
          g.edges.push_back(std::move(e));
          continue;
        }
        if (h_neg >= 0 || h_pos >= 0) {
          const double sgn = h_pos >= 0 ? 1.0 : -1.0;
          if (dir == 0)
            e.path = {p0, {p0.x + half_gap, p0.y + sgn * hug}, {p1.x - half_gap, p1.y + sgn * hug}, p1};
          else
            e.path = {p0, {p0.x + sgn * hug, p0.y + half_gap}, {p1.x + sgn * hug, p1.y - half_gap}, p1};
        } else {
          e.path = {p0, p1};
        }
        e.length = path_length(e.path);

        const std::vector<Point> pts = resample(e.path, o.sample_step_m);
        std::vector<Sample> ss;
        ss.reserve(pts.size());
        int pico = 0;
        for (Point p : pts) {
          ss.push_back(sampler.at(p));
          pico += ss.back().pico_served ? 1 : 0;
        }
        bool ok = true;
        if (pico == static_cast<int>(ss.size())) {
          for (const Sample& s : ss) ok = ok && s.pue_protected >= o.pue_sinr_db;
          e.cls = ok ? EdgeClass::Pico : EdgeClass::Avoid;
        } else if (pico > 0) {
          int changes = 0;
          for (std::size_t i = 1; i < ss.size(); ++i) changes += ss[i].pico_served != ss[i - 1].pico_served ? 1 : 0;
          for (const Sample& s : ss)
            ok = ok && (s.pico_served ? s.pue_protected >= o.pue_sinr_db : s.sinr_all >= o.clean_sinr_db);
          e.cls = ok && changes == 1 ? EdgeClass::Crossing : EdgeClass::Avoid;
        } else {
          std::set<int> culprits;
          double worst = std::numeric_limits<double>::infinity();
          for (const Sample& s : ss) {
            worst = std::min(worst, s.sinr_all);
            if (s.sinr_all >= o.clean_sinr_db) continue;
            culprits.insert(s.dominant_femto);
            ok = ok && s.sinr_without_dominant >= o.victim_rest_sinr_db;
          }
          if (!ok || culprits.size() > 1) {
            e.cls = EdgeClass::Avoid;
          } else if (culprits.empty()) {
            e.cls = EdgeClass::Clean;
          } else if (worst < o.victim_depth_db) {
            e.cls = EdgeClass::Victim;
            e.femto_cell = *culprits.begin();
          } else {
            e.cls = EdgeClass::Avoid;
          }
        }
        g.edges.push_back(std::move(e));
      }
    }
  }
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (g.edges[i].cls == EdgeClass::Avoid) continue;
    g.adj[g.edges[i].u].push_back(static_cast<int>(i));
    g.adj[g.edges[i].v].push_back(static_cast<int>(i));
  }
  return g;
}

struct Walk {
  std::vector<Point> pts;
  std::vector<int> edges;
  double length = 0.0;
  int node = 0;
  int last_edge = -1;
};

inline void traverse(const StreetGraph& g, Walk& w, int e) {
  const StreetEdge& se = g.edges[e];
  std::vector<Point> p = se.path;
  if (se.u != w.node) std::reverse(p.begin(), p.end());
  w.pts.insert(w.pts.end(), p.begin() + 1, p.end());
  w.length += se.length;
  w.edges.push_back(e);
  w.node = g.other(e, w.node);
  w.last_edge = e;
}

inline bool allowed(EdgeClass c, bool macro_side) {
  return macro_side ? (c == EdgeClass::Clean || c == EdgeClass::Victim) : c == EdgeClass::Pico;
}

/// Random walk on one side of the pico boundary until `limit` metres.
inline void wander(const StreetGraph& g, Walk& w, double limit, bool macro_side, const GeneratorOptions& o,
                   std::mt19937_64& rng) {
  std::deque<int> recent;  // recently passed victim femtos
  while (true) {
    std::vector<int> cand;
    std::vector<double> weight;
    for (int e : g.adj[w.node]) {
      if (!allowed(g.edges[e].cls, macro_side)) continue;
      if (w.length + g.edges[e].length > limit) continue;
      cand.push_back(e);
      double wt = 1.0;
      if (g.edges[e].cls == EdgeClass::Victim &&
          std::find(recent.begin(), recent.end(), g.edges[e].femto_cell) == recent.end())
        wt = o.victim_weight;
      if (e == w.last_edge) wt *= 0.05;
      weight.push_back(wt);
    }
    if (cand.empty()) return;
    double total = 0.0;
    for (double x : weight) total += x;
    double r = uniform01(rng) * total;
    std::size_t k = 0;
    while (k + 1 < cand.size() && r >= weight[k]) r -= weight[k++];
    const int e = cand[k];
    if (g.edges[e].cls == EdgeClass::Victim) {
      recent.push_back(g.edges[e].femto_cell);
      if (recent.size() > 3) recent.pop_front();
    }
    traverse(g, w, e);
  }
}

/// Shortest path (edge count, BFS) on one side to any node satisfying `goal`.
template <class Goal>
std::optional<std::vector<int>> bfs(const StreetGraph& g, int from, bool macro_side, Goal goal) {
  std::vector<int> prev_edge(g.adj.size(), -2);
  std::deque<int> q{from};
  prev_edge[from] = -1;
  while (!q.empty()) {
    const int n = q.front();
    q.pop_front();
    if (goal(n)) {
      std::vector<int> path;
      for (int cur = n; prev_edge[cur] >= 0; cur = g.other(prev_edge[cur], cur)) path.push_back(prev_edge[cur]);
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (int e : g.adj[n]) {
      if (!allowed(g.edges[e].cls, macro_side)) continue;
      const int m = g.other(e, n);
      if (prev_edge[m] != -2) continue;
      prev_edge[m] = e;
      q.push_back(m);
    }
  }
  return std::nullopt;
}

/// Crossing edge incident to `n`, lowest index first.
inline int crossing_at(const StreetGraph& g, int n) {
  for (int e : g.adj[n])
    if (g.edges[e].cls == EdgeClass::Crossing) return e;
  return -1;
}

}  // namespace gen_detail

/// Synthetic residential scenario: a house grid with CSG femtos, one macro
/// south-east of the area, one range-expanded pico and pedestrian VoIP users.
inline ScenarioConfig generate_default_scenario(std::uint64_t seed, const GeneratorOptions& o = {}) {
  using namespace gen_detail;
  ScenarioConfig cfg;
  const double extent = o.grid * o.pitch_m;
  cfg.area_width_m = extent;
  cfg.area_height_m = extent;
  cfg.sim.seed = seed;
  cfg.sim.duration_s = o.duration_s;
  cfg.sim.pico_bias_db = o.pico_bias_db;

  const double gap = (o.pitch_m - o.house_m) / 2.0;
  for (int i = 0; i < o.grid; ++i)
    for (int j = 0; j < o.grid; ++j)
      cfg.buildings.push_back({i * o.grid + j,
                               {i * o.pitch_m + gap, j * o.pitch_m + gap, i * o.pitch_m + gap + o.house_m,
                                j * o.pitch_m + gap + o.house_m},
                               o.wall_loss_db});

  const Point center{extent / 2.0, extent / 2.0};
  const Point macro_pos{center.x + o.macro_east_m, center.y - o.macro_south_m};
  // Farthest point of the area boundary from the macro is one of the corners.
  Point pico_pos{0.0, 0.0};
  for (Point c : {Point{0, 0}, Point{extent, 0}, Point{0, extent}, Point{extent, extent}})
    if (distance(c, macro_pos) > distance(pico_pos, macro_pos)) pico_pos = c;
  cfg.cells.push_back({0, CellKind::Macro, macro_pos, 46.0, AccessMode::Open, {}, 20.0, std::nullopt});
  cfg.cells.push_back({1, CellKind::Pico, pico_pos, 30.0, AccessMode::Open, {}, 20.0, std::nullopt});

  std::mt19937_64 rng(seed);

  // Femto hosts, drawn from houses well outside the pico's biased footprint.
  std::vector<int> eligible;
  {
    const PathLossModel mm = cfg.radio.macro_model;
    const PathLossModel pm = cfg.radio.pico_model;
    for (const Building& b : cfg.buildings) {
      const Point c = b.footprint.center();
      const double m = 46.0 - distance_loss_db(mm, distance(c, macro_pos));
      const double p = 30.0 - distance_loss_db(pm, distance(c, pico_pos)) + o.pico_bias_db;
      if (p + o.femto_exclusion_db < m) eligible.push_back(b.id);
    }
  }
  if (static_cast<int>(eligible.size()) < o.femto_count)
    throw std::runtime_error("generator: not enough eligible houses for femtos");
  for (std::size_t i = eligible.size() - 1; i > 0; --i)
    std::swap(eligible[i], eligible[uniform_index(rng, i + 1)]);
  std::vector<int> hosts(eligible.begin(), eligible.begin() + o.femto_count);
  std::sort(hosts.begin(), hosts.end());
  std::vector<int> femto_at_house(cfg.buildings.size(), -1);
  for (int h : hosts) {
    const int id = static_cast<int>(cfg.cells.size());
    femto_at_house[h] = id;
    cfg.cells.push_back({id, CellKind::Femto, cfg.buildings[h].footprint.center(), o.femto_power_dbm, AccessMode::Csg,
                         {}, 20.0, h});
  }

  const RadioEnvironment env(cfg);
  Sampler sampler(cfg, env, o.pico_bias_db);
  const StreetGraph g = build_graph(o, femto_at_house, sampler);

  // Crossing plan: pico users take two crossings each (in and out), the last one may end inside.
  std::vector<int> plan(o.user_count, 0);
  {
    int left = o.pico_crossings;
    for (int u = o.user_count - 1; u > 0 && left > 0; --u) {
      plan[u] = std::min(2, left);
      left -= plan[u];
    }
    if (left > 0) throw std::runtime_error("generator: too many pico crossings for the user count");
  }

  const double budget = o.route_fill * o.speed_mps * o.duration_s;
  std::vector<int> macro_nodes;
  for (int n = 0; n < static_cast<int>(g.adj.size()); ++n) {
    if (g.node_pico[n]) continue;
    bool usable = false;
    for (int e : g.adj[n]) usable = usable || allowed(g.edges[e].cls, true);
    if (usable) macro_nodes.push_back(n);
  }
  if (macro_nodes.empty()) throw std::runtime_error("generator: no usable streets");

  auto count_crossings = [&](const std::vector<Point>& pts) {
    const std::vector<Point> dense = resample(pts, 0.1);
    int changes = 0;
    bool prev = sampler.pico_served(dense.front());
    for (std::size_t i = 1; i < dense.size(); ++i) {
      const bool cur = sampler.pico_served(dense[i]);
      changes += cur != prev ? 1 : 0;
      prev = cur;
    }
    return changes;
  };
  auto near_femto_houses = [&](const std::vector<Point>& pts) {
    std::set<int> seen;
    for (Point p : resample(pts, 0.5))
      for (int h : hosts)
        if (distance(p, cfg.buildings[h].footprint) <= o.proximity_m) seen.insert(h);
    return seen.size();
  };

  for (int u = 0; u < o.user_count; ++u) {
    bool done = false;
    for (int attempt = 0; attempt < o.max_attempts && !done; ++attempt) {
      Walk w;
      w.node = macro_nodes[uniform_index(rng, macro_nodes.size())];
      w.pts.push_back(g.node_pos(w.node, o.pitch_m));
      bool ok = true;
      auto cross_from = [&](bool macro_side, double limit) {
        auto path = bfs(g, w.node, macro_side, [&](int n) { return crossing_at(g, n) >= 0; });
        if (!path) return false;
        for (int e : *path) traverse(g, w, e);
        traverse(g, w, crossing_at(g, w.node));
        return w.length <= limit;
      };
      if (plan[u] == 0) {
        wander(g, w, budget, true, o, rng);
      } else {
        wander(g, w, budget * (plan[u] == 2 ? 0.35 : 0.5), true, o, rng);
        ok = cross_from(true, budget);
        if (ok && plan[u] == 2) {
          wander(g, w, std::min(budget, w.length + o.pico_dwell_m), false, o, rng);
          ok = cross_from(false, budget);
          if (ok) wander(g, w, budget, true, o, rng);
        } else if (ok) {
          wander(g, w, budget, false, o, rng);
        }
      }
      if (!ok || w.length > budget) continue;
      std::set<int> victims;
      for (int e : w.edges)
        if (g.edges[e].cls == EdgeClass::Victim) victims.insert(g.edges[e].femto_cell);
      if (static_cast<int>(victims.size()) < o.min_victim_femtos) continue;
      if (static_cast<int>(near_femto_houses(w.pts)) < o.min_victim_femtos) continue;
      if (count_crossings(w.pts) != plan[u]) continue;
      UserSpec us;
      us.id = u;
      us.route = std::move(w.pts);
      us.speed_mps = o.speed_mps;
      cfg.users.push_back(std::move(us));
      done = true;
    }
    if (!done) throw std::runtime_error("generator: could not build a route for user " + std::to_string(u));
  }
  return cfg;
}

}  // namespace hetsim
