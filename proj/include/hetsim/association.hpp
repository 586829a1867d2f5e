#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hetsim/geometry.hpp"
#include "hetsim/scenario.hpp"

namespace hetsim {

class AssociationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BiasMap {
  double macro_db = 0.0;
  double pico_db = 10.0;
  double femto_db = 0.0;

  double operator()(CellKind k) const {
    switch (k) {
      case CellKind::Macro: return macro_db;
      case CellKind::Pico: return pico_db;
      case CellKind::Femto: return femto_db;
    }
    return 0.0;
  }

  static BiasMap from(const SimParams& p) { return {p.macro_bias_db, p.pico_bias_db, p.femto_bias_db}; }
};

struct CellSelection {
  int cell_id = -1;
  bool expanded_region = false;
};

/// Selection from precomputed per-cell RSS (same order as `cells`).
inline CellSelection select_from_rss(const UserSpec& user, const std::vector<CellSite>& cells,
                                     std::span<const double> rss, const BiasMap& biases) {
  std::optional<std::size_t> best;
  double best_val = 0.0;
  double best_raw = kNegInf;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!may_access(user, cells[i])) continue;
    const double v = rss[i] + biases(cells[i].kind);
    if (!best || v > best_val || (v == best_val && cells[i].id < cells[*best].id)) {
      best = i;
      best_val = v;
    }
    best_raw = std::max(best_raw, rss[i]);
  }
  if (!best) throw AssociationError("no permitted cell for user " + std::to_string(user.id));
  return {cells[*best].id, rss[*best] < best_raw};
}

/// Env must provide `double rss_dbm(const CellSite&, Point) const` (RSS at maximum power).
template <class Env>
CellSelection select_cell(const UserSpec& user, Point position, const std::vector<CellSite>& cells,
                          const BiasMap& biases, const Env& env) {
  std::vector<double> rss(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) rss[i] = env.rss_dbm(cells[i], position);
  return select_from_rss(user, cells, rss, biases);
}

struct HandoverEvent {
  std::int64_t time_ms = 0;
  int user_id = -1;
  int from_cell = -1;
  int to_cell = -1;

  friend bool operator==(const HandoverEvent&, const HandoverEvent&) = default;
};

struct UserAssociation {
  int serving = -1;
  bool expanded_region = false;
  int pending = -1;  // candidate waiting out time-to-trigger
  std::int64_t pending_since_ms = 0;
};

struct HandoverParams {
  double hysteresis_db = 0.0;
  int time_to_trigger_ms = 0;
};

struct AssociationState {
  std::vector<UserAssociation> users;
  std::vector<HandoverEvent> handover_log;
  int macro_pico_handovers = 0;

  explicit AssociationState(std::size_t n_users = 0) : users(n_users) {}
};

inline bool is_macro_pico(CellKind a, CellKind b) {
  return (a == CellKind::Macro && b == CellKind::Pico) || (a == CellKind::Pico && b == CellKind::Macro);
}

/// Re-evaluates one user's serving cell from precomputed RSS. Returns true on handover.
inline bool update_association_from_rss(AssociationState& st, std::size_t slot, const UserSpec& user,
                                        const std::vector<CellSite>& cells, std::span<const double> rss,
                                        const BiasMap& biases, std::int64_t time_ms, const HandoverParams& ho = {}) {
  UserAssociation& ua = st.users.at(slot);
  const CellSelection sel = select_from_rss(user, cells, rss, biases);
  auto index_of = [&](int id) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (cells[i].id == id) return i;
    return std::nullopt;
  };
  if (ua.serving < 0) {
    ua.serving = sel.cell_id;
    ua.expanded_region = sel.expanded_region;
    ua.pending = -1;
    return false;
  }
  const auto cur = index_of(ua.serving);
  if (sel.cell_id == ua.serving) {
    ua.expanded_region = sel.expanded_region;
    ua.pending = -1;
    return false;
  }
  const auto nxt = index_of(sel.cell_id);
  bool go = !cur || !may_access(user, cells[*cur]);
  if (!go) {
    const double margin = (rss[*nxt] + biases(cells[*nxt].kind)) - (rss[*cur] + biases(cells[*cur].kind));
    if (margin > ho.hysteresis_db || (ho.hysteresis_db == 0.0 && margin >= 0.0)) {
      if (ua.pending != sel.cell_id) {
        ua.pending = sel.cell_id;
        ua.pending_since_ms = time_ms;
      }
      go = time_ms - ua.pending_since_ms >= ho.time_to_trigger_ms;
    } else {
      ua.pending = -1;
    }
  }
  if (!go) {
    // Keep serving; expanded flag relative to the current serving cell.
    double best_raw = kNegInf;
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (may_access(user, cells[i])) best_raw = std::max(best_raw, rss[i]);
    ua.expanded_region = cur && rss[*cur] < best_raw;
    return false;
  }
  st.handover_log.push_back({time_ms, user.id, ua.serving, sel.cell_id});
  if (cur && nxt && is_macro_pico(cells[*cur].kind, cells[*nxt].kind)) ++st.macro_pico_handovers;
  ua.serving = sel.cell_id;
  ua.expanded_region = sel.expanded_region;
  ua.pending = -1;
  return true;
}

template <class Env>
bool update_association(AssociationState& st, std::size_t slot, const UserSpec& user, Point position,
                        const std::vector<CellSite>& cells, const BiasMap& biases, const Env& env,
                        std::int64_t time_ms, const HandoverParams& ho = {}) {
  std::vector<double> rss(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) rss[i] = env.rss_dbm(cells[i], position);
  return update_association_from_rss(st, slot, user, cells, rss, biases, time_ms, ho);
}

}  // namespace hetsim
