#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "hetsim/association.hpp"
#include "hetsim/eicic.hpp"
#include "hetsim/environment.hpp"
#include "hetsim/metrics.hpp"
#include "hetsim/random.hpp"
#include "hetsim/scenario.hpp"

namespace hetsim {

/// Counts entries into outage: SINR below threshold for `window` consecutive subframes.
class OutageDetector {
 public:
  OutageDetector() = default;
  OutageDetector(double threshold_db, int window_ms) : threshold_(threshold_db), window_(window_ms) {}

  /// Returns true on the subframe an outage begins.
  bool update(double sinr_db) {
    if (sinr_db < threshold_) {
      ++below_;
      if (!active_ && below_ >= window_) {
        active_ = true;
        ++count_;
        return true;
      }
    } else {
      below_ = 0;
      active_ = false;
    }
    return false;
  }

  bool outage_active() const { return active_; }
  int outage_count() const { return count_; }

 private:
  double threshold_ = -4.0;
  int window_ = 200;
  int below_ = 0;
  bool active_ = false;
  int count_ = 0;
};

/// Per-tier method choice for one run.
struct MethodAssignment {
  EicicMethod femto = NoEicic{};
  MacroAbsfConfig macro;

  static MethodAssignment from(const ScenarioConfig& s) { return {s.eicic.femto_method, s.eicic.macro_absf}; }
};

/// A femto's trigger-active interval. `blank_mask` is set when a time pattern was applied.
struct TriggerWindow {
  int femto_cell = -1;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;  // exclusive
  std::optional<AbsfPattern> blank_mask;

  friend bool operator==(const TriggerWindow&, const TriggerWindow&) = default;
};

struct EicicEvent {
  std::int64_t time_ms = 0;
  std::int64_t sent_ms = 0;
  int femto_cell = -1;
  int victim_user = -1;
  MessageKind kind = MessageKind::Trigger;
  double power_dbm = 0.0;
  bool pattern_active = false;
  bool counted = false;

  friend bool operator==(const EicicEvent&, const EicicEvent&) = default;
};

struct RunResult {
  Accumulators acc;
  std::vector<SinrTrace> traces;
  std::vector<TriggerWindow> windows;
  std::vector<HandoverEvent> handovers;
  std::vector<EicicEvent> events;
  std::vector<int> actions_per_femto;
};

/// Transmit activity of a cell in subframe t as a fraction of its current power.
inline double cell_activity(CellKind kind, bool blanked, double macro_background, std::optional<double> residual_factor) {
  if (blanked) return residual_factor.value_or(0.0);
  return kind == CellKind::Macro ? macro_background : 1.0;
}

class Simulator {
 public:
  /// `mask` supplies trigger windows of another run over which this run's
  /// femto throughput is accumulated (paired baseline).
  Simulator(const ScenarioConfig& cfg, MethodAssignment methods, std::vector<TriggerWindow> mask = {})
      : cfg_(validated(cfg)), env_(cfg_), methods_(std::move(methods)), biases_(BiasMap::from(cfg.sim)), mask_(std::move(mask)) {
    validate_method(methods_.femto);
    const std::size_t nc = cfg_.cells.size();
    const std::size_t nu = cfg_.users.size();
    duration_ms_ = static_cast<std::int64_t>(std::llround(cfg_.sim.duration_s * 1000.0));
    noise_dbm_ = env_.noise_dbm();
    noise_mw_ = dbm_to_mw(noise_dbm_);
    if (cfg_.eicic.absf_residual_offset_db) residual_factor_ = dbm_to_mw(-*cfg_.eicic.absf_residual_offset_db);
    if (methods_.macro.enabled) macro_pattern_ = absf_pattern(methods_.macro.duty);
    if (const auto* t = std::get_if<TimeAbsf>(&methods_.femto)) femto_pattern_ = t->pattern;

    cells_.resize(nc);
    for (std::size_t i = 0; i < nc; ++i) {
      const CellSite& c = cfg_.cells[i];
      cells_[i].power_dbm = c.max_tx_power_dbm;
      cells_[i].power_mw = dbm_to_mw(c.max_tx_power_dbm);
      if (c.kind == CellKind::Femto) femtos_.push_back(i);
    }
    trigger_.resize(nc);
    for (std::size_t f : femtos_) trigger_[f].last_applied_power_dbm = cfg_.cells[f].max_tx_power_dbm;
    window_start_.assign(nc, -1);

    // Static HUE links: gain from every cell to each femto's indoor user.
    hue_gain_.assign(nc, std::vector<double>(nc, 0.0));
    p_m_dbm_.assign(nc, kNegInf);
    for (std::size_t f : femtos_) {
      const CellSite& fc = cfg_.cells[f];
      const IndoorRef in = env_.cell_indoor(f);
      for (std::size_t c = 0; c < nc; ++c) {
        if (c == f) continue;
        hue_gain_[c][f] = dbm_to_mw(-env_.path_loss(c, fc.position, in));
        if (cfg_.cells[c].kind == CellKind::Macro) {
          const IndoorRef at = cfg_.radio.pm_includes_wall_loss ? in : IndoorRef{};
          p_m_dbm_[f] = std::max(p_m_dbm_[f], cfg_.cells[c].max_tx_power_dbm - env_.path_loss(c, fc.position, at));
        }
      }
    }

    users_.resize(nu);
    assoc_ = AssociationState(nu);
    result_.traces.resize(nu);
    result_.acc.user_tp_sum_bps.assign(nu, 0.0);
    result_.acc.femto_count = static_cast<int>(femtos_.size());
    for (std::size_t u = 0; u < nu; ++u) {
      UserRuntime& ur = users_[u];
      ur.route = Polyline(cfg_.users[u].route);
      ur.gain.assign(nc, 0.0);
      ur.rss_nominal.assign(nc, kNegInf);
      ur.shadow_db.assign(nc, 0.0);
      ur.outage = OutageDetector(cfg_.radio.outage_threshold_db, cfg_.radio.outage_window_ms);
      result_.traces[u].user_id = cfg_.users[u].id;
      if (cfg_.radio.shadowing_sigma_db > 0.0) {
        for (std::size_t c = 0; c < nc; ++c) {
          std::mt19937_64 r(mix_seed(cfg_.sim.seed ^ (static_cast<std::uint64_t>(cfg_.cells[c].id) << 32) ^
                                     static_cast<std::uint64_t>(cfg_.users[u].id)));
          ur.shadow_db[c] = cfg_.radio.shadowing_sigma_db * standard_normal(r);
        }
      }
    }
    rng_.seed(mix_seed(cfg_.sim.seed));
    std::sort(mask_.begin(), mask_.end(),
              [](const TriggerWindow& a, const TriggerWindow& b) { return a.start_ms < b.start_ms; });

    phase_len_ = 1;
    if (macro_pattern_) phase_len_ = std::lcm(phase_len_, macro_pattern_->period);
    if (femto_pattern_) phase_len_ = std::lcm(phase_len_, femto_pattern_->period);
  }

  std::int64_t clock_ms() const { return clock_; }
  std::int64_t duration_ms() const { return duration_ms_; }
  bool done() const { return clock_ >= duration_ms_; }

  const AssociationState& association() const { return assoc_; }
  const TriggerState& trigger_state(std::size_t cell_idx) const { return trigger_[cell_idx]; }
  double cell_power_dbm(std::size_t cell_idx) const { return cells_[cell_idx].power_dbm; }
  Point user_position(std::size_t u) const { return users_[u].pos; }
  double last_raw_sinr(std::size_t u) const { return users_[u].raw_sinr; }
  double last_accounted_sinr(std::size_t u) const { return users_[u].accounted_sinr; }
  double last_femto_tp_bps(std::size_t cell_idx) const { return hue_tp(cell_idx, clock_ - 1); }
  const RadioEnvironment& environment() const { return env_; }

  /// Transmit activity (fraction of current power) of every cell in subframe t.
  std::vector<double> schedule_loads(std::int64_t t) const {
    std::vector<double> a(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) a[c] = activity(c, t);
    return a;
  }

  /// Advances one subframe.
  void step() {
    const std::int64_t t = clock_;
    move_users(t);
    associate(t);
    deliver(t);
    evaluate(t);
    report(t);
    account(t);
    ++clock_;
    result_.acc.subframes = clock_;
  }

  RunResult run() {
    while (!done()) step();
    return finish();
  }

  /// Closes open windows and returns the results. Call once, after the last step.
  RunResult finish() {
    for (std::size_t f : femtos_)
      if (window_start_[f] >= 0) close_window(f, clock_);
    std::sort(result_.windows.begin(), result_.windows.end(), [](const TriggerWindow& a, const TriggerWindow& b) {
      return std::tie(a.start_ms, a.femto_cell) < std::tie(b.start_ms, b.femto_cell);
    });
    result_.acc.macro_pico_handovers = assoc_.macro_pico_handovers;
    result_.handovers = assoc_.handover_log;
    result_.actions_per_femto.clear();
    int total = 0;
    for (std::size_t f : femtos_) {
      result_.actions_per_femto.push_back(trigger_[f].actions_count);
      total += trigger_[f].actions_count;
    }
    result_.acc.total_actions = total;
    return result_;
  }

 private:
  static const ScenarioConfig& validated(const ScenarioConfig& c) {
    validate(c);
    return c;
  }

  struct CellRuntime {
    double power_dbm = 0.0;
    double power_mw = 0.0;
  };

  struct Candidate {
    std::int64_t t = 0;
    double sinr = 0.0;
    double interference_mw = 0.0;
  };

  struct UserRuntime {
    Polyline route;
    Point pos{};
    std::optional<Point> link_pos;
    std::vector<double> gain;         // linear, user links
    std::vector<double> rss_nominal;  // dBm at max power
    std::vector<double> shadow_db;
    std::deque<Candidate> window;     // monotone (decreasing sinr) candidates
    double raw_sinr = 0.0;
    double accounted_sinr = 0.0;
    double accounted_interference_mw = 0.0;
    std::int64_t accounted_t = 0;
    OutageDetector outage;
  };

  struct Coordination {
    ReleaseTracker tracker;
  };

  // --- stage 1: mobility
  void move_users(std::int64_t t) {
    for (std::size_t u = 0; u < users_.size(); ++u) {
      UserRuntime& ur = users_[u];
      const UserSpec& us = cfg_.users[u];
      double s = us.speed_mps * static_cast<double>(t) / 1000.0;
      if (us.loop_route && ur.route.length() > 0.0) s = std::fmod(s, ur.route.length());
      ur.pos = ur.route.at(s);
      if (!ur.link_pos || distance(*ur.link_pos, ur.pos) >= cfg_.sim.link_update_distance_m) refresh_links(u);
    }
  }

  void refresh_links(std::size_t u) {
    UserRuntime& ur = users_[u];
    ur.link_pos = ur.pos;
    const IndoorRef in = env_.indoor_ref(ur.pos);
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      const double pl = env_.path_loss(c, ur.pos, in) - ur.shadow_db[c];
      ur.gain[c] = dbm_to_mw(-pl);
      ur.rss_nominal[c] = cfg_.cells[c].max_tx_power_dbm - pl;
    }
  }

  // --- stage 2: association
  void associate(std::int64_t t) {
    const HandoverParams ho{cfg_.sim.ho_hysteresis_db, cfg_.sim.ho_time_to_trigger_ms};
    for (std::size_t u = 0; u < users_.size(); ++u)
      update_association_from_rss(assoc_, u, cfg_.users[u], cfg_.cells, users_[u].rss_nominal, biases_, t, ho);
  }

  std::size_t serving_index(std::size_t u) const { return *env_.cell_index(assoc_.users[u].serving); }

  // --- stage 3: coordination messages
  void deliver(std::int64_t t) {
    for (CoordinationMessage& m : queue_.pop_due(t)) {
      const auto fi = env_.cell_index(m.target_cell);
      if (!fi) continue;
      const std::size_t f = *fi;
      TriggerState& st = trigger_[f];
      const CellSite& fc = cfg_.cells[f];
      const bool was_active = st.active;
      ApplyOutcome out;
      if (m.kind == MessageKind::Trigger) {
        in_flight_.erase({m.victim_user, f});
        // A release may have overtaken this trigger; only apply for live coordinations.
        if (!coord_.count({m.victim_user, f})) continue;
        out = apply_eicic(methods_.femto, power_inputs(f, m.measurement), m.victim_user, st);
      } else {
        if (!st.victims.count(m.victim_user)) continue;
        out = release_victim(m.victim_user, fc.max_tx_power_dbm, st);
      }
      set_power(f, st.last_applied_power_dbm);
      if (!was_active && st.active) window_start_[f] = t;
      if (was_active && !st.active) close_window(f, t);
      if (st.pattern_active) window_had_pattern_[f] = true;
      hue_dirty_ = true;
      result_.events.push_back({t, m.sent_at_ms, fc.id, m.victim_user, m.kind, out.power_dbm, out.pattern_active,
                                out.counted});
    }
  }

  PowerControlInputs power_inputs(std::size_t f, const CqiReport& r) {
    const CellSite& fc = cfg_.cells[f];
    PowerControlInputs in;
    in.p_max_dbm = fc.max_tx_power_dbm;
    in.p_min_dbm = cfg_.radio.min_femto_power_dbm;
    in.p_m_dbm = p_m_dbm_[f];
    const double sigma = cfg_.eicic.pl_estimation_sigma_db;
    in.p_ipl_db = env_.path_loss(f, r.position) + (sigma > 0.0 ? sigma * standard_normal(rng_) : 0.0);
    in.pl_hat_db = cfg_.radio.hue_path_loss_db + (sigma > 0.0 ? sigma * standard_normal(rng_) : 0.0);
    double i_mw = 0.0;
    for (std::size_t c = 0; c < cells_.size(); ++c)
      if (c != f) i_mw += cells_[c].power_mw * hue_gain_[c][f];
    in.interference_dbm = mw_to_dbm(i_mw);
    in.noise_dbm = noise_dbm_;
    if (const ReportEntry* e = r.entry(fc.id)) {
      in.p_sinr_db = sinr_single_interferer(r, *e);
      in.p_current_dbm = e->tx_power_dbm;
    } else {
      in.p_current_dbm = cells_[f].power_dbm;
      const double rss = cells_[f].power_dbm - env_.path_loss(f, r.position);
      in.p_sinr_db = sinr_db_mw(dbm_to_mw(r.serving_rss_dbm), dbm_to_mw(rss), dbm_to_mw(r.noise_dbm));
    }
    return in;
  }

  void set_power(std::size_t c, double dbm) {
    cells_[c].power_dbm = dbm;
    cells_[c].power_mw = dbm_to_mw(dbm);
  }

  void close_window(std::size_t f, std::int64_t t) {
    if (window_start_[f] < 0) return;
    TriggerWindow w{cfg_.cells[f].id, window_start_[f], t, std::nullopt};
    if (window_had_pattern_[f] && femto_pattern_) w.blank_mask = femto_pattern_;
    if (w.end_ms > w.start_ms) result_.windows.push_back(std::move(w));
    window_start_[f] = -1;
    window_had_pattern_[f] = false;
  }

  // --- stage 4/5: SINR and scheduling
  bool blanked(std::size_t c, std::int64_t t) const {
    const CellKind k = cfg_.cells[c].kind;
    if (k == CellKind::Macro) return macro_pattern_ && is_blanked(*macro_pattern_, t);
    if (k == CellKind::Femto) return trigger_[c].pattern_active && femto_pattern_ && is_blanked(*femto_pattern_, t);
    return false;
  }

  double activity(std::size_t c, std::int64_t t) const {
    return cell_activity(cfg_.cells[c].kind, blanked(c, t), cfg_.sim.macro_background_activity, residual_factor_);
  }

  void evaluate(std::int64_t t) {
    act_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) act_[c] = activity(c, t) * cells_[c].power_mw;
    const std::int64_t w = cfg_.sim.voip_interval_ms;
    for (std::size_t u = 0; u < users_.size(); ++u) {
      UserRuntime& ur = users_[u];
      const std::size_t s = serving_index(u);
      double i_mw = 0.0;
      for (std::size_t c = 0; c < cells_.size(); ++c)
        if (c != s) i_mw += act_[c] * ur.gain[c];
      const double sig = cells_[s].power_mw * ur.gain[s];
      ur.raw_sinr = sinr_db_mw(sig, i_mw, noise_mw_, cfg_.radio.sinr_ceiling_db);
      while (!ur.window.empty() && ur.window.front().t <= t - w) ur.window.pop_front();
      if (!blanked(s, t)) {
        while (!ur.window.empty() && ur.window.back().sinr <= ur.raw_sinr) ur.window.pop_back();
        ur.window.push_back({t, ur.raw_sinr, i_mw});
      }
      if (!ur.window.empty()) {
        ur.accounted_sinr = ur.window.front().sinr;
        ur.accounted_interference_mw = ur.window.front().interference_mw;
        ur.accounted_t = ur.window.front().t;
      } else {
        ur.accounted_sinr = ur.raw_sinr;
        ur.accounted_interference_mw = i_mw;
        ur.accounted_t = t;
      }
    }
  }

  // --- stage 6: CQI reports, triggers and releases
  CqiReport make_report(std::size_t u, std::int64_t t) const {
    const UserRuntime& ur = users_[u];
    const std::size_t s = serving_index(u);
    CqiReport r;
    r.user_id = cfg_.users[u].id;
    r.serving_cell = cfg_.cells[s].id;
    r.sinr_db = ur.accounted_sinr;
    r.serving_rss_dbm = mw_to_dbm(cells_[s].power_mw * ur.gain[s]);
    r.interference_dbm = mw_to_dbm(ur.accounted_interference_mw);
    r.noise_dbm = noise_dbm_;
    r.position = ur.pos;
    r.time_ms = t;
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < cells_.size(); ++c)
      if (c != s) order.push_back(c);
    const std::size_t k = std::min<std::size_t>(order.size(), static_cast<std::size_t>(cfg_.eicic.report_top_k));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (ur.rss_nominal[a] != ur.rss_nominal[b]) return ur.rss_nominal[a] > ur.rss_nominal[b];
                        return a < b;
                      });
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t c = order[i];
      r.strongest.push_back({cfg_.cells[c].id, mw_to_dbm(cells_[c].power_mw * ur.gain[c]), cells_[c].power_dbm,
                             cfg_.cells[c].max_tx_power_dbm, !blanked(c, ur.accounted_t)});
    }
    return r;
  }

  void report(std::int64_t t) {
    if (t % cfg_.radio.cqi_report_period_ms != 0) return;
    const ReleaseParams rp{cfg_.radio.trigger_threshold_db, cfg_.eicic.release_hysteresis_db,
                           cfg_.eicic.release_hold_ms};
    for (std::size_t u = 0; u < users_.size(); ++u) {
      const std::size_t s = serving_index(u);
      if (cfg_.cells[s].kind == CellKind::Femto) continue;  // only open cells coordinate
      const CqiReport r = make_report(u, t);
      const int uid = r.user_id;

      // Release tracking on the would-be SINR with each coordinated femto back at full power.
      for (auto& [key, co] : coord_) {
        if (key.first != uid) continue;
        if (const ReportEntry* e = r.entry(cfg_.cells[key.second].id)) co.tracker.on_report(t, sinr_with_nominal(r, *e));
      }

      if (!should_trigger(r, cfg_.radio.trigger_threshold_db)) continue;
      // Interference still expected to disappear once in-flight triggers land.
      double pending_mw = 0.0;
      const ReportEntry* pick = nullptr;
      double pick_mw = 0.0;
      for (const ReportEntry& e : r.strongest) {
        const std::size_t c = *env_.cell_index(e.cell_id);
        if (cfg_.cells[c].kind != CellKind::Femto || cfg_.cells[c].access != AccessMode::Csg) continue;
        const double contrib = e.active ? dbm_to_mw(e.rss_dbm) : 0.0;
        if (in_flight_.count({uid, c})) {
          pending_mw += contrib;
          continue;
        }
        if (contrib > pick_mw) {
          pick = &e;
          pick_mw = contrib;
        }
      }
      if (pending_mw > 0.0) {
        const double i_left = std::max(0.0, dbm_to_mw(r.interference_dbm) - pending_mw);
        if (sinr_db_mw(dbm_to_mw(r.serving_rss_dbm), i_left, dbm_to_mw(r.noise_dbm)) >= cfg_.radio.trigger_threshold_db)
          continue;
      }
      if (!pick) continue;
      const std::size_t f = *env_.cell_index(pick->cell_id);
      CoordinationMessage m;
      m.kind = MessageKind::Trigger;
      m.source_cell = r.serving_cell;
      m.target_cell = pick->cell_id;
      m.victim_user = uid;
      m.measurement = r;
      m.sent_at_ms = t;
      m.deliver_at_ms = t + backhaul_ms(f);
      queue_.push(std::move(m));
      in_flight_.insert({uid, f});
      if (!coord_.count({uid, f})) coord_.emplace(std::make_pair(uid, f), Coordination{ReleaseTracker(t, rp)});
    }

    // Releases, including victims that stopped reporting to an open cell.
    for (auto it = coord_.begin(); it != coord_.end();) {
      const auto [uid, f] = it->first;
      if (!in_flight_.count({uid, f}) && it->second.tracker.should_release(t)) {
        CoordinationMessage m;
        m.kind = MessageKind::Release;
        m.source_cell = cfg_.cells.front().id;
        m.target_cell = cfg_.cells[f].id;
        m.victim_user = uid;
        m.sent_at_ms = t;
        m.deliver_at_ms = t + backhaul_ms(f);
        queue_.push(std::move(m));
        it = coord_.erase(it);
      } else {
        ++it;
      }
    }
  }

  std::int64_t backhaul_ms(std::size_t target) const {
    switch (cfg_.cells[target].kind) {
      case CellKind::Femto: return cfg_.eicic.femto_backhaul_ms;
      case CellKind::Pico: return cfg_.eicic.pico_backhaul_ms;
      case CellKind::Macro: return 0;
    }
    return 0;
  }

  // --- stage 7: outage and throughput
  void rebuild_hue_cache() {
    const std::size_t nf = femtos_.size();
    hue_tp_.assign(static_cast<std::size_t>(phase_len_) * nf, 0.0);
    hue_tier_.assign(static_cast<std::size_t>(phase_len_), 0.0);
    const double hue_loss = dbm_to_mw(-cfg_.radio.hue_path_loss_db);
    std::vector<double> a(cells_.size());
    for (int ph = 0; ph < phase_len_; ++ph) {
      for (std::size_t c = 0; c < cells_.size(); ++c) a[c] = activity(c, ph) * cells_[c].power_mw;
      double tier = 0.0;
      for (std::size_t k = 0; k < nf; ++k) {
        const std::size_t f = femtos_[k];
        double tp = 0.0;
        if (!blanked(f, ph)) {
          double i_mw = 0.0;
          for (std::size_t c = 0; c < cells_.size(); ++c)
            if (c != f) i_mw += a[c] * hue_gain_[c][f];
          const double sinr = sinr_db_mw(cells_[f].power_mw * hue_loss, i_mw, noise_mw_, cfg_.radio.sinr_ceiling_db);
          tp = throughput_bps(sinr, cfg_.cells[f].bandwidth_mhz * 1e6, 1.0, cfg_.radio.link_rate);
        }
        hue_tp_[static_cast<std::size_t>(ph) * nf + k] = tp;
        tier += tp;
      }
      hue_tier_[static_cast<std::size_t>(ph)] = tier;
    }
    femto_slot_.assign(cells_.size(), -1);
    for (std::size_t k = 0; k < nf; ++k) femto_slot_[femtos_[k]] = static_cast<int>(k);
    hue_dirty_ = false;
  }

  double hue_tp(std::size_t f, std::int64_t t) const {
    if (hue_tp_.empty() || t < 0) return 0.0;
    const std::size_t ph = static_cast<std::size_t>(t % phase_len_);
    return hue_tp_[ph * femtos_.size() + static_cast<std::size_t>(femto_slot_[f])];
  }

  void account(std::int64_t t) {
    Accumulators& acc = result_.acc;
    const double voip_bw = cfg_.sim.voip_bandwidth_mhz * 1e6;
    const double voip_frac = 1.0 / cfg_.sim.voip_interval_ms;
    for (std::size_t u = 0; u < users_.size(); ++u) {
      UserRuntime& ur = users_[u];
      const bool onset = ur.outage.update(ur.accounted_sinr);
      if (onset) {
        if (cfg_.cells[serving_index(u)].kind == CellKind::Pico) ++acc.pue_outages;
        else ++acc.mue_outages;
      }
      double tp = 0.0;
      if (!ur.outage.outage_active()) {
        if (cfg_.users[u].service == Service::Voip)
          tp = throughput_bps(ur.accounted_sinr, voip_bw, voip_frac, cfg_.radio.link_rate);
        else
          tp = throughput_bps(ur.accounted_sinr, cfg_.cells[serving_index(u)].bandwidth_mhz * 1e6, 1.0,
                              cfg_.radio.link_rate);
      }
      acc.user_tp_sum_bps[u] += tp;
      if (onset || t % cfg_.sim.trace_decimation_ms == 0) result_.traces[u].samples.emplace_back(t, ur.accounted_sinr);
    }

    if (femtos_.empty()) return;
    if (hue_dirty_ || hue_tp_.empty()) rebuild_hue_cache();
    acc.femto_tier_tp_sum_bps += hue_tier_[static_cast<std::size_t>(t % phase_len_)];
    for (std::size_t f : femtos_) {
      if (!trigger_[f].active) continue;
      if (trigger_[f].pattern_active && femto_pattern_ && !is_blanked(*femto_pattern_, t)) continue;
      acc.gain_tp_sum_bps += hue_tp(f, t);
      ++acc.gain_samples;
    }
    if (!mask_.empty()) {
      while (mask_next_ < mask_.size() && mask_[mask_next_].start_ms <= t) mask_live_.push_back(mask_next_++);
      for (std::size_t k = 0; k < mask_live_.size();) {
        const TriggerWindow& w = mask_[mask_live_[k]];
        if (w.end_ms <= t) {
          mask_live_[k] = mask_live_.back();
          mask_live_.pop_back();
          continue;
        }
        ++k;
        if (w.blank_mask && !is_blanked(*w.blank_mask, t)) continue;
        const auto f = env_.cell_index(w.femto_cell);
        if (!f) continue;
        acc.mask_tp_sum_bps += hue_tp(*f, t);
        ++acc.mask_samples;
      }
    }
  }

  ScenarioConfig cfg_;
  RadioEnvironment env_;
  MethodAssignment methods_;
  BiasMap biases_;
  std::vector<TriggerWindow> mask_;
  std::size_t mask_next_ = 0;
  std::vector<std::size_t> mask_live_;

  std::int64_t clock_ = 0;
  std::int64_t duration_ms_ = 0;
  double noise_dbm_ = kNegInf;
  double noise_mw_ = 0.0;
  std::optional<double> residual_factor_;
  std::optional<AbsfPattern> macro_pattern_;
  std::optional<AbsfPattern> femto_pattern_;

  std::vector<CellRuntime> cells_;
  std::vector<std::size_t> femtos_;
  std::vector<int> femto_slot_;
  std::vector<TriggerState> trigger_;
  std::vector<std::int64_t> window_start_;
  std::map<std::size_t, bool> window_had_pattern_;
  std::vector<std::vector<double>> hue_gain_;  // [cell][femto]
  std::vector<double> p_m_dbm_;

  std::vector<UserRuntime> users_;
  AssociationState assoc_;
  MessageQueue queue_;
  std::set<std::pair<int, std::size_t>> in_flight_;       // (user id, femto index)
  std::map<std::pair<int, std::size_t>, Coordination> coord_;  // macro-side view of live coordinations
  std::mt19937_64 rng_;
  std::vector<double> act_;

  int phase_len_ = 1;
  bool hue_dirty_ = true;
  std::vector<double> hue_tp_;
  std::vector<double> hue_tier_;

  RunResult result_;
};

/// Runs a scenario to completion with the given method assignment.
inline RunResult run(const ScenarioConfig& cfg, const MethodAssignment& methods,
                     std::vector<TriggerWindow> mask = {}) {
  Simulator sim(cfg, methods, std::move(mask));
  return sim.run();
}

inline RunResult run(const ScenarioConfig& cfg) { return run(cfg, MethodAssignment::from(cfg)); }

}  // namespace hetsim
