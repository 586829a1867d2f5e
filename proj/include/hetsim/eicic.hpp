#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hetsim/geometry.hpp"
#include "hetsim/radio.hpp"

namespace hetsim {

// ---------------------------------------------------------------------------
// ABSF patterns

enum class AbsfDuty { OneEighth, TwoEighths, ThreeEighths, ThreeTwentieths, Half };

inline std::string to_string(AbsfDuty d) {
  switch (d) {
    case AbsfDuty::OneEighth: return "1/8";
    case AbsfDuty::TwoEighths: return "2/8";
    case AbsfDuty::ThreeEighths: return "3/8";
    case AbsfDuty::ThreeTwentieths: return "3/20";
    case AbsfDuty::Half: return "1/2";
  }
  return "?";
}

inline AbsfDuty parse_duty(std::string_view s) {
  for (AbsfDuty d : {AbsfDuty::OneEighth, AbsfDuty::TwoEighths, AbsfDuty::ThreeEighths, AbsfDuty::ThreeTwentieths,
                     AbsfDuty::Half})
    if (to_string(d) == s) return d;
  throw std::invalid_argument("unsupported ABSF duty '" + std::string(s) + "' (expected 1/8, 2/8, 3/8, 3/20 or 1/2)");
}

struct AbsfPattern {
  int period = 1;
  std::vector<int> blanked;  // sorted offsets in [0, period)

  double duty() const { return static_cast<double>(blanked.size()) / period; }
  friend bool operator==(const AbsfPattern&, const AbsfPattern&) = default;
};

inline AbsfPattern absf_pattern(AbsfDuty d) {
  switch (d) {
    case AbsfDuty::Half: return {2, {0}};
    case AbsfDuty::OneEighth: return {8, {0}};
    case AbsfDuty::TwoEighths: return {8, {0, 3}};
    case AbsfDuty::ThreeEighths: return {8, {0, 3, 6}};
    case AbsfDuty::ThreeTwentieths: return {20, {0, 7, 14}};
  }
  throw std::invalid_argument("unsupported ABSF duty");
}

inline AbsfPattern absf_pattern(std::string_view duty) { return absf_pattern(parse_duty(duty)); }

inline bool is_blanked(const AbsfPattern& p, std::int64_t subframe) {
  if (p.period <= 0 || subframe < 0) return false;
  const int off = static_cast<int>(subframe % p.period);
  return std::binary_search(p.blanked.begin(), p.blanked.end(), off);
}

// ---------------------------------------------------------------------------
// Methods

struct NoEicic {
  friend bool operator==(const NoEicic&, const NoEicic&) = default;
};
struct TimeAbsf {
  AbsfPattern pattern = absf_pattern(AbsfDuty::Half);
  friend bool operator==(const TimeAbsf&, const TimeAbsf&) = default;
};
struct Power1 {
  double alpha = 1.0;
  double beta_db = 60.0;
  friend bool operator==(const Power1&, const Power1&) = default;
};
struct Power2 {
  double p_ofst_max_db = 80.0;
  double p_ofst_min_db = 50.0;
  friend bool operator==(const Power2&, const Power2&) = default;
};
struct Power3 {
  double sinr_tar_hue_db = 0.0;
  friend bool operator==(const Power3&, const Power3&) = default;
};
struct Power4 {
  double alpha = 1.0;
  std::optional<double> beta_db;  // derived per trigger when unset
  double sinr_tar_mue_db = 5.0;
  friend bool operator==(const Power4&, const Power4&) = default;
};

using EicicMethod = std::variant<NoEicic, TimeAbsf, Power1, Power2, Power3, Power4>;

inline std::string method_name(const EicicMethod& m) {
  static constexpr const char* names[] = {"none", "time", "power1", "power2", "power3", "power4"};
  return names[m.index()];
}

/// Throws std::invalid_argument when a parameter violates its invariant.
inline void validate_method(const EicicMethod& m) {
  if (const auto* p = std::get_if<Power1>(&m); p && !(p->alpha >= 0.0))
    throw std::invalid_argument("power1: alpha must be >= 0");
  if (const auto* p = std::get_if<Power4>(&m); p && !(p->alpha >= 0.0))
    throw std::invalid_argument("power4: alpha must be >= 0");
  if (const auto* p = std::get_if<Power2>(&m); p && !(p->p_ofst_min_db <= p->p_ofst_max_db))
    throw std::invalid_argument("power2: p_ofst_min must be <= p_ofst_max");
  if (const auto* p = std::get_if<TimeAbsf>(&m)) {
    if (p->pattern.period <= 0) throw std::invalid_argument("time: pattern period must be positive");
    for (int b : p->pattern.blanked)
      if (b < 0 || b >= p->pattern.period) throw std::invalid_argument("time: blanked offset outside period");
  }
}

struct PowerControlInputs {
  double p_max_dbm = 20.0;
  double p_min_dbm = -10.0;
  double p_m_dbm = kNegInf;  // strongest macro RSS at the femto
  double p_ipl_db = 0.0;     // femto -> victim path loss
  double pl_hat_db = 0.0;    // femto -> HUE path loss estimate
  double interference_dbm = kNegInf;
  double noise_dbm = kNegInf;
  double p_sinr_db = 0.0;  // victim SINR counting only this femto
  double p_current_dbm = 20.0;  // femto power when the report was measured
};

inline double power_method_1(const PowerControlInputs& in, double alpha, double beta_db) {
  return std::max(std::min(alpha * in.p_m_dbm + beta_db, in.p_max_dbm), in.p_min_dbm);
}

inline double power_method_2(const PowerControlInputs& in, double p_ofst_max_db, double p_ofst_min_db) {
  const double ofst = med3(in.p_ipl_db, p_ofst_max_db, p_ofst_min_db);
  return med3(in.p_m_dbm + ofst, in.p_max_dbm, in.p_min_dbm);
}

inline double power_method_3(const PowerControlInputs& in, double sinr_tar_hue_db) {
  const double p_rec = mw_to_dbm(dbm_to_mw(in.interference_dbm) + dbm_to_mw(in.noise_dbm)) + sinr_tar_hue_db;
  return std::max(in.p_min_dbm, std::min(in.pl_hat_db + p_rec, in.p_max_dbm));
}

inline double power_method_4(const PowerControlInputs& in, double alpha, double beta_db) {
  return std::max(std::min(alpha * in.p_sinr_db + beta_db, in.p_max_dbm), in.p_min_dbm);
}

/// Offset that moves the femto power by exactly the victim's SINR shortfall
/// relative to the power it had when the report was measured.
inline double derive_power4_beta(double p_current_dbm, double p_sinr_db, double sinr_tar_db, double alpha) {
  return p_current_dbm - sinr_tar_db + (1.0 - alpha) * p_sinr_db;
}

// ---------------------------------------------------------------------------
// Measurement reports and coordination messages

struct ReportEntry {
  int cell_id = -1;
  double rss_dbm = kNegInf;       // at the cell's current tx power
  double tx_power_dbm = kNegInf;  // current tx power
  double max_power_dbm = kNegInf;
  bool active = true;             // contributed in the scheduled subframe

  double nominal_rss_dbm() const { return rss_dbm - tx_power_dbm + max_power_dbm; }
};

struct CqiReport {
  int user_id = -1;
  int serving_cell = -1;
  double sinr_db = 0.0;
  double serving_rss_dbm = kNegInf;
  double interference_dbm = kNegInf;  // in the scheduled subframe
  double noise_dbm = kNegInf;
  Point position{};
  std::vector<ReportEntry> strongest;  // top-k non-serving cells by nominal RSS
  std::int64_t time_ms = 0;

  const ReportEntry* entry(int cell) const {
    for (const ReportEntry& e : strongest)
      if (e.cell_id == cell) return &e;
    return nullptr;
  }
};

/// The victim's SINR with `cell` transmitting at its maximum power in the scheduled subframe.
inline double sinr_with_nominal(const CqiReport& r, const ReportEntry& e) {
  double i_mw = dbm_to_mw(r.interference_dbm);
  if (e.active) i_mw -= dbm_to_mw(e.rss_dbm);
  i_mw = std::max(0.0, i_mw) + dbm_to_mw(e.nominal_rss_dbm());
  return sinr_db_mw(dbm_to_mw(r.serving_rss_dbm), i_mw, dbm_to_mw(r.noise_dbm));
}

/// The victim's SINR counting only `cell`'s interference at its current power.
inline double sinr_single_interferer(const CqiReport& r, const ReportEntry& e) {
  return sinr_db_mw(dbm_to_mw(r.serving_rss_dbm), dbm_to_mw(e.rss_dbm), dbm_to_mw(r.noise_dbm));
}

inline bool should_trigger(const CqiReport& report, double trigger_threshold_db) {
  return report.sinr_db < trigger_threshold_db;
}

enum class MessageKind { Trigger, Release };

struct CoordinationMessage {
  MessageKind kind = MessageKind::Trigger;
  int source_cell = -1;
  int target_cell = -1;
  int victim_user = -1;
  CqiReport measurement;
  std::int64_t sent_at_ms = 0;
  std::int64_t deliver_at_ms = 0;
  std::uint64_t seq = 0;
};

/// Pending messages ordered by (deliver_at_ms, seq).
class MessageQueue {
 public:
  void push(CoordinationMessage m) {
    m.seq = next_seq_++;
    heap_.push(std::move(m));
  }

  /// Removes and returns every message with deliver_at_ms <= now, in delivery order.
  std::vector<CoordinationMessage> pop_due(std::int64_t now_ms) {
    std::vector<CoordinationMessage> out;
    while (!heap_.empty() && heap_.top().deliver_at_ms <= now_ms) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    return out;
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const CoordinationMessage& a, const CoordinationMessage& b) const {
      if (a.deliver_at_ms != b.deliver_at_ms) return a.deliver_at_ms > b.deliver_at_ms;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<CoordinationMessage, std::vector<CoordinationMessage>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

// ---------------------------------------------------------------------------
// Per-femto trigger state

struct TriggerState {
  bool active = false;
  std::map<int, double> victims;  // victim user -> requested power
  bool pattern_active = false;
  int actions_count = 0;
  double last_applied_power_dbm = 20.0;

  std::optional<int> victim_user() const {
    if (victims.empty()) return std::nullopt;
    return victims.begin()->first;
  }
};

inline constexpr double kActionToleranceDb = 0.01;

struct ApplyOutcome {
  double power_dbm = 0.0;
  bool pattern_active = false;
  bool counted = false;
};

/// Power the method requests for one victim (time and none keep the current power).
inline double method_power(const EicicMethod& m, const PowerControlInputs& in) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Power1>) return power_method_1(in, p.alpha, p.beta_db);
        else if constexpr (std::is_same_v<T, Power2>) return power_method_2(in, p.p_ofst_max_db, p.p_ofst_min_db);
        else if constexpr (std::is_same_v<T, Power3>) return power_method_3(in, p.sinr_tar_hue_db);
        else if constexpr (std::is_same_v<T, Power4>) {
          const double beta = p.beta_db ? *p.beta_db : derive_power4_beta(in.p_current_dbm, in.p_sinr_db, p.sinr_tar_mue_db, p.alpha);
          return power_method_4(in, p.alpha, beta);
        } else {
          return in.p_current_dbm;
        }
      },
      m);
}

/// Applies a delivered trigger for `victim`. The femto operates at the lowest
/// power requested across its current victims.
inline ApplyOutcome apply_eicic(const EicicMethod& m, const PowerControlInputs& in, int victim, TriggerState& st) {
  st.active = true;
  ApplyOutcome out{st.last_applied_power_dbm, st.pattern_active, false};
  if (std::holds_alternative<NoEicic>(m)) {
    st.victims[victim] = st.last_applied_power_dbm;
    return out;
  }
  if (std::holds_alternative<TimeAbsf>(m)) {
    st.victims[victim] = st.last_applied_power_dbm;
    if (!st.pattern_active) {
      st.pattern_active = true;
      ++st.actions_count;
      out.counted = true;
    }
    out.pattern_active = true;
    return out;
  }
  st.victims[victim] = method_power(m, in);
  double p = in.p_max_dbm;
  for (const auto& [_, req] : st.victims) p = std::min(p, req);
  if (std::abs(p - st.last_applied_power_dbm) > kActionToleranceDb) {
    ++st.actions_count;
    out.counted = true;
  }
  st.last_applied_power_dbm = p;
  out.power_dbm = p;
  return out;
}

/// Removes a victim. When none remain the femto returns to p_max and drops its pattern.
inline ApplyOutcome release_victim(int victim, double p_max_dbm, TriggerState& st) {
  st.victims.erase(victim);
  if (st.victims.empty()) {
    st.active = false;
    st.pattern_active = false;
    st.last_applied_power_dbm = p_max_dbm;
  } else {
    double p = p_max_dbm;
    for (const auto& [_, req] : st.victims) p = std::min(p, req);
    st.last_applied_power_dbm = p;
  }
  return {st.last_applied_power_dbm, st.pattern_active, false};
}

// ---------------------------------------------------------------------------
// Release

struct ReleaseParams {
  double threshold_db = -3.0;
  double hysteresis_db = 3.0;
  std::int64_t hold_ms = 500;
};

struct ReportSample {
  std::int64_t time_ms = 0;
  double sinr_db = 0.0;
};

/// True when every report in the last hold_ms exceeded threshold + hysteresis
/// and they span the whole hold interval, or when no report arrived for hold_ms.
/// `since_ms` is when tracking began (activation).
inline bool release_condition(std::span<const ReportSample> reports, std::int64_t now_ms, std::int64_t since_ms,
                              const ReleaseParams& p) {
  const double level = p.threshold_db + p.hysteresis_db;
  std::int64_t last = since_ms;
  for (const ReportSample& r : reports)
    if (r.time_ms <= now_ms) last = std::max(last, r.time_ms);
  if (now_ms - last >= p.hold_ms) return true;
  // Start of the current run of good reports.
  std::optional<std::int64_t> good_since;
  for (const ReportSample& r : reports) {
    if (r.time_ms > now_ms) continue;
    if (r.sinr_db > level) {
      if (!good_since) good_since = r.time_ms;
    } else {
      good_since.reset();
    }
  }
  return good_since && now_ms - *good_since >= p.hold_ms;
}

/// Incremental form of release_condition for chronologically ordered reports.
class ReleaseTracker {
 public:
  ReleaseTracker() = default;
  ReleaseTracker(std::int64_t since_ms, ReleaseParams p) : params_(p), last_report_(since_ms) {}

  void on_report(std::int64_t time_ms, double sinr_db) {
    last_report_ = std::max(last_report_, time_ms);
    if (sinr_db > params_.threshold_db + params_.hysteresis_db) {
      if (!good_since_) good_since_ = time_ms;
    } else {
      good_since_.reset();
    }
  }

  bool should_release(std::int64_t now_ms) const {
    if (now_ms - last_report_ >= params_.hold_ms) return true;
    return good_since_ && now_ms - *good_since_ >= params_.hold_ms;
  }

 private:
  ReleaseParams params_{};
  std::int64_t last_report_ = 0;
  std::optional<std::int64_t> good_since_;
};

}  // namespace hetsim
