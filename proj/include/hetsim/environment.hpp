#pragma once

#include <cmath>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hetsim/geometry.hpp"
#include "hetsim/radio.hpp"
#include "hetsim/scenario.hpp"

namespace hetsim {

/// Static propagation context of a scenario: building lookup and per-cell path loss.
class RadioEnvironment {
 public:
  explicit RadioEnvironment(const ScenarioConfig& cfg) : cfg_(&cfg) {
    std::vector<Rect> rects;
    rects.reserve(cfg.buildings.size());
    for (std::size_t i = 0; i < cfg.buildings.size(); ++i) {
      rects.push_back(cfg.buildings[i].footprint);
      building_pos_.emplace(cfg.buildings[i].id, i);
    }
    index_ = RectIndex(std::move(rects));
    for (std::size_t i = 0; i < cfg.cells.size(); ++i) {
      cell_pos_[cfg.cells[i].id] = i;
      cell_in_.push_back(indoor_ref_for_cell(cfg.cells[i]));
    }
    noise_dbm_ = noise_floor_dbm(cfg.radio.system_bandwidth_mhz * 1e6, cfg.radio.noise_figure_db,
                                 cfg.radio.thermal_noise_dbm_per_hz);
  }

  const ScenarioConfig& config() const { return *cfg_; }
  double noise_dbm() const { return noise_dbm_; }

  std::optional<std::size_t> cell_index(int id) const {
    auto it = cell_pos_.find(id);
    if (it == cell_pos_.end()) return std::nullopt;
    return it->second;
  }

  /// Building context of a point; the lowest building id wins on overlap.
  IndoorRef indoor_ref(Point p) const {
    IndoorRef best;
    for (std::size_t i : index_.containing(p)) {
      const Building& b = cfg_->buildings[i];
      if (!best.indoor() || b.id < best.building_id) best = {b.id, b.wall_loss_db};
    }
    return best;
  }

  const IndoorRef& cell_indoor(std::size_t cell_idx) const { return cell_in_[cell_idx]; }

  /// Intermediate buildings between a cell and a receiver, capped by the cell model.
  int obstructions(std::size_t cell_idx, Point rx, const IndoorRef& rx_in) const {
    const CellSite& c = cfg_->cells[cell_idx];
    const PathLossModel& m = cfg_->radio.model(c.kind);
    if (m.max_obstructions <= 0 || m.obstruction_loss_db <= 0.0) return 0;
    return index_.count_crossed(c.position, rx, building_slot(cell_in_[cell_idx]), building_slot(rx_in),
                                m.max_obstructions);
  }

  double path_loss(std::size_t cell_idx, Point rx, const IndoorRef& rx_in) const {
    const CellSite& c = cfg_->cells[cell_idx];
    const PathLossModel& m = cfg_->radio.model(c.kind);
    return path_loss_db(m, c.position, rx, cell_in_[cell_idx], rx_in, obstructions(cell_idx, rx, rx_in));
  }

  double path_loss(std::size_t cell_idx, Point rx) const { return path_loss(cell_idx, rx, indoor_ref(rx)); }

  /// RSS at the cell's maximum power.
  double rss_dbm(const CellSite& c, Point rx) const {
    const auto idx = cell_index(c.id);
    return hetsim::rss_dbm(c.max_tx_power_dbm, path_loss(*idx, rx));
  }

 private:
  IndoorRef indoor_ref_for_cell(const CellSite& c) const {
    if (c.host_building) {
      if (const Building* b = cfg_->building(*c.host_building)) return {b->id, b->wall_loss_db};
    }
    return indoor_ref(c.position);
  }

  std::optional<std::size_t> building_slot(const IndoorRef& r) const {
    if (!r.indoor()) return std::nullopt;
    auto it = building_pos_.find(r.building_id);
    if (it == building_pos_.end()) return std::nullopt;
    return it->second;
  }

  const ScenarioConfig* cfg_;
  RectIndex index_;
  std::unordered_map<int, std::size_t> cell_pos_;
  std::unordered_map<int, std::size_t> building_pos_;
  std::vector<IndoorRef> cell_in_;
  double noise_dbm_ = kNegInf;
};

}  // namespace hetsim
