#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace hetsim {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Axis-aligned rectangle, boundaries inclusive.
struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  Point center() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0}; }
  bool contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Distance from a point to the rectangle (0 when inside).
inline double distance(Point p, const Rect& r) {
  const double dx = std::max({r.x_min - p.x, 0.0, p.x - r.x_max});
  const double dy = std::max({r.y_min - p.y, 0.0, p.y - r.y_max});
  return std::hypot(dx, dy);
}

/// Slab test: does the closed segment a-b touch the rectangle interior or boundary?
inline bool segment_intersects(Point a, Point b, const Rect& r) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double d[2] = {b.x - a.x, b.y - a.y};
  const double o[2] = {a.x, a.y};
  const double lo[2] = {r.x_min, r.y_min};
  const double hi[2] = {r.x_max, r.y_max};
  for (int k = 0; k < 2; ++k) {
    if (d[k] == 0.0) {
      if (o[k] < lo[k] || o[k] > hi[k]) return false;
      continue;
    }
    double ta = (lo[k] - o[k]) / d[k];
    double tb = (hi[k] - o[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

/// Polyline with cumulative arc length, used for user routes.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Point> pts) : pts_(std::move(pts)) {
    cum_.reserve(pts_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      if (i > 0) acc += distance(pts_[i - 1], pts_[i]);
      cum_.push_back(acc);
    }
  }

  double length() const { return cum_.empty() ? 0.0 : cum_.back(); }
  const std::vector<Point>& points() const { return pts_; }

  /// Point at arc length s, clamped to the end points.
  Point at(double s) const {
    if (pts_.empty()) return {};
    if (s <= 0.0 || pts_.size() == 1) return pts_.front();
    if (s >= length()) return pts_.back();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - cum_.begin());
    const double seg = cum_[i] - cum_[i - 1];
    const double f = seg > 0.0 ? (s - cum_[i - 1]) / seg : 0.0;
    return {pts_[i - 1].x + f * (pts_[i].x - pts_[i - 1].x),
            pts_[i - 1].y + f * (pts_[i].y - pts_[i - 1].y)};
  }

 private:
  std::vector<Point> pts_;
  std::vector<double> cum_;
};

}  // namespace hetsim

namespace hetsim {

/// Uniform-grid index over rectangles for point containment and segment
/// crossing queries. Items are identified by their position in the input.
class RectIndex {
 public:
  RectIndex() = default;
  explicit RectIndex(std::vector<Rect> rects, double cell_m = 15.0) : rects_(std::move(rects)), cell_(cell_m) {
    if (rects_.empty()) return;
    Rect bb = rects_.front();
    for (const Rect& r : rects_) {
      bb.x_min = std::min(bb.x_min, r.x_min);
      bb.y_min = std::min(bb.y_min, r.y_min);
      bb.x_max = std::max(bb.x_max, r.x_max);
      bb.y_max = std::max(bb.y_max, r.y_max);
    }
    origin_ = {bb.x_min, bb.y_min};
    nx_ = std::max(1, static_cast<int>(std::ceil(bb.width() / cell_)) + 1);
    ny_ = std::max(1, static_cast<int>(std::ceil(bb.height() / cell_)) + 1);
    cells_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), {});
    for (std::size_t i = 0; i < rects_.size(); ++i) {
      const Rect& r = rects_[i];
      for (int cx = col(r.x_min); cx <= col(r.x_max); ++cx)
        for (int cy = row(r.y_min); cy <= row(r.y_max); ++cy) cells_[slot(cx, cy)].push_back(i);
    }
  }

  const std::vector<Rect>& rects() const { return rects_; }

  /// Indices of rectangles containing p, ascending.
  std::vector<std::size_t> containing(Point p) const {
    std::vector<std::size_t> out;
    if (rects_.empty()) return out;
    const int cx = col(p.x);
    const int cy = row(p.y);
    if (!in_grid(cx, cy)) return out;
    for (std::size_t i : cells_[slot(cx, cy)])
      if (rects_[i].contains(p)) out.push_back(i);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Number of rectangles crossed by segment a-b, excluding the given
  /// indices (the endpoints' own buildings). Stops counting at `cap`.
  int count_crossed(Point a, Point b, std::optional<std::size_t> skip_a, std::optional<std::size_t> skip_b,
                    int cap) const {
    if (rects_.empty() || cap <= 0) return 0;
    std::vector<std::size_t> seen;
    int n = 0;
    // Sample the segment every half cell and test the 3x3 neighbourhood.
    const double len = distance(a, b);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / (cell_ * 0.5))));
    for (int s = 0; s <= steps; ++s) {
      const double f = static_cast<double>(s) / steps;
      const Point q{a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
      const int qx = col(q.x);
      const int qy = row(q.y);
      for (int cx = qx - 1; cx <= qx + 1; ++cx) {
        for (int cy = qy - 1; cy <= qy + 1; ++cy) {
          if (!in_grid(cx, cy)) continue;
          for (std::size_t i : cells_[slot(cx, cy)]) {
            if (std::find(seen.begin(), seen.end(), i) != seen.end()) continue;
            seen.push_back(i);
            if ((skip_a && *skip_a == i) || (skip_b && *skip_b == i)) continue;
            if (segment_intersects(a, b, rects_[i]) && ++n >= cap) return n;
          }
        }
      }
    }
    return n;
  }

 private:
  int col(double x) const { return static_cast<int>(std::floor((x - origin_.x) / cell_)); }
  int row(double y) const { return static_cast<int>(std::floor((y - origin_.y) / cell_)); }
  bool in_grid(int cx, int cy) const { return cx >= 0 && cy >= 0 && cx < nx_ && cy < ny_; }
  std::size_t slot(int cx, int cy) const {
    return static_cast<std::size_t>(cy) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(cx);
  }

  std::vector<Rect> rects_;
  double cell_ = 15.0;
  Point origin_{};
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::vector<std::size_t>> cells_;
};

}  // namespace hetsim
