#pragma once

// Indoor building geometry and distance/wall based path gain.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace coshare {

struct Position {
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Position&, const Position&) = default;
};

inline double distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct WallSegment {
  Position from;
  Position to;
  double loss_db{10.0};
};

// Axis-aligned rectangle, used for rooms and service areas.
struct Rect {
  double x0{0.0};
  double y0{0.0};
  double x1{0.0};
  double y1{0.0};

  double area() const { return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0); }
  bool contains(const Position& p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
  Position centroid() const { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }
};

struct Layout {
  double width_m{50.0};
  double height_m{50.0};
  std::vector<WallSegment> internal_walls;
  std::vector<Rect> rooms;

  bool contains(const Position& p) const {
    return p.x >= 0.0 && p.x <= width_m && p.y >= 0.0 && p.y <= height_m;
  }

  void validate() const {
    if (!(width_m > 0.0) || !(height_m > 0.0))
      throw std::invalid_argument("layout: width_m and height_m must be positive");
    for (const auto& w : internal_walls) {
      if (!contains(w.from) || !contains(w.to))
        throw std::invalid_argument("layout: wall endpoint outside building");
      if (w.loss_db < 0.0)
        throw std::invalid_argument("layout: wall loss_db must be >= 0");
    }
  }
};

/// Square building split into four congruent rooms by one full-length
/// vertical and one full-length horizontal partition. Rooms are indexed
/// 0 = (low x, low y), 1 = (high x, low y), 2 = (low x, high y),
/// 3 = (high x, high y); {0, 3} and {1, 2} are the diagonal pairs.
inline Layout four_room_layout(double side_m = 50.0, double wall_loss_db = 10.0,
                               bool with_walls = true) {
  Layout l;
  l.width_m = side_m;
  l.height_m = side_m;
  const double h = side_m / 2.0;
  if (with_walls) {
    l.internal_walls.push_back({{h, 0.0}, {h, side_m}, wall_loss_db});
    l.internal_walls.push_back({{0.0, h}, {side_m, h}, wall_loss_db});
  }
  l.rooms = {{0.0, 0.0, h, h}, {h, 0.0, side_m, h}, {0.0, h, h, side_m}, {h, h, side_m, side_m}};
  return l;
}

namespace detail {

inline int orientation(const Position& a, const Position& b, const Position& c) {
  const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

inline bool on_segment(const Position& a, const Position& b, const Position& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace detail

/// Closed-segment intersection test. Touching at an endpoint and collinear
/// overlap both count as an intersection.
inline bool segments_intersect(const Position& p1, const Position& p2, const Position& q1,
                               const Position& q2) {
  using detail::on_segment;
  using detail::orientation;
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

/// Number of wall segments crossed by the segment a-b. Each wall counts at
/// most once, so passing through a wall endpoint is a single crossing.
inline int wall_count(const Position& a, const Position& b, const Layout& layout) {
  int n = 0;
  for (const auto& w : layout.internal_walls)
    if (segments_intersect(a, b, w.from, w.to)) ++n;
  return n;
}

inline double wall_loss_db(const Position& a, const Position& b, const Layout& layout) {
  double loss = 0.0;
  for (const auto& w : layout.internal_walls)
    if (segments_intersect(a, b, w.from, w.to)) loss += w.loss_db;
  return loss;
}

/// PL(d) = slope * log10(d) + intercept + freq_coeff * log10(fc / 5 GHz)
struct PathLossCoeffs {
  double slope{18.7};
  double intercept{46.8};
  double freq_coeff{20.0};
};

struct PropagationParams {
  double carrier_freq_ghz{5.0};
  PathLossCoeffs los{18.7, 46.8, 20.0};
  PathLossCoeffs nlos{36.8, 43.8, 20.0};
  double shadowing_sigma_los_db{3.0};
  double shadowing_sigma_nlos_db{4.0};
  bool shadowing{false};
  double min_distance_m{1.0};

  void validate() const {
    if (!(carrier_freq_ghz > 0.0))
      throw std::invalid_argument("propagation: carrier_freq_ghz must be positive");
    if (!(los.slope > 0.0) || !(nlos.slope > 0.0))
      throw std::invalid_argument("propagation: path-loss slopes must be positive");
    if (!(min_distance_m > 0.0))
      throw std::invalid_argument("propagation: min_distance_m must be positive");
    if (shadowing_sigma_los_db < 0.0 || shadowing_sigma_nlos_db < 0.0)
      throw std::invalid_argument("propagation: shadowing sigmas must be >= 0");
  }
};

inline double model_path_loss_db(double d_m, const PathLossCoeffs& c, double fc_ghz) {
  return c.slope * std::log10(d_m) + c.intercept + c.freq_coeff * std::log10(fc_ghz / 5.0);
}

/// Path gain in dB (negative path loss). `shadowing_draw` is a standard
/// normal sample scaled by the LOS or NLOS sigma; it is ignored unless
/// shadowing is enabled in `params`.
inline double path_gain_db(const Position& tx, const Position& rx, const Layout& layout,
                           const PropagationParams& params,
                           std::optional<double> shadowing_draw = std::nullopt) {
  const double d = std::max(distance(tx, rx), params.min_distance_m);
  const int walls = wall_count(tx, rx, layout);
  const bool los = walls == 0;
  double pl = model_path_loss_db(d, los ? params.los : params.nlos, params.carrier_freq_ghz);
  pl += wall_loss_db(tx, rx, layout);
  if (params.shadowing && shadowing_draw)
    pl += *shadowing_draw * (los ? params.shadowing_sigma_los_db : params.shadowing_sigma_nlos_db);
  return -pl;
}

/// Union of rectangles that UEs are dropped into.
struct Region {
  std::vector<Rect> parts;

  double area() const {
    double a = 0.0;
    for (const auto& r : parts) a += r.area();
    return a;
  }
  bool contains(const Position& p) const {
    return std::any_of(parts.begin(), parts.end(), [&](const Rect& r) { return r.contains(p); });
  }
};

inline Region whole_building(const Layout& layout) {
  return Region{{Rect{0.0, 0.0, layout.width_m, layout.height_m}}};
}

inline Region rooms_region(const Layout& layout, const std::vector<std::size_t>& room_ids) {
  Region r;
  for (auto id : room_ids) {
    if (id >= layout.rooms.size())
      throw std::invalid_argument("region: room index " + std::to_string(id) + " out of range");
    r.parts.push_back(layout.rooms[id]);
  }
  return r;
}

/// n i.i.d. uniform positions over the region (area-weighted choice of
/// rectangle, then uniform inside it).
template <class Rng>
std::vector<Position> place_ues(std::size_t n, const Region& region, Rng& rng) {
  if (!(region.area() > 0.0)) throw std::invalid_argument("place_ues: empty service region");
  std::vector<double> weights;
  weights.reserve(region.parts.size());
  for (const auto& r : region.parts) weights.push_back(r.area());
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Position> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Rect& r = region.parts.size() == 1 ? region.parts.front() : region.parts[pick(rng)];
    out.push_back({r.x0 + unit(rng) * (r.x1 - r.x0), r.y0 + unit(rng) * (r.y1 - r.y0)});
  }
  return out;
}

}  // namespace coshare
