#include "mvtk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>

#include "mvtk/error.hpp"
#include "mvtk/raster.hpp"

namespace mvtk {

bool in_grid(int v) noexcept { return v >= 0 && v <= kGridMax; }
bool in_grid(GridPoint2 p) noexcept { return in_grid(p.x) && in_grid(p.y); }

void validate(GridPoint2 p) {
  if (!in_grid(p))
    throw Error(ErrorKind::range, "grid point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                      ") outside [0, 1000]");
}

void validate(const NormalizedBox2D& box) {
  if (box.cls_id < 0) throw Error(ErrorKind::range, "negative class id " + std::to_string(box.cls_id));
  if (!in_grid(box.x1) || !in_grid(box.y1) || !in_grid(box.x2) || !in_grid(box.y2))
    throw Error(ErrorKind::range, "box corner outside [0, 1000]");
  if (box.x1 > box.x2 || box.y1 > box.y2)
    throw Error(ErrorKind::validation, "box corners out of order (need x1 <= x2 and y1 <= y2)");
}

void validate(const Box3D& box) {
  for (int axis = 0; axis < 3; ++axis) {
    if (!in_grid(box.center[axis])) throw Error(ErrorKind::range, "3D box center outside [0, 1000]");
    if (box.lengths[axis] < 0) throw Error(ErrorKind::range, "negative 3D box length");
    if (box.lengths[axis] > kGridMax) throw Error(ErrorKind::range, "3D box length above 1000");
  }
}

void validate(Extent extent) {
  if (extent.width <= 0 || extent.height <= 0)
    throw Error(ErrorKind::invalid_extent, "image extent must be positive, got " + std::to_string(extent.width) +
                                               "x" + std::to_string(extent.height));
}

std::vector<std::string> box3d_extent_issues(const Box3D& box) {
  static constexpr const char* kAxis[3] = {"x", "y", "z"};
  std::vector<std::string> issues;
  for (int axis = 0; axis < 3; ++axis) {
    // Doubled coordinates keep half-lengths exact.
    const long lo = 2L * box.center[axis] - box.lengths[axis];
    const long hi = 2L * box.center[axis] + box.lengths[axis];
    if (lo < 0) issues.push_back(std::string(kAxis[axis]) + " min below 0");
    if (hi > 2L * kGridMax) issues.push_back(std::string(kAxis[axis]) + " max above 1000");
  }
  return issues;
}

namespace {

double scale_axis(double coord, int size) { return coord * kGridMax / size; }

// Round half up, then clamp into the grid.
int round_to_grid(double scaled) {
  const int rounded = static_cast<int>(std::floor(scaled + 0.5));
  return std::clamp(rounded, 0, kGridMax);
}

}  // namespace

GridPoint2 normalize_point(PixelPoint p, Extent extent) {
  validate(extent);
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0 || p.y < 0 || p.x > extent.width ||
      p.y > extent.height) {
    throw Error(ErrorKind::range, "pixel point outside the image");
  }
  return {round_to_grid(scale_axis(p.x, extent.width)), round_to_grid(scale_axis(p.y, extent.height))};
}

PixelPoint denormalize_point(GridPoint2 g, Extent extent) {
  validate(extent);
  return {static_cast<double>(g.x) * extent.width / kGridMax, static_cast<double>(g.y) * extent.height / kGridMax};
}

double iou_box2d(const NormalizedBox2D& a, const NormalizedBox2D& b) noexcept {
  const std::int64_t area_a = std::int64_t{a.x2 - a.x1} * (a.y2 - a.y1);
  const std::int64_t area_b = std::int64_t{b.x2 - b.x1} * (b.y2 - b.y1);
  const std::int64_t iw = std::max(0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const std::int64_t ih = std::max(0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const std::int64_t inter = iw * ih;
  const std::int64_t uni = area_a + area_b - inter;
  if (uni == 0) {
    const bool same = a.x1 == b.x1 && a.y1 == b.y1 && a.x2 == b.x2 && a.y2 == b.y2;
    return same ? 1.0 : 0.0;
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double iou_box3d(const Box3D& a, const Box3D& b) noexcept {
  // Work in doubled units so center +- length/2 stays integral.
  std::int64_t vol_a = 1, vol_b = 1, inter = 1;
  for (int axis = 0; axis < 3; ++axis) {
    const std::int64_t a_lo = 2LL * a.center[axis] - a.lengths[axis];
    const std::int64_t a_hi = 2LL * a.center[axis] + a.lengths[axis];
    const std::int64_t b_lo = 2LL * b.center[axis] - b.lengths[axis];
    const std::int64_t b_hi = 2LL * b.center[axis] + b.lengths[axis];
    vol_a *= a_hi - a_lo;
    vol_b *= b_hi - b_lo;
    inter *= std::max<std::int64_t>(0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
  }
  const std::int64_t uni = vol_a + vol_b - inter;
  if (uni == 0) return a == b ? 1.0 : 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

bool contains(const NormalizedBox2D& box, GridPoint2 p) noexcept {
  return p.x >= box.x1 && p.x <= box.x2 && p.y >= box.y1 && p.y <= box.y2;
}

namespace {

template <typename P>
double signed_area_impl(std::span<const P> ring) noexcept {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const P& p = ring[i];
    const P& q = ring[(i + 1) % n];
    twice += static_cast<double>(q.x) * p.y - static_cast<double>(p.x) * q.y;
  }
  return twice / 2.0;
}

double cross(PixelPoint o, PixelPoint a, PixelPoint b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(PixelPoint p, PixelPoint a, PixelPoint b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_touch(PixelPoint a, PixelPoint b, PixelPoint c, PixelPoint d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(a, c, d)) return true;
  if (d2 == 0 && on_segment(b, c, d)) return true;
  if (d3 == 0 && on_segment(c, a, b)) return true;
  if (d4 == 0 && on_segment(d, a, b)) return true;
  return false;
}

double distance(PixelPoint a, PixelPoint b) { return std::hypot(b.x - a.x, b.y - a.y); }

}  // namespace

double signed_area(std::span<const GridPoint2> ring) noexcept { return signed_area_impl(ring); }
double signed_area(std::span<const PixelPoint> ring) noexcept { return signed_area_impl(ring); }

double perimeter(std::span<const PixelPoint> ring) noexcept {
  double total = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) total += distance(ring[i], ring[(i + 1) % ring.size()]);
  return total;
}

bool self_intersects(std::span<const PixelPoint> ring) {
  const std::size_t n = ring.size();
  if (n < 4) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Adjacent edges share a vertex by construction.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_touch(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n])) return true;
    }
  }
  return false;
}

namespace {

struct BoundaryWalk {
  std::vector<PixelPoint> ring;
  std::vector<double> start_arc;  // arc length at the start of each edge
  double total = 0.0;

  explicit BoundaryWalk(std::vector<PixelPoint> points) : ring(std::move(points)) {
    start_arc.reserve(ring.size());
    for (std::size_t i = 0; i < ring.size(); ++i) {
      start_arc.push_back(total);
      total += distance(ring[i], ring[(i + 1) % ring.size()]);
    }
  }

  PixelPoint at(double arc) const {
    arc = std::fmod(arc, total);
    if (arc < 0) arc += total;
    auto it = std::upper_bound(start_arc.begin(), start_arc.end(), arc);
    std::size_t edge = static_cast<std::size_t>(std::distance(start_arc.begin(), it)) - 1;
    // Skip zero-length edges so interpolation never divides by zero.
    const std::size_t n = ring.size();
    PixelPoint a = ring[edge];
    PixelPoint b = ring[(edge + 1) % n];
    const double len = distance(a, b);
    if (len == 0.0) return a;
    const double t = std::clamp((arc - start_arc[edge]) / len, 0.0, 1.0);
    return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
  }
};

// Arc position of the boundary point nearest to the origin. Ties within a
// relative 1e-12 go to the smaller y, then the smaller x.
double nearest_to_origin_arc(const BoundaryWalk& walk) {
  const std::size_t n = walk.ring.size();
  double best_d2 = 0.0;
  PixelPoint best_p{};
  double best_arc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const PixelPoint a = walk.ring[i];
    const PixelPoint b = walk.ring[(i + 1) % n];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(-(a.x * dx + a.y * dy) / len2, 0.0, 1.0);
    const PixelPoint p{a.x + t * dx, a.y + t * dy};
    const double d2 = p.x * p.x + p.y * p.y;
    bool better = i == 0;
    if (!better) {
      const double tol = 1e-12 * std::max(1.0, best_d2);
      better = d2 < best_d2 - tol;
      if (!better && std::abs(d2 - best_d2) <= tol) better = p.y < best_p.y || (p.y == best_p.y && p.x < best_p.x);
    }
    if (better) {
      best_d2 = d2;
      best_p = p;
      best_arc = walk.start_arc[i] + t * std::sqrt(len2);
    }
  }
  return best_arc;
}

}  // namespace

CanonicalPolygon canonicalize_polygon(const RawPolygon& raw) {
  validate(raw.extent);
  if (raw.points.size() < 3) throw Error(ErrorKind::invalid_argument, "polygon needs at least 3 points");
  for (const PixelPoint& p : raw.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0 || p.y < 0 || p.x > raw.extent.width ||
        p.y > raw.extent.height)
      throw Error(ErrorKind::range, "polygon vertex outside the image");
  }

  // Resampling happens in continuous grid coordinates so that the result does
  // not depend on the image aspect ratio.
  std::vector<PixelPoint> ring;
  ring.reserve(raw.points.size());
  for (const PixelPoint& p : raw.points)
    ring.push_back({scale_axis(p.x, raw.extent.width), scale_axis(p.y, raw.extent.height)});
  if (signed_area(std::span<const PixelPoint>(ring)) > 0.0) std::reverse(ring.begin(), ring.end());

  BoundaryWalk walk(std::move(ring));
  if (!(walk.total > 0.0)) throw Error(ErrorKind::degenerate, "polygon has zero perimeter");

  std::set<std::pair<double, double>> distinct;
  for (const PixelPoint& p : walk.ring) distinct.emplace(p.x, p.y);
  if (distinct.size() < 3) throw Error(ErrorKind::degenerate, "polygon needs at least 3 distinct points");

  const double start = nearest_to_origin_arc(walk);
  const double step = walk.total / static_cast<double>(kPolygonPoints);

  CanonicalPolygon out;
  for (std::size_t k = 0; k < kPolygonPoints; ++k) {
    const PixelPoint p = walk.at(start + step * static_cast<double>(k));
    out.points[k] = {round_to_grid(p.x), round_to_grid(p.y)};
  }
  return out;
}

std::vector<std::string> canonical_violations(const CanonicalPolygon& polygon) {
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < kPolygonPoints; ++i) {
    if (!in_grid(polygon.points[i])) issues.push_back("point " + std::to_string(i) + " outside [0, 1000]");
  }
  if (signed_area(std::span<const GridPoint2>(polygon.points)) > 0.0) issues.push_back("counter-clockwise order");

  // The start is the nearest boundary point before rounding; after rounding
  // another vertex may come closer by up to one grid unit.
  auto dist = [](GridPoint2 p) { return std::hypot(static_cast<double>(p.x), static_cast<double>(p.y)); };
  const double d0 = dist(polygon.points[0]);
  double nearest = d0;
  for (const GridPoint2& p : polygon.points) nearest = std::min(nearest, dist(p));
  if (d0 > nearest + 1.0) issues.push_back("first point is not the point nearest the origin");
  return issues;
}

namespace {

template <typename Score>
double mask_score(const CanonicalPolygon& a, const CanonicalPolygon& b, int resolution, Score score) {
  if (resolution < kMinRasterResolution)
    throw Error(ErrorKind::invalid_argument, "raster resolution must be at least 64");
  const Mask ma = rasterize(a.points, resolution);
  const Mask mb = rasterize(b.points, resolution);
  const OverlapCounts c = overlap(ma, mb);
  if (c.a + c.b == 0) {
    std::set<GridPoint2> sa(a.points.begin(), a.points.end());
    std::set<GridPoint2> sb(b.points.begin(), b.points.end());
    return sa == sb ? 1.0 : 0.0;
  }
  return score(c);
}

}  // namespace

double polygon_dice(const CanonicalPolygon& a, const CanonicalPolygon& b, int resolution) {
  return mask_score(a, b, resolution, [](const OverlapCounts& c) {
    return 2.0 * static_cast<double>(c.intersection) / static_cast<double>(c.a + c.b);
  });
}

double polygon_iou(const CanonicalPolygon& a, const CanonicalPolygon& b, int resolution) {
  return mask_score(a, b, resolution, [](const OverlapCounts& c) {
    return static_cast<double>(c.intersection) / static_cast<double>(c.a + c.b - c.intersection);
  });
}

}  // namespace mvtk
