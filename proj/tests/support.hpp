#pragma once

// Test-side oracles and random generators. The oracles are deliberately
// brute force and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvtk/codec.hpp"
#include "mvtk/compiler.hpp"
#include "mvtk/geometry.hpp"
#include "mvtk/metrics.hpp"
#include "mvtk/random.hpp"

namespace oracle {

// IoU by counting unit cells [x, x+1) x [y, y+1) covered by each box.
inline double box_iou_cells(const mvtk::NormalizedBox2D& a, const mvtk::NormalizedBox2D& b) {
  const int x0 = std::min(a.x1, b.x1), x1 = std::max(a.x2, b.x2);
  const int y0 = std::min(a.y1, b.y1), y1 = std::max(a.y2, b.y2);
  long inter = 0, uni = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const bool in_a = x >= a.x1 && x < a.x2 && y >= a.y1 && y < a.y2;
      const bool in_b = x >= b.x1 && x < b.x2 && y >= b.y1 && y < b.y2;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  if (uni == 0) return a.x1 == b.x1 && a.y1 == b.y1 && a.x2 == b.x2 && a.y2 == b.y2 ? 1.0 : 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// IoU by counting half-unit voxels, so odd lengths stay on the lattice.
inline double box3d_iou_voxels(const mvtk::Box3D& a, const mvtk::Box3D& b) {
  int lo_a[3], hi_a[3], lo_b[3], hi_b[3], lo[3], hi[3];
  for (int i = 0; i < 3; ++i) {
    lo_a[i] = 2 * a.center[i] - a.lengths[i];
    hi_a[i] = 2 * a.center[i] + a.lengths[i];
    lo_b[i] = 2 * b.center[i] - b.lengths[i];
    hi_b[i] = 2 * b.center[i] + b.lengths[i];
    lo[i] = std::min(lo_a[i], lo_b[i]);
    hi[i] = std::max(hi_a[i], hi_b[i]);
  }
  long inter = 0, uni = 0;
  for (int z = lo[2]; z < hi[2]; ++z)
    for (int y = lo[1]; y < hi[1]; ++y)
      for (int x = lo[0]; x < hi[0]; ++x) {
        const int p[3] = {x, y, z};
        bool in_a = true, in_b = true;
        for (int i = 0; i < 3; ++i) {
          in_a = in_a && p[i] >= lo_a[i] && p[i] < hi_a[i];
          in_b = in_b && p[i] >= lo_b[i] && p[i] < hi_b[i];
        }
        inter += in_a && in_b;
        uni += in_a || in_b;
      }
  if (uni == 0) return a == b ? 1.0 : 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Mann-Whitney AUC by enumerating every (positive, negative) pair.
inline double auc_pairs(const std::vector<mvtk::ScoredBinary>& s) {
  std::uint64_t twice = 0, pairs = 0;
  for (const auto& p : s) {
    if (p.label != 1) continue;
    for (const auto& n : s) {
      if (n.label != 0) continue;
      ++pairs;
      if (p.score > n.score) twice += 2;
      else if (p.score == n.score) twice += 1;
    }
  }
  return static_cast<double>(twice) / static_cast<double>(2 * pairs);
}

// LCS length by memoized recursion over suffixes.
inline std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size() || j == b.size()) return 0;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::size_t v = a[i] == b[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
    memo[key] = v;
    return v;
  };
  return go(0, 0);
}

struct Vec {
  double x, y;
};

// Closed ring walked from vertex 0 with cumulative arc length.
struct Ring {
  std::vector<Vec> pts;
  std::vector<double> cum;  // cum[i] = arc length at pts[i]; cum.back() = perimeter
  double perimeter() const { return cum.back(); }
};

inline Ring make_ring(std::vector<Vec> pts) {
  Ring r{std::move(pts), {0.0}};
  for (std::size_t i = 0; i < r.pts.size(); ++i) {
    const Vec a = r.pts[i], b = r.pts[(i + 1) % r.pts.size()];
    r.cum.push_back(r.cum.back() + std::hypot(b.x - a.x, b.y - a.y));
  }
  return r;
}

// Arc position of the boundary point nearest to q.
inline double arc_position(const Ring& r, Vec q) {
  double best_d = INFINITY, best_s = 0.0;
  for (std::size_t i = 0; i < r.pts.size(); ++i) {
    const Vec a = r.pts[i], b = r.pts[(i + 1) % r.pts.size()];
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 == 0 ? 0.0 : ((q.x - a.x) * dx + (q.y - a.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
    const double px = a.x + t * dx, py = a.y + t * dy;
    const double d = std::hypot(q.x - px, q.y - py);
    if (d < best_d) {
      best_d = d;
      best_s = r.cum[i] + t * std::sqrt(len2);
    }
  }
  return best_s;
}

// Boundary point at arc length s (taken modulo the perimeter).
inline Vec ring_point(const Ring& r, double s) {
  s = std::fmod(s, r.perimeter());
  if (s < 0) s += r.perimeter();
  for (std::size_t i = 0; i < r.pts.size(); ++i) {
    const double len = r.cum[i + 1] - r.cum[i];
    if (s <= r.cum[i + 1] && len > 0) {
      const double t = (s - r.cum[i]) / len;
      const Vec a = r.pts[i], b = r.pts[(i + 1) % r.pts.size()];
      return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }
  }
  return r.pts.front();
}

// Arc position of the boundary point nearest the origin.
inline double arc_nearest_origin(const Ring& r) { return arc_position(r, {0.0, 0.0}); }

// Shoelace with y pointing down: clockwise on screen is negative.
inline double screen_signed_area(const std::vector<Vec>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec a = p[i], b = p[(i + 1) % p.size()];
    s += a.x * (-b.y) - b.x * (-a.y);
  }
  return s / 2.0;
}

}  // namespace oracle

namespace gen {

inline mvtk::NormalizedBox2D box(mvtk::SeededRng& rng, int max = mvtk::kGridMax) {
  int x1 = rng.between(0, max), x2 = rng.between(0, max), y1 = rng.between(0, max), y2 = rng.between(0, max);
  if (x1 > x2) std::swap(x1, x2);
  if (y1 > y2) std::swap(y1, y2);
  return {rng.between(0, 30), x1, y1, x2, y2};
}

inline mvtk::Box3D box3d(mvtk::SeededRng& rng, int max_center = mvtk::kGridMax, int max_len = mvtk::kGridMax) {
  mvtk::Box3D b;
  for (int i = 0; i < 3; ++i) {
    b.center[i] = rng.between(0, max_center);
    b.lengths[i] = rng.between(0, max_len);
  }
  return b;
}

inline mvtk::GridPoint2 point(mvtk::SeededRng& rng) { return {rng.between(0, 1000), rng.between(0, 1000)}; }

inline mvtk::CanonicalPolygon polygon(mvtk::SeededRng& rng) {
  mvtk::CanonicalPolygon p;
  for (auto& q : p.points) q = point(rng);
  return p;
}

inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> v = {"Atelectasis", "Cardiomegaly", "Edema", "Pleural Effusion",
                                             "Pneumonia",   "Pneumothorax", "Pulmonary Edema"};
  return v;
}

inline std::string sentence(mvtk::SeededRng& rng) {
  static const char* kWords[] = {"the", "heart", "is", "enlarged", "no", "effusion", "lungs", "are", "clear",
                                 "mild", "edema", "at", "base", "left", "right", "[12, 40]", "(3)", "Yes."};
  std::string s;
  const int n = rng.between(1, 20);
  for (int i = 0; i < n; ++i) s += (i ? " " : "") + std::string(kWords[rng.below(std::size(kWords))]);
  return s;
}

// A structured answer for `kind` in canonical form (box lists sorted).
inline mvtk::Answer answer(mvtk::SeededRng& rng, mvtk::TaskKind kind) {
  using mvtk::TaskKind;
  switch (kind) {
    case TaskKind::classification_binary: return rng.coin();
    case TaskKind::classification_multilabel: {
      mvtk::LabelSet s;
      for (const auto& l : vocabulary())
        if (rng.coin()) s.insert(l);
      return s;
    }
    case TaskKind::grounding_box2d: {
      mvtk::BoxList list;
      const int n = rng.between(1, 4);
      for (int i = 0; i < n; ++i) list.push_back(box(rng));
      std::sort(list.begin(), list.end());
      return list;
    }
    case TaskKind::grounding_box3d: return box3d(rng);
    case TaskKind::grounding_point: return point(rng);
    case TaskKind::segmentation_polygon: return polygon(rng);
    case TaskKind::report:
    case TaskKind::vqa_freeform: return mvtk::FreeText{sentence(rng)};
  }
  return false;
}

// Simple star-shaped polygon in pixel space: vertices at sorted random angles.
inline mvtk::RawPolygon star_polygon(mvtk::SeededRng& rng, mvtk::Extent extent, int min_vertices = 3,
                                     int max_vertices = 12) {
  const int n = rng.between(min_vertices, max_vertices);
  const double cx = extent.width * (0.3 + 0.4 * rng.unit());
  const double cy = extent.height * (0.3 + 0.4 * rng.unit());
  const double rmax = 0.28 * std::min(extent.width, extent.height);
  std::vector<double> angles;
  for (int i = 0; i < n; ++i) angles.push_back(2.0 * std::numbers::pi * rng.unit());
  std::sort(angles.begin(), angles.end());
  mvtk::RawPolygon raw;
  raw.extent = extent;
  for (double t : angles) {
    const double r = rmax * (0.35 + 0.65 * rng.unit());
    raw.points.push_back({cx + r * std::cos(t), cy + r * std::sin(t)});
  }
  if (rng.coin()) std::reverse(raw.points.begin(), raw.points.end());
  return raw;
}

inline mvtk::Extent extent(mvtk::SeededRng& rng) { return {rng.between(64, 2048), rng.between(64, 2048)}; }

}  // namespace gen

namespace fixture {

// Gold-echo prediction lines for every triplet of `task`.
inline std::string echo_predictions(const std::vector<mvtk::InstructionTriplet>& triplets, mvtk::TaskKind task) {
  std::string out;
  for (const auto& t : triplets) {
    if (t.task != task) continue;
    out += nlohmann::json{{"sample_id", t.sample_id}, {"raw_text", t.target.text}}.dump() + "\n";
  }
  return out;
}

// A 1x1 box in a grid corner that overlaps none of the gold boxes.
inline mvtk::NormalizedBox2D disjoint_box(const mvtk::BoxList& gold) {
  const mvtk::NormalizedBox2D corners[] = {{0, 0, 0, 1, 1}, {0, 999, 0, 1000, 1}, {0, 0, 999, 1, 1000}, {0, 999, 999, 1000, 1000}};
  for (auto c : corners) {
    c.cls_id = gold.front().cls_id;
    if (std::all_of(gold.begin(), gold.end(), [&](const auto& g) { return mvtk::iou_box2d(c, g) == 0.0; })) return c;
  }
  throw std::runtime_error("no disjoint corner box");
}

// Box predictions where every other sample (in sample_id order) is moved to
// zero overlap.
inline std::string corrupted_half_predictions(const std::vector<mvtk::InstructionTriplet>& triplets) {
  std::string out;
  std::size_t k = 0;
  for (const auto& t : triplets) {
    if (t.task != mvtk::TaskKind::grounding_box2d) continue;
    std::string text = t.target.text;
    if (k++ % 2 == 1) {
      const auto box = disjoint_box(std::get<mvtk::BoxList>(t.gold));
      text = mvtk::render_box2d(std::vector{box}).text;
    }
    out += nlohmann::json{{"sample_id", t.sample_id}, {"raw_text", text}}.dump() + "\n";
  }
  return out;
}

}  // namespace fixture
