#pragma once

// Geometric primitives on the normalized 0..1000 annotation grid.
//
// Conventions:
//  * Image coordinates: origin top-left, x to the right, y downward.
//  * Grid coordinates are integers in [0, 1000] on both axes, independent of
//    the image aspect ratio.
//  * "Clockwise" is judged as seen on screen (y down). signed_area() flips
//    the y axis before applying the shoelace formula, so a clockwise walk has
//    a non-positive signed area.

#include <array>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mvtk {

inline constexpr int kGridMax = 1000;
inline constexpr std::size_t kPolygonPoints = 25;
inline constexpr int kMinRasterResolution = 64;

struct GridPoint2 {
  int x = 0;
  int y = 0;
  auto operator<=>(const GridPoint2&) const = default;
};

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const PixelPoint&) const = default;
};

// Image size in pixels.
struct Extent {
  int width = 0;
  int height = 0;
  bool operator==(const Extent&) const = default;
};

struct NormalizedBox2D {
  int cls_id = 0;
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;
  auto operator<=>(const NormalizedBox2D&) const = default;
};

// Axis-aligned 3D box given by its center and full edge lengths, in grid units.
struct Box3D {
  std::array<int, 3> center{};
  std::array<int, 3> lengths{};
  auto operator<=>(const Box3D&) const = default;
};

// Exactly 25 grid points. Whether the points also satisfy the canonical
// ordering rules is checked by canonical_violations(); polygons parsed from
// model output are allowed to violate them.
struct CanonicalPolygon {
  std::array<GridPoint2, kPolygonPoints> points{};
  auto operator<=>(const CanonicalPolygon&) const = default;
};

struct RawPolygon {
  std::vector<PixelPoint> points;
  Extent extent;
};

bool in_grid(int v) noexcept;
bool in_grid(GridPoint2 p) noexcept;

// Throw Error(range) / Error(validation) when the value breaks its invariants.
void validate(GridPoint2 p);
void validate(const NormalizedBox2D& box);
void validate(const Box3D& box);
void validate(Extent extent);

// Faces of a valid Box3D that stick out of the grid. The box itself is never
// clamped by the library; callers decide what to do with the report.
std::vector<std::string> box3d_extent_issues(const Box3D& box);

GridPoint2 normalize_point(PixelPoint p, Extent extent);
PixelPoint denormalize_point(GridPoint2 g, Extent extent);

double iou_box2d(const NormalizedBox2D& a, const NormalizedBox2D& b) noexcept;
double iou_box3d(const Box3D& a, const Box3D& b) noexcept;

// Point inside a box, borders included.
bool contains(const NormalizedBox2D& box, GridPoint2 p) noexcept;

double signed_area(std::span<const GridPoint2> ring) noexcept;
double signed_area(std::span<const PixelPoint> ring) noexcept;
double perimeter(std::span<const PixelPoint> ring) noexcept;
bool self_intersects(std::span<const PixelPoint> ring);

CanonicalPolygon canonicalize_polygon(const RawPolygon& raw);

// Empty when the polygon satisfies every canonical-form rule.
std::vector<std::string> canonical_violations(const CanonicalPolygon& polygon);

// Raster overlap scores on the 0..1000 grid; resolution >= 64.
double polygon_dice(const CanonicalPolygon& a, const CanonicalPolygon& b, int resolution);
double polygon_iou(const CanonicalPolygon& a, const CanonicalPolygon& b, int resolution);

}  // namespace mvtk
