#include <cmath>

#include "doctest.h"
#include "mvtk/error.hpp"
#include "mvtk/geometry.hpp"
#include "support.hpp"

using namespace mvtk;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an mvtk::Error");
  return ErrorKind::io;
}

oracle::Ring clockwise_grid_ring(const RawPolygon& raw) {
  std::vector<oracle::Vec> pts;
  for (const auto& p : raw.points)
    pts.push_back({p.x * 1000.0 / raw.extent.width, p.y * 1000.0 / raw.extent.height});
  if (oracle::screen_signed_area(pts) > 0) std::reverse(pts.begin(), pts.end());
  return oracle::make_ring(pts);
}

}  // namespace

TEST_CASE("normalize_point examples") {
  CHECK(normalize_point({448, 448}, {896, 896}) == GridPoint2{500, 500});
  CHECK(normalize_point({0, 0}, {896, 896}) == GridPoint2{0, 0});
  CHECK(normalize_point({320, 120}, {640, 480}) == GridPoint2{500, 250});
  CHECK(normalize_point({896, 896}, {896, 896}) == GridPoint2{1000, 1000});
}

TEST_CASE("normalize_point rounds half up") {
  // 1/2000 of the width is exactly half a grid unit.
  CHECK(normalize_point({1, 0}, {2000, 10}).x == 1);
  CHECK(normalize_point({3, 0}, {2000, 10}).x == 2);
}

TEST_CASE("normalize_point errors") {
  CHECK(kind_of([] { normalize_point({-1, 0}, {10, 10}); }) == ErrorKind::range);
  CHECK(kind_of([] { normalize_point({0, 10.5}, {10, 10}); }) == ErrorKind::range);
  CHECK(kind_of([] { normalize_point({0, 0}, {0, 10}); }) == ErrorKind::invalid_extent);
  CHECK(kind_of([] { denormalize_point({0, 0}, {10, 0}); }) == ErrorKind::invalid_extent);
}

TEST_CASE("denormalize_point examples") {
  CHECK(denormalize_point({1000, 1000}, {896, 896}) == PixelPoint{896, 896});
  CHECK(denormalize_point({0, 0}, {123, 45}) == PixelPoint{0, 0});
  CHECK(denormalize_point({500, 250}, {640, 480}) == PixelPoint{320, 120});
}

TEST_CASE("normalize/denormalize round trip stays within one grid unit") {
  SeededRng rng(42);
  for (int i = 0; i < 5000; ++i) {
    const Extent e = gen::extent(rng);
    const PixelPoint p{rng.unit() * e.width, rng.unit() * e.height};
    const GridPoint2 g = normalize_point(p, e);
    const GridPoint2 back = normalize_point(denormalize_point(g, e), e);
    CHECK(std::abs(back.x - g.x) <= 1);
    CHECK(std::abs(back.y - g.y) <= 1);
  }
}

TEST_CASE("iou_box2d examples") {
  const NormalizedBox2D a{0, 0, 0, 10, 10}, b{0, 5, 5, 15, 15};
  CHECK(iou_box2d(a, a) == 1.0);
  CHECK(iou_box2d(a, {0, 20, 20, 30, 30}) == 0.0);
  CHECK(iou_box2d(a, b) == doctest::Approx(25.0 / 175.0).epsilon(1e-12));
}

TEST_CASE("iou_box2d degenerate conventions") {
  const NormalizedBox2D line{0, 5, 5, 5, 20};
  CHECK(iou_box2d(line, line) == 1.0);
  CHECK(iou_box2d(line, {0, 6, 5, 6, 20}) == 0.0);
  CHECK(iou_box2d(line, {0, 0, 0, 10, 30}) == 0.0);
}

TEST_CASE("iou_box2d ignores the class id") { CHECK(iou_box2d({1, 0, 0, 4, 4}, {7, 0, 0, 4, 4}) == 1.0); }

TEST_CASE("iou_box2d matches the unit-cell oracle") {
  SeededRng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const auto a = gen::box(rng, 120), b = gen::box(rng, 120);
    CHECK(iou_box2d(a, b) == doctest::Approx(oracle::box_iou_cells(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("iou_box2d is symmetric and bounded") {
  SeededRng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const auto a = gen::box(rng), b = gen::box(rng);
    const double v = iou_box2d(a, b);
    REQUIRE(v == iou_box2d(b, a));
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
    if (a.x2 > a.x1 && a.y2 > a.y1) REQUIRE(iou_box2d(a, a) == 1.0);
  }
}

TEST_CASE("iou_box3d one-third overlap") {
  const Box3D a{{0, 0, 0}, {2, 2, 2}}, b{{1, 0, 0}, {2, 2, 2}};
  CHECK(iou_box3d(a, b) == 1.0 / 3.0);
  CHECK(oracle::box3d_iou_voxels(a, b) == 1.0 / 3.0);
}

TEST_CASE("iou_box3d basic cases") {
  const Box3D a{{100, 100, 100}, {10, 20, 30}};
  CHECK(iou_box3d(a, a) == 1.0);
  CHECK(iou_box3d(a, {{500, 500, 500}, {10, 10, 10}}) == 0.0);
  const Box3D flat{{10, 10, 10}, {0, 4, 4}};
  CHECK(iou_box3d(flat, flat) == 1.0);
  CHECK(iou_box3d(flat, {{11, 10, 10}, {0, 4, 4}}) == 0.0);
}

TEST_CASE("iou_box3d matches the voxel oracle, odd lengths included") {
  SeededRng rng(3);
  for (int i = 0; i < 400; ++i) {
    const auto a = gen::box3d(rng, 12, 9), b = gen::box3d(rng, 12, 9);
    CHECK(iou_box3d(a, b) == doctest::Approx(oracle::box3d_iou_voxels(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("iou_box3d is symmetric and bounded") {
  SeededRng rng(4);
  for (int i = 0; i < 10000; ++i) {
    const auto a = gen::box3d(rng), b = gen::box3d(rng);
    const double v = iou_box3d(a, b);
    REQUIRE(v == iou_box3d(b, a));
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
  }
}

TEST_CASE("Box3D validation reports rather than clamps extents") {
  const Box3D b{{5, 500, 500}, {20, 10, 10}};
  CHECK_NOTHROW(validate(b));
  CHECK_FALSE(box3d_extent_issues(b).empty());
  CHECK(box3d_extent_issues({{500, 500, 500}, {20, 10, 10}}).empty());
  CHECK(kind_of([] { validate(Box3D{{5, 5, 5}, {-1, 2, 2}}); }) == ErrorKind::range);
  CHECK(kind_of([] { validate(Box3D{{1001, 5, 5}, {1, 2, 2}}); }) == ErrorKind::range);
}

TEST_CASE("box validation") {
  CHECK_NOTHROW(validate(NormalizedBox2D{0, 0, 0, 1000, 1000}));
  CHECK_THROWS_AS(validate(NormalizedBox2D{0, 10, 0, 5, 10}), Error);
  CHECK_THROWS_AS(validate(NormalizedBox2D{-1, 0, 0, 5, 10}), Error);
  CHECK_THROWS_AS(validate(NormalizedBox2D{0, 0, 0, 5, 1001}), Error);
}

TEST_CASE("canonicalize square walks 16 px steps from the origin") {
  const RawPolygon square{{{0, 0}, {100, 0}, {100, 100}, {0, 100}}, {1000, 1000}};
  const auto c = canonicalize_polygon(square);
  CHECK(c.points[0] == GridPoint2{0, 0});
  CHECK(c.points[1] == GridPoint2{16, 0});
  CHECK(c.points[2] == GridPoint2{32, 0});
  // Arc 96..112 turns the first corner.
  CHECK(c.points[6] == GridPoint2{96, 0});
  CHECK(c.points[7] == GridPoint2{100, 12});
  CHECK(c.points[24] == GridPoint2{0, 16});
  CHECK(canonical_violations(c).empty());
}

TEST_CASE("canonicalize ignores input orientation and start vertex") {
  const RawPolygon a{{{0, 0}, {100, 0}, {100, 100}, {0, 100}}, {1000, 1000}};
  const RawPolygon b{{{100, 100}, {100, 0}, {0, 0}, {0, 100}}, {1000, 1000}};
  CHECK(canonicalize_polygon(a) == canonicalize_polygon(b));
}

TEST_CASE("canonicalize accepts a collinear polygon") {
  const RawPolygon seg{{{100, 100}, {200, 100}, {300, 100}}, {1000, 1000}};
  const auto c = canonicalize_polygon(seg);
  CHECK(c.points[0] == GridPoint2{100, 100});
  for (const auto& p : c.points) {
    CHECK(p.y == 100);
    CHECK(p.x >= 100);
    CHECK(p.x <= 300);
  }
  // Perimeter 400 walks out and back: 16 units per step.
  CHECK(c.points[1] == GridPoint2{116, 100});
  CHECK(c.points[13] == GridPoint2{292, 100});
}

TEST_CASE("canonicalize errors") {
  CHECK(kind_of([] { canonicalize_polygon({{{5, 5}, {5, 5}, {5, 5}}, {10, 10}}); }) == ErrorKind::degenerate);
  CHECK(kind_of([] { canonicalize_polygon({{{1, 1}, {2, 2}}, {10, 10}}); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([] { canonicalize_polygon({{{1, 1}, {20, 2}, {3, 4}}, {10, 10}}); }) == ErrorKind::range);
  CHECK(kind_of([] { canonicalize_polygon({{{1, 1}, {2, 2}, {3, 1}}, {0, 10}}); }) == ErrorKind::invalid_extent);
}

TEST_CASE("canonicalize accepts self-intersecting input") {
  const RawPolygon bow{{{0, 0}, {100, 100}, {100, 0}, {0, 100}}, {1000, 1000}};
  CHECK(self_intersects(bow.points));
  CHECK_NOTHROW(canonicalize_polygon(bow));
}

TEST_CASE("canonical output matches the arc-walk oracle on random polygons") {
  SeededRng rng(5);
  for (int i = 0; i < 300; ++i) {
    const auto raw = gen::star_polygon(rng, gen::extent(rng));
    const auto c = canonicalize_polygon(raw);
    REQUIRE(c.points.size() == kPolygonPoints);
    CHECK(signed_area(c.points) <= 0.0);
    CHECK(canonical_violations(c).empty());

    const auto ring = clockwise_grid_ring(raw);
    const double s0 = oracle::arc_nearest_origin(ring);
    const double step = ring.perimeter() / kPolygonPoints;
    for (std::size_t k = 0; k < kPolygonPoints; ++k) {
      const auto q = oracle::ring_point(ring, s0 + k * step);
      CHECK(std::abs(c.points[k].x - q.x) <= 0.5 + 1e-6);
      CHECK(std::abs(c.points[k].y - q.y) <= 0.5 + 1e-6);
    }
  }
}

TEST_CASE("canonicalize depends only on normalized shape") {
  SeededRng rng(6);
  for (int i = 0; i < 200; ++i) {
    const auto raw = gen::star_polygon(rng, gen::extent(rng));
    RawPolygon scaled = raw;
    scaled.extent = {raw.extent.width * 3, raw.extent.height * 2};
    for (auto& p : scaled.points) p = {p.x * 3, p.y * 2};
    const auto a = canonicalize_polygon(raw), b = canonicalize_polygon(scaled);
    for (std::size_t k = 0; k < kPolygonPoints; ++k) {
      CHECK(std::abs(b.points[k].x - a.points[k].x) <= 1);
      CHECK(std::abs(b.points[k].y - a.points[k].y) <= 1);
    }
  }
}

TEST_CASE("polygon_dice and polygon_iou") {
  auto square = [](int x0, int y0, int size) {
    return canonicalize_polygon({{{double(x0), double(y0)}, {double(x0 + size), double(y0)},
                                  {double(x0 + size), double(y0 + size)}, {double(x0), double(y0 + size)}},
                                 {1000, 1000}});
  };
  const auto a = square(100, 100, 400);
  CHECK(polygon_dice(a, a, 256) == 1.0);
  CHECK(polygon_iou(a, a, 256) == 1.0);
  CHECK(polygon_dice(a, square(600, 600, 300), 256) == 0.0);

  // Two squares sharing half their area.
  CanonicalPolygon rect_a, rect_b;
  rect_a = canonicalize_polygon({{{100, 100}, {500, 100}, {500, 500}, {100, 500}}, {1000, 1000}});
  rect_b = canonicalize_polygon({{{300, 100}, {700, 100}, {700, 500}, {300, 500}}, {1000, 1000}});
  CHECK(polygon_dice(rect_a, rect_b, 512) == doctest::Approx(0.5).epsilon(0.04));
  CHECK(std::abs(polygon_dice(rect_a, rect_b, 512) - 0.5) <= 0.02);
  CHECK(kind_of([&] { polygon_dice(a, a, 32); }) == ErrorKind::invalid_argument);
}

TEST_CASE("polygon_dice degenerate conventions") {
  const auto line = canonicalize_polygon({{{100, 100}, {200, 100}, {300, 100}}, {1000, 1000}});
  const auto other = canonicalize_polygon({{{100, 300}, {200, 300}, {300, 300}}, {1000, 1000}});
  CHECK(polygon_dice(line, line, 128) == 1.0);
  CHECK(polygon_dice(line, other, 128) == 0.0);
}
