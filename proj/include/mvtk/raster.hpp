#pragma once

// Polygon rasterization kernels.
//
// Both kernels sample cell centers ((i + 0.5) * 1000 / resolution) with the
// even-odd rule and the same half-open edge test, so they produce identical
// masks. rasterize_reference() is the per-cell crossing test kept as the
// serial oracle; rasterize() is the scanline kernel parallelized over rows.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mvtk/geometry.hpp"

namespace mvtk {

struct Mask {
  int resolution = 0;
  std::vector<std::uint8_t> cells;  // row-major, resolution * resolution

  std::size_t count() const noexcept;
  bool operator==(const Mask&) const = default;
};

struct OverlapCounts {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t intersection = 0;
};

Mask rasterize_reference(std::span<const GridPoint2> ring, int resolution);
Mask rasterize(std::span<const GridPoint2> ring, int resolution);

OverlapCounts overlap_reference(const Mask& a, const Mask& b);
OverlapCounts overlap(const Mask& a, const Mask& b);

}  // namespace mvtk
