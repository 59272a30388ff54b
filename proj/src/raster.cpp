#include "mvtk/raster.hpp"

#include <algorithm>
#include <cmath>

#include "mvtk/error.hpp"

namespace mvtk {

namespace {

void check_resolution(int resolution) {
  if (resolution < 1) throw Error(ErrorKind::invalid_argument, "raster resolution must be positive");
}

double cell_center(int index, int resolution) {
  return (index + 0.5) * static_cast<double>(kGridMax) / resolution;
}

// x where the edge p->q crosses the horizontal line at y. Callers guarantee
// the edge straddles y under the half-open rule.
double crossing_x(GridPoint2 p, GridPoint2 q, double y) {
  return p.x + (y - p.y) * static_cast<double>(q.x - p.x) / static_cast<double>(q.y - p.y);
}

bool straddles(GridPoint2 p, GridPoint2 q, double y) {
  return (p.y > y) != (q.y > y);
}

}  // namespace

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

Mask rasterize_reference(std::span<const GridPoint2> ring, int resolution) {
  check_resolution(resolution);
  Mask mask{resolution, std::vector<std::uint8_t>(static_cast<std::size_t>(resolution) * resolution, 0)};
  const std::size_t n = ring.size();
  for (int row = 0; row < resolution; ++row) {
    const double y = cell_center(row, resolution);
    for (int col = 0; col < resolution; ++col) {
      const double x = cell_center(col, resolution);
      bool inside = false;
      for (std::size_t i = 0; i < n; ++i) {
        const GridPoint2 p = ring[i];
        const GridPoint2 q = ring[(i + 1) % n];
        if (straddles(p, q, y) && x < crossing_x(p, q, y)) inside = !inside;
      }
      mask.cells[static_cast<std::size_t>(row) * resolution + col] = inside ? 1 : 0;
    }
  }
  return mask;
}

Mask rasterize(std::span<const GridPoint2> ring, int resolution) {
  check_resolution(resolution);
  Mask mask{resolution, std::vector<std::uint8_t>(static_cast<std::size_t>(resolution) * resolution, 0)};
  const std::size_t n = ring.size();
  const double cell = static_cast<double>(kGridMax) / resolution;

#pragma omp parallel
  {
    std::vector<double> xs;
    xs.reserve(n);
#pragma omp for schedule(static)
    for (int row = 0; row < resolution; ++row) {
      const double y = cell_center(row, resolution);
      xs.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const GridPoint2 p = ring[i];
        const GridPoint2 q = ring[(i + 1) % n];
        if (straddles(p, q, y)) xs.push_back(crossing_x(p, q, y));
      }
      std::sort(xs.begin(), xs.end());
      std::uint8_t* line = mask.cells.data() + static_cast<std::size_t>(row) * resolution;
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        // Cells whose center x lies in [xs[k], xs[k+1]).
        int first = static_cast<int>(std::floor(xs[k] / cell - 0.5)) - 1;
        first = std::max(first, 0);
        for (int col = first; col < resolution; ++col) {
          const double x = cell_center(col, resolution);
          if (x < xs[k]) continue;
          if (!(x < xs[k + 1])) break;
          line[col] = 1;
        }
      }
    }
  }
  return mask;
}

OverlapCounts overlap_reference(const Mask& a, const Mask& b) {
  if (a.resolution != b.resolution || a.cells.size() != b.cells.size())
    throw Error(ErrorKind::invalid_argument, "masks differ in resolution");
  OverlapCounts out;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    out.a += a.cells[i];
    out.b += b.cells[i];
    out.intersection += a.cells[i] & b.cells[i];
  }
  return out;
}

OverlapCounts overlap(const Mask& a, const Mask& b) {
  if (a.resolution != b.resolution || a.cells.size() != b.cells.size())
    throw Error(ErrorKind::invalid_argument, "masks differ in resolution");
  const auto n = static_cast<std::ptrdiff_t>(a.cells.size());
  std::size_t ca = 0, cb = 0, ci = 0;
#pragma omp parallel for reduction(+ : ca, cb, ci) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    ca += a.cells[i];
    cb += b.cells[i];
    ci += a.cells[i] & b.cells[i];
  }
  return {ca, cb, ci};
}

}  // namespace mvtk
