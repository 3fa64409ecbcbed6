#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "dctmap/scan.hpp"

namespace dctmap {

/// Cells are addressed (ix, iy) with ix along x. Each cell covers the half-open box
/// [x0 + ix w, x0 + (ix+1) w) x [y0 + iy h, y0 + (iy+1) h).
struct GridGeometry {
  Point2 origin{};
  int cols = 1;  ///< cells along x
  int rows = 1;  ///< cells along y
  double cell_edge_x = 1.0;
  double cell_edge_y = 1.0;

  static GridGeometry square(Point2 origin, int cols, int rows, double edge) {
    return {origin, cols, rows, edge, edge};
  }
  /// Tiles `extent` with cols x rows cells.
  static GridGeometry covering(const Extent& extent, int cols, int rows) {
    return {{0.0, 0.0}, cols, rows, extent.x / cols, extent.y / rows};
  }

  void validate() const;
  int cell_count() const { return cols * rows; }
  int index(int ix, int iy) const { return iy * cols + ix; }
  double width() const { return cols * cell_edge_x; }
  double height() const { return rows * cell_edge_y; }
  Point2 midpoint(int ix, int iy) const {
    return {origin.x + (ix + 0.5) * cell_edge_x, origin.y + (iy + 0.5) * cell_edge_y};
  }
  bool operator==(const GridGeometry&) const = default;
};

struct CellSegment {
  int ix = 0;
  int iy = 0;
  double t_enter = 0.0;
  double t_exit = 0.0;
  double length() const { return t_exit - t_enter; }
};

/// Cells crossed by the segment [0, r] of `ray`, in order, clipped to the grid. Zero-length
/// crossings (corner touches) are omitted, so a fully clipped ray or r = 0 yields no segments.
std::vector<CellSegment> trace_ray(const GridGeometry& geometry, const Ray2& ray, double r);

/// Cell containing `p`. A point on a cell boundary belongs to the cell the direction `d` enters.
/// nullopt outside the grid.
std::optional<std::pair<int, int>> cell_of(const GridGeometry& geometry, Point2 p, Point2 d);

/// Decay-rate grid: per cell, reflections divided by the path length traveled inside the cell.
class GridDecayMap {
 public:
  explicit GridDecayMap(GridGeometry geometry);

  const GridGeometry& geometry() const { return geometry_; }

  double hits(int ix, int iy) const { return hits_[geometry_.index(ix, iy)]; }
  double path_length(int ix, int iy) const { return path_[geometry_.index(ix, iy)]; }
  /// Traversed by at least one ray (or, with `require_hit`, also reflected at least once).
  bool observed(int ix, int iy, bool require_hit = false) const;
  /// hits / path length; 0 for unobserved cells.
  double decay(int ix, int iy) const;

  void add_path(int ix, int iy, double length) { path_[geometry_.index(ix, iy)] += length; }
  void add_hit(int ix, int iy, double count = 1.0) { hits_[geometry_.index(ix, iy)] += count; }
  /// Sets accumulators so that decay(ix, iy) == value and the cell is observed.
  void set_decay(int ix, int iy, double value);

  /// Decay at `p` by nearest-cell lookup; nullopt marks an unobserved cell. Throws InvalidInput
  /// outside the grid.
  std::optional<double> sample(Point2 p) const;

  const std::vector<double>& hit_counts() const { return hits_; }
  const std::vector<double>& path_lengths() const { return path_; }

 private:
  GridGeometry geometry_;
  std::vector<double> hits_;
  std::vector<double> path_;
};

/// Accumulates every ray of `scans` into a grid. Each ray contributes the path of its observed
/// length inside the grid (r_min for sub rays); a return adds one hit to the cell it ends in.
GridDecayMap build_grid(const ScanSet& scans, const GridGeometry& geometry);

/// Joint log-likelihood under the piecewise-constant field of `map`, with the same mixed-density
/// structure and lambda floor as the spectral forward model.
double grid_ray_log_likelihood(const GridDecayMap& map, const LidarRay& z, const SensorLimits& limits);
double grid_scan_log_likelihood(const GridDecayMap& map, const ScanSet& scans);

/// Text format: "grid cols rows edge_x edge_y origin_x origin_y", then `rows` lines of `cols`
/// decay values (iy = 0 first); unobserved cells are written as "nan".
void write_grid_map(std::ostream& out, const GridDecayMap& map);
GridDecayMap read_grid_map(std::istream& in);

}  // namespace dctmap
