#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>

#include "dctmap/scan.hpp"

namespace dctmap {

struct PatchSpec {
  /// Lower-left corner in world coordinates. Unset selects the densest window.
  std::optional<Point2> corner;
  double width = 10.0;
  double height = 10.0;
  std::size_t max_rays = 10000;
};

/// Lower-left corner of the width x height window holding the most return endpoints, searched
/// over a 1 m histogram of endpoints. Ties keep the first window in (x, y) scan order.
Point2 densest_window(const ScanSet& scans, double width, double height);

/// Moves the rays whose origin lies inside the patch into patch-local coordinates and clips them
/// at the boundary: a return beyond the boundary becomes a super ray cut off where it leaves,
/// and super rays are cut off the same way. Rays starting outside the patch are dropped. At most
/// max_rays are kept, in input order.
ScanSet extract_patch(const ScanSet& scans, const PatchSpec& patch);

/// Line-oriented text format:
///
///   scanset r_min r_max X Y        (X = Y = 0 when the set has no extent)
///   S x y vx vy
///   R x y vx vy r
///   P x y vx vy [cutoff]
///
/// Numbers are written in shortest round-trip form, so write followed by read is exact.
void write_scan_set(std::ostream& out, const ScanSet& scans);
ScanSet read_scan_set(std::istream& in);

}  // namespace dctmap
