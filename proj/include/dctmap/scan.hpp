#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "dctmap/geometry.hpp"

namespace dctmap {

struct SensorLimits {
  double r_min = 0.04;
  double r_max = 80.0;

  /// Throws InvalidInput unless 0 <= r_min < r_max < inf.
  void validate() const;
  bool operator==(const SensorLimits&) const = default;
};

/// Outcome of one lidar ray: no return below r_min (sub), no return up to the range limit
/// (super), or a reflection at `range`.
///
/// A super ray may carry a cutoff shorter than r_max. This marks a ray that left the mapped
/// area without reflecting; it is observed only up to the cutoff.
struct RayOutcome {
  enum class Kind { Sub, Super, Return };

  Kind kind = Kind::Super;
  double range = std::numeric_limits<double>::infinity();

  static RayOutcome sub() { return {Kind::Sub, 0.0}; }
  static RayOutcome super(double cutoff = std::numeric_limits<double>::infinity()) {
    return {Kind::Super, cutoff};
  }
  static RayOutcome hit(double r) { return {Kind::Return, r}; }

  bool is_sub() const { return kind == Kind::Sub; }
  bool is_super() const { return kind == Kind::Super; }
  bool is_return() const { return kind == Kind::Return; }
  bool has_cutoff() const { return kind == Kind::Super && range < std::numeric_limits<double>::infinity(); }
  bool operator==(const RayOutcome&) const = default;
};

struct LidarRay {
  Ray2 ray;
  RayOutcome outcome;
};

/// Ordered set of rays sharing one sensor. `extent`, when set, is the map-local patch the rays
/// live in; every origin lies inside it.
struct ScanSet {
  std::vector<LidarRay> rays;
  SensorLimits limits;
  std::optional<Extent> extent;

  std::size_t size() const { return rays.size(); }
  bool empty() const { return rays.empty(); }

  /// Checks limits and return radii; with an extent, also origins and that returns end inside.
  void validate() const;
};

/// Length of the ray actually observed: range for returns, min(cutoff, r_max) for super rays,
/// r_min for sub rays.
double observed_length(const RayOutcome& outcome, const SensorLimits& limits);

}  // namespace dctmap
