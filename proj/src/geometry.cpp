#include "dctmap/geometry.hpp"

#include <algorithm>
#include <limits>

#include "dctmap/error.hpp"

namespace dctmap {

Ray2::Ray2(Point2 origin, Point2 direction) : origin_(origin), direction_(direction) {
  if (!origin.finite() || !direction.finite()) throw InvalidInput("ray: non-finite origin or direction");
  const double norm = std::hypot(direction.x, direction.y);
  if (std::abs(norm - 1.0) > 1e-12) throw InvalidInput("ray: direction is not a unit vector");
}

Ray2 Ray2::from_angle(Point2 origin, double angle) {
  return normalized(origin, {std::cos(angle), std::sin(angle)});
}

Ray2 Ray2::normalized(Point2 origin, Point2 direction) {
  const double norm = std::hypot(direction.x, direction.y);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidInput("ray: cannot normalize direction");
  return Ray2(origin, {direction.x / norm, direction.y / norm});
}

double exit_distance(const Extent& extent, const Ray2& ray) {
  const Point2 s = ray.origin();
  const Point2 v = ray.direction();
  if (!extent.contains(s)) throw InvalidInput("ray origin lies outside the map extent");
  double t = std::numeric_limits<double>::infinity();
  if (v.x > 0.0) t = std::min(t, (extent.x - s.x) / v.x);
  if (v.x < 0.0) t = std::min(t, -s.x / v.x);
  if (v.y > 0.0) t = std::min(t, (extent.y - s.y) / v.y);
  if (v.y < 0.0) t = std::min(t, -s.y / v.y);
  return std::max(t, 0.0);
}

}  // namespace dctmap
