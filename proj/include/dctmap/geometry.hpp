#pragma once

#include <cmath>

namespace dctmap {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }

/// Half line s + v r with a unit direction v.
class Ray2 {
 public:
  Ray2() = default;

  /// Throws InvalidInput unless `direction` is finite and has unit length within 1e-12.
  Ray2(Point2 origin, Point2 direction);

  static Ray2 from_angle(Point2 origin, double angle);
  /// Normalizes `direction`; throws on a zero or non-finite vector.
  static Ray2 normalized(Point2 origin, Point2 direction);

  Point2 origin() const { return origin_; }
  Point2 direction() const { return direction_; }
  Point2 at(double r) const { return {origin_.x + direction_.x * r, origin_.y + direction_.y * r}; }

 private:
  Point2 origin_{};
  Point2 direction_{1.0, 0.0};
};

/// Axis-aligned rectangle [0, x] x [0, y] in map-local coordinates.
struct Extent {
  double x = 0.0;
  double y = 0.0;

  bool contains(Point2 p, double tol = 1e-9) const {
    return p.x >= -tol && p.y >= -tol && p.x <= x + tol && p.y <= y + tol;
  }
};

/// Distance along `ray` from its origin until it leaves `extent`. The origin must lie inside
/// (within 1e-9); throws InvalidInput otherwise.
double exit_distance(const Extent& extent, const Ray2& ray);

}  // namespace dctmap
