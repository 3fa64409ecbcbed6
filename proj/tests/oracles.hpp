#pragma once

// Independent reference computations used only by the tests. Nothing here calls into the
// table/contraction machinery of the library.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <utility>

#include <Eigen/Dense>

#include "dctmap/geometry.hpp"
#include "dctmap/grid_map.hpp"
#include "dctmap/spectral_map.hpp"

namespace oracle {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
                        int max_depth = 50) {
  if (b <= a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson_step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, max_depth);
}

/// lambda as the square of the plain cosine double sum.
inline double lambda_double_sum(const Eigen::MatrixXd& a, double ex, double ey, double x, double y) {
  const double xt = std::numbers::pi * x / ex, yt = std::numbers::pi * y / ey;
  double f = 0.0;
  for (int l = 0; l < a.rows(); ++l)
    for (int m = 0; m < a.cols(); ++m) f += a(l, m) * std::cos(l * xt) * std::cos(m * yt);
  return f * f;
}

/// lambda via the product-to-sum expansion over the sign triple (alpha, beta, gamma).
inline double lambda_sign_expansion(const Eigen::MatrixXd& a, double ex, double ey, double x, double y) {
  const double xt = std::numbers::pi * x / ex, yt = std::numbers::pi * y / ey;
  const int M = static_cast<int>(a.cols()), I = static_cast<int>(a.size());
  double sum = 0.0;
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < I; ++j) {
      const int li = i / M, mi = i % M, lj = j / M, mj = j % M;
      double inner = 0.0;
      for (int al : {-1, 1})
        for (int be : {-1, 1})
          for (int ga : {-1, 1}) inner += std::cos((li + al * lj) * xt + be * (mi + ga * mj) * yt);
      sum += a(li, mi) * a(lj, mj) * inner;
    }
  return sum / 8.0;
}

/// S from the pairwise antiderivative sum, exactly as the closed form is usually printed:
/// sine difference over the directional frequency, r cos(.) when that frequency vanishes.
inline double line_integral_pairwise(const Eigen::MatrixXd& a, double ex, double ey, const dctmap::Ray2& ray,
                                     double r, double band = 1e-9) {
  const double sx = std::numbers::pi * ray.origin().x / ex, sy = std::numbers::pi * ray.origin().y / ey;
  const double vx = std::numbers::pi * ray.direction().x / ex, vy = std::numbers::pi * ray.direction().y / ey;
  const int M = static_cast<int>(a.cols()), I = static_cast<int>(a.size());
  double sum = 0.0;
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < I; ++j) {
      const int li = i / M, mi = i % M, lj = j / M, mj = j % M;
      double inner = 0.0;
      for (int al : {-1, 1})
        for (int be : {-1, 1})
          for (int ga : {-1, 1}) {
            const double p = li + al * lj, q = be * (mi + ga * mj);
            const double den = p * vx + q * vy;
            if (std::abs(den) < band)
              inner += r * std::cos(p * sx + q * sy);
            else
              inner += (std::sin(p * (sx + vx * r) + q * (sy + vy * r)) - std::sin(p * sx + q * sy)) / den;
          }
      sum += a(li, mi) * a(lj, mj) * inner;
    }
  return sum / 8.0;
}

/// Integral of lambda along the ray by adaptive quadrature of the double-sum form.
inline double line_integral_quadrature(const Eigen::MatrixXd& a, double ex, double ey, const dctmap::Ray2& ray,
                                       double r0, double r1, double tol = 1e-12) {
  return integrate([&](double t) { const auto p = ray.at(t); return lambda_double_sum(a, ex, ey, p.x, p.y); },
                   r0, r1, tol);
}

inline Eigen::MatrixXd random_coeffs(int rows, int cols, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd a(rows, cols);
  for (int l = 0; l < rows; ++l)
    for (int m = 0; m < cols; ++m) a(l, m) = n(gen);
  return a;
}

/// Per-cell path lengths by dense sampling of the segment [0, r] at `samples` midpoints.
inline std::map<std::pair<int, int>, double> sampled_cell_lengths(const dctmap::GridGeometry& g,
                                                                  const dctmap::Ray2& ray, double r,
                                                                  int samples = 100000) {
  std::map<std::pair<int, int>, double> out;
  const double dt = r / samples;
  for (int k = 0; k < samples; ++k) {
    const auto p = ray.at((k + 0.5) * dt);
    const int ix = static_cast<int>(std::floor((p.x - g.origin.x) / g.cell_edge_x));
    const int iy = static_cast<int>(std::floor((p.y - g.origin.y) / g.cell_edge_y));
    if (ix < 0 || iy < 0 || ix >= g.cols || iy >= g.rows) continue;
    out[{ix, iy}] += dt;
  }
  return out;
}

}  // namespace oracle
