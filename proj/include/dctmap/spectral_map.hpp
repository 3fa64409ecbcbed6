#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>

#include <Eigen/Dense>

#include "dctmap/geometry.hpp"

namespace dctmap {

/// Dimensions and extent of a spectral map, independent of its coefficients.
struct SpectralShape {
  int rows = 1;  ///< L, frequencies along x
  int cols = 1;  ///< M, frequencies along y
  double extent_x = 1.0;
  double extent_y = 1.0;

  int size() const { return rows * cols; }
  int row_of(int i) const { return i / cols; }
  int col_of(int i) const { return i % cols; }
  Extent extent() const { return {extent_x, extent_y}; }
  bool operator==(const SpectralShape&) const = default;
};

/// Decay-rate map stored as an L x M matrix of cosine coefficients a_lm.
///
/// The field is lambda(x, y) = (sum_lm a_lm cos(l pi x / X) cos(m pi y / Y))^2, without any
/// orthonormalization factors. Coefficients are stored row-major, flat index i = l * M + m.
/// A map is immutable; `with_coefficients` produces a sibling with the same shape.
class SpectralMap {
 public:
  /// All-zero map.
  SpectralMap(int rows, int cols, double extent_x, double extent_y);
  /// `coeffs` is L x M. Throws InvalidInput on empty matrices, non-positive extents or
  /// non-finite coefficients.
  SpectralMap(const Eigen::MatrixXd& coeffs, double extent_x, double extent_y);
  SpectralMap(const SpectralShape& shape, Eigen::VectorXd flat_coeffs);

  const SpectralShape& shape() const { return shape_; }
  int rows() const { return shape_.rows; }
  int cols() const { return shape_.cols; }
  int size() const { return shape_.size(); }
  double extent_x() const { return shape_.extent_x; }
  double extent_y() const { return shape_.extent_y; }

  double coeff(int l, int m) const { return coeffs_[l * shape_.cols + m]; }
  const Eigen::VectorXd& flat() const { return coeffs_; }
  Eigen::MatrixXd matrix() const;

  SpectralMap with_coefficients(Eigen::VectorXd flat_coeffs) const;

 private:
  SpectralShape shape_;
  Eigen::VectorXd coeffs_;
};

/// Cosine basis phi_i(p) = cos(l_i x~) cos(m_i y~) at a point. Throws on non-finite input.
Eigen::VectorXd basis_at(const SpectralShape& shape, Point2 p);

/// lambda(p). Points outside [0,X]x[0,Y] evaluate the even-periodic extension of the series,
/// which has no physical meaning but is well defined.
double eval_lambda(const SpectralMap& map, Point2 p);

/// (d lambda / dx, d lambda / dy) at p.
std::array<double, 2> eval_lambda_spatial_gradient(const SpectralMap& map, Point2 p);

/// lambda at s + v r.
double eval_lambda_on_ray(const SpectralMap& map, const Ray2& ray, double r);

/// Text format: "L M X Y" then L lines of M values. Numbers use the shortest exact form.
void write_spectral_map(std::ostream& out, const SpectralMap& map);
SpectralMap read_spectral_map(std::istream& in);

}  // namespace dctmap
