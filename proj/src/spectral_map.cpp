#include "dctmap/spectral_map.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "dctmap/error.hpp"
#include "text_format.hpp"

namespace dctmap {

namespace {

void check_shape(const SpectralShape& shape) {
  if (shape.rows < 1 || shape.cols < 1) throw InvalidInput("spectral map needs at least one coefficient");
  if (!(shape.extent_x > 0.0) || !(shape.extent_y > 0.0) || !std::isfinite(shape.extent_x) ||
      !std::isfinite(shape.extent_y))
    throw InvalidInput("spectral map extent must be positive and finite");
}

void check_point(Point2 p) {
  if (!p.finite()) throw InvalidInput("non-finite evaluation point");
}

// cos(k * angle) for k = 0 .. n-1.
std::vector<double> cosines(int n, double angle) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = std::cos(k * angle);
  return out;
}

}  // namespace

SpectralMap::SpectralMap(int rows, int cols, double extent_x, double extent_y)
    : shape_{rows, cols, extent_x, extent_y} {
  check_shape(shape_);
  coeffs_ = Eigen::VectorXd::Zero(shape_.size());
}

SpectralMap::SpectralMap(const Eigen::MatrixXd& coeffs, double extent_x, double extent_y)
    : shape_{static_cast<int>(coeffs.rows()), static_cast<int>(coeffs.cols()), extent_x, extent_y} {
  check_shape(shape_);
  if (!coeffs.allFinite()) throw InvalidInput("spectral map coefficients must be finite");
  coeffs_.resize(shape_.size());
  for (int l = 0; l < shape_.rows; ++l)
    for (int m = 0; m < shape_.cols; ++m) coeffs_[l * shape_.cols + m] = coeffs(l, m);
}

SpectralMap::SpectralMap(const SpectralShape& shape, Eigen::VectorXd flat_coeffs)
    : shape_(shape), coeffs_(std::move(flat_coeffs)) {
  check_shape(shape_);
  if (coeffs_.size() != shape_.size()) throw InvalidInput("coefficient count does not match L * M");
  if (!coeffs_.allFinite()) throw InvalidInput("spectral map coefficients must be finite");
}

Eigen::MatrixXd SpectralMap::matrix() const {
  Eigen::MatrixXd out(shape_.rows, shape_.cols);
  for (int l = 0; l < shape_.rows; ++l)
    for (int m = 0; m < shape_.cols; ++m) out(l, m) = coeffs_[l * shape_.cols + m];
  return out;
}

SpectralMap SpectralMap::with_coefficients(Eigen::VectorXd flat_coeffs) const {
  return SpectralMap(shape_, std::move(flat_coeffs));
}

Eigen::VectorXd basis_at(const SpectralShape& shape, Point2 p) {
  check_point(p);
  const auto cx = cosines(shape.rows, std::numbers::pi * p.x / shape.extent_x);
  const auto cy = cosines(shape.cols, std::numbers::pi * p.y / shape.extent_y);
  Eigen::VectorXd phi(shape.size());
  for (int l = 0; l < shape.rows; ++l)
    for (int m = 0; m < shape.cols; ++m) phi[l * shape.cols + m] = cx[l] * cy[m];
  return phi;
}

double eval_lambda(const SpectralMap& map, Point2 p) {
  const double f = map.flat().dot(basis_at(map.shape(), p));
  return f * f;
}

std::array<double, 2> eval_lambda_spatial_gradient(const SpectralMap& map, Point2 p) {
  check_point(p);
  const auto& shape = map.shape();
  const double kx = std::numbers::pi / shape.extent_x;
  const double ky = std::numbers::pi / shape.extent_y;
  double f = 0.0, fx = 0.0, fy = 0.0;
  for (int l = 0; l < shape.rows; ++l) {
    const double cx = std::cos(l * kx * p.x);
    const double sx = -l * kx * std::sin(l * kx * p.x);
    for (int m = 0; m < shape.cols; ++m) {
      const double a = map.coeff(l, m);
      const double cy = std::cos(m * ky * p.y);
      const double sy = -m * ky * std::sin(m * ky * p.y);
      f += a * cx * cy;
      fx += a * sx * cy;
      fy += a * cx * sy;
    }
  }
  return {2.0 * f * fx, 2.0 * f * fy};
}

double eval_lambda_on_ray(const SpectralMap& map, const Ray2& ray, double r) {
  return eval_lambda(map, ray.at(r));
}

void write_spectral_map(std::ostream& out, const SpectralMap& map) {
  out << map.rows() << ' ' << map.cols() << ' ' << detail::format_double(map.extent_x()) << ' '
      << detail::format_double(map.extent_y()) << '\n';
  for (int l = 0; l < map.rows(); ++l) {
    for (int m = 0; m < map.cols(); ++m) {
      if (m) out << ' ';
      out << detail::format_double(map.coeff(l, m));
    }
    out << '\n';
  }
}

SpectralMap read_spectral_map(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_tokens = [&]() {
    while (std::getline(in, line)) {
      ++line_no;
      auto tokens = detail::split_ws(line);
      if (!tokens.empty()) return tokens;
    }
    throw ParseError(line_no + 1, "unexpected end of spectral map");
  };

  auto header = next_tokens();
  if (header.size() != 4) throw ParseError(line_no, "expected header 'L M X Y'");
  const auto rows = detail::parse_int(header[0]);
  const auto cols = detail::parse_int(header[1]);
  const auto ex = detail::parse_double(header[2]);
  const auto ey = detail::parse_double(header[3]);
  if (!rows || !cols || !ex || !ey || *rows < 1 || *cols < 1)
    throw ParseError(line_no, "invalid spectral map header");

  Eigen::MatrixXd coeffs(*rows, *cols);
  for (long long l = 0; l < *rows; ++l) {
    auto tokens = next_tokens();
    if (static_cast<long long>(tokens.size()) != *cols)
      throw ParseError(line_no, "expected " + std::to_string(*cols) + " coefficients");
    for (long long m = 0; m < *cols; ++m) {
      const auto v = detail::parse_double(tokens[m]);
      if (!v) throw ParseError(line_no, "non-numeric coefficient '" + std::string(tokens[m]) + "'");
      coeffs(l, m) = *v;
    }
  }
  return SpectralMap(coeffs, *ex, *ey);
}

}  // namespace dctmap
