#pragma once

#include <vector>

#include <Eigen/Dense>

#include "dctmap/scan.hpp"
#include "dctmap/spectral_map.hpp"

namespace dctmap {

/// Floor applied to lambda wherever it appears under a logarithm or in a denominator.
inline constexpr double kLambdaFloor = 1e-12;

/// Band around a vanishing directional frequency inside which the r cos(.) branch is used [rad/m].
inline constexpr double kZeroFrequencyBand = 1e-9;

/// Integral over [0, r] of cos(fx (s~x + v~x t) + fy (s~y + v~y t)) dt, where s~ and v~ are the
/// pi-normalized origin and direction of `ray`. Uses the sine-difference antiderivative, or
/// r cos(fx s~x + fy s~y) when |fx v~x + fy v~y| < kZeroFrequencyBand.
double cosine_line_integral(const SpectralShape& shape, const Ray2& ray, double r, int fx, int fy);

/// Integrals T(p, q) of cos(p x~) cos(q y~) along one ray segment, for p in [0, 2L-2] and
/// q in [0, 2M-2]. Everything the likelihood needs from a segment is a contraction of this table
/// with the coefficients, so it is computed once per segment and reused across coefficients.
class SegmentIntegrals {
 public:
  SegmentIntegrals() = default;
  SegmentIntegrals(const SpectralShape& shape, const Ray2& ray, double r);

  int p_count() const { return p_count_; }
  int q_count() const { return q_count_; }
  double length() const { return length_; }
  double operator()(int p, int q) const { return values_[p * q_count_ + q]; }
  const std::vector<double>& values() const { return values_; }

 private:
  int p_count_ = 0;
  int q_count_ = 0;
  double length_ = 0.0;
  std::vector<double> values_;
};

/// Frequency-domain weights W(p, q) = 1/4 sum_ij a_i a_j #{(alpha, gamma): |l_i + alpha l_j| = p,
/// |m_i + gamma m_j| = q}, so that S = sum_pq W(p, q) T(p, q).
std::vector<double> coefficient_autocorrelation(const SpectralMap& map);

/// C_i = dS/da_i = 1/2 sum_j a_j sum_{alpha,gamma} T(|l_i + alpha l_j|, |m_i + gamma m_j|).
/// `table` may be any linear combination of segment tables.
Eigen::VectorXd contract_gradient(const SpectralMap& map, const std::vector<double>& table);
/// C_ij, independent of the coefficients.
Eigen::MatrixXd contract_hessian(const SpectralShape& shape, const std::vector<double>& table);

/// S(r) along one fixed ray, with the coefficient weights folded in once, for evaluating many
/// lengths. Each call costs O(L M) trigonometric evaluations.
class RayIntegral {
 public:
  RayIntegral(const SpectralMap& map, const Ray2& ray);
  double operator()(double r) const;

 private:
  struct Term {
    double weight, frequency, phase;
  };
  std::vector<Term> terms_;
};

/// S(s, v, r) = integral of lambda over [0, r]. The segment must already be clipped to the map.
double line_integral_S(const SpectralMap& map, const Ray2& ray, double r);

/// N(r) = exp(-S).
double survival_N(const SpectralMap& map, const Ray2& ray, double r);

/// p(r) = lambda(r) N(r) for r inside the sensor limits.
double return_density(const SpectralMap& map, const Ray2& ray, double r, const SensorLimits& limits);

/// 1 - N(r_min), evaluated as -expm1(-S).
double prob_sub(const SpectralMap& map, const Ray2& ray, const SensorLimits& limits);
/// N(r_max).
double prob_super(const SpectralMap& map, const Ray2& ray, const SensorLimits& limits);

/// Log of the mixed density of one measurement. The observed segment is clipped to the map
/// extent; a return beyond the extent is an InvalidInput.
double ray_log_likelihood(const SpectralMap& map, const LidarRay& z, const SensorLimits& limits);

/// Sum of ray_log_likelihood over the set.
double scan_log_likelihood(const SpectralMap& map, const ScanSet& scans);

/// Observed segment length of `z` after clipping to `extent`. Throws InvalidInput for a return
/// beyond the boundary.
double clipped_length(const Extent& extent, const LidarRay& z, const SensorLimits& limits);

}  // namespace dctmap
