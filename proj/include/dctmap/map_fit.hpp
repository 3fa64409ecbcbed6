#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dctmap/scan.hpp"
#include "dctmap/spectral_map.hpp"

namespace dctmap {

enum class InitMode { FromGridDCT, ConstantPlusNoise };
enum class HessianMode { Newton, GradientOnly };

struct FitConfig {
  int rows = 10;
  int cols = 10;
  int max_iters = 100;
  /// Stop once |delta loglik| / max(1, |loglik|) falls below this on an accepted step.
  double rel_tol = 1e-3;
  InitMode init = InitMode::FromGridDCT;
  double noise_scale = 0.01;
  std::uint64_t seed = 0;
  HessianMode hessian_mode = HessianMode::Newton;

  void validate() const;
};

struct FitReport {
  double final_loglik = 0.0;
  std::vector<double> loglik_trace;  ///< initial value, then one entry per accepted step
  int iterations = 0;
  bool converged = false;
  double wall_time = 0.0;
  std::size_t dropped_rays = 0;
  double initial_grad_norm = 0.0;  ///< infinity norms
  double final_grad_norm = 0.0;
};

/// Initial coefficients as configured. Exposed so callers can start from a chosen point.
SpectralMap initial_map(const ScanSet& scans, const Extent& extent, const FitConfig& config);

/// Maximizes the joint scan log-likelihood over the L x M coefficients.
///
/// Newton mode runs a dogleg trust region on the analytic gradient and Hessian; when the Hessian
/// is not negative definite the step falls back to steepest ascent clipped to the radius.
/// GradientOnly mode is backtracking line-search ascent. Throws InvalidInput for an empty scan
/// set and InitFailure when the objective is not finite at the start.
std::pair<SpectralMap, FitReport> fit(const ScanSet& scans, const Extent& extent, const FitConfig& config);

/// Same, starting from `start` instead of the configured initialization.
std::pair<SpectralMap, FitReport> fit_from(const ScanSet& scans, const SpectralMap& start,
                                           const FitConfig& config);

/// Coefficients whose field interpolates `values` (an L x M raster of sqrt-decay, x-major:
/// values(l, m) at cell midpoint ((l + 1/2) X / L, (m + 1/2) Y / M)) exactly at the midpoints.
Eigen::MatrixXd forward_cosine_transform(const Eigen::MatrixXd& values);

}  // namespace dctmap
