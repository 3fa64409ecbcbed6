#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dctmap/forward_model.hpp"

namespace dctmap {

/// Gradient (and optionally Hessian) of a log-likelihood with respect to the flat coefficients.
struct GradHess {
  Eigen::VectorXd grad;
  std::optional<Eigen::MatrixXd> hess;
};

/// B_i = d lambda / d a_i at a point, with the coefficient-free B_ij = 2 phi_i phi_j on request.
struct BTerms {
  Eigen::VectorXd b;
  std::optional<Eigen::MatrixXd> b_mat;
};

/// C_i = dS / d a_i along a segment, with the coefficient-free C_ij on request.
struct CTerms {
  Eigen::VectorXd c;
  std::optional<Eigen::MatrixXd> c_mat;
};

BTerms eval_B(const SpectralMap& map, Point2 p, bool with_matrix = false);
CTerms eval_C(const SpectralMap& map, const Ray2& ray, double r, bool with_matrix = false);

/// Per-ray derivative of the mixed-density log-likelihood (sub, return and super cases).
GradHess ray_loglik_grad(const SpectralMap& map, const LidarRay& z, const SensorLimits& limits,
                         bool with_hessian = false);

/// Sum of ray_loglik_grad over the set, assembled through ScanObjective.
GradHess scan_loglik_grad(const SpectralMap& map, const ScanSet& scans, bool with_hessian = false);

/// Joint log-likelihood of a fixed scan set as a function of the coefficients.
///
/// Segment tables and endpoint bases do not depend on the coefficients, so they are built once.
/// Each evaluation then costs O(I^2) for the coefficient autocorrelation plus O(K I) per ray
/// contraction; the Hessian adds one dense rank-K update. Rays whose clipped segment is shorter
/// than `min_segment` are skipped and counted.
class ScanObjective {
 public:
  struct Value {
    double loglik = 0.0;
    Eigen::VectorXd grad;
    std::optional<Eigen::MatrixXd> hess;
  };

  ScanObjective(const SpectralShape& shape, const ScanSet& scans, double min_segment = 0.0);

  const SpectralShape& shape() const { return shape_; }
  std::size_t ray_count() const { return rays_.size(); }
  std::size_t dropped() const { return dropped_; }

  double loglik(const Eigen::VectorXd& coeffs) const;
  Value evaluate(const Eigen::VectorXd& coeffs, bool with_grad, bool with_hessian) const;

 private:
  struct PreparedRay {
    RayOutcome::Kind kind;
    SegmentIntegrals integrals;
    int basis_column;  // column of return_basis_, returns only
  };

  SpectralShape shape_;
  std::vector<PreparedRay> rays_;
  Eigen::MatrixXd return_basis_;  // I x (number of returns), basis at each endpoint
  // cos(p x~) for p < 2L-1 and cos(q y~) for q < 2M-1 at each endpoint, one block per return
  std::vector<double> return_cos_x_;
  std::vector<double> return_cos_y_;
  double sub_floor_ = 0.0;
  std::size_t dropped_ = 0;
};

struct FdReport {
  double max_rel_error = 0.0;
  /// Offending coefficient; for order 2 the pair (row, col) of the Hessian.
  int index = -1;
  int index2 = -1;
  int order = 1;
};

/// Central finite-difference check of scan_loglik_grad against scan_log_likelihood over all
/// coefficients. The relative error of one entry is |analytic - numeric| / max(1, |numeric|).
/// `step <= 0` selects the defaults 1e-6 (1 + |a_i|) for order 1 and 1e-4 (1 + |a_i|) for order 2.
FdReport fd_check(const SpectralMap& map, const ScanSet& scans, double step, int order);

}  // namespace dctmap
