#include "dctmap/derivatives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dctmap/error.hpp"

namespace dctmap {

namespace {

// N / (1 - N) for N = exp(-s).
double survival_odds(double s) { return 1.0 / std::expm1(s); }

double sub_floor(const SensorLimits& limits) { return kLambdaFloor * limits.r_min; }

}  // namespace

BTerms eval_B(const SpectralMap& map, Point2 p, bool with_matrix) {
  const Eigen::VectorXd phi = basis_at(map.shape(), p);
  const double f = map.flat().dot(phi);
  BTerms out{2.0 * f * phi, std::nullopt};
  if (with_matrix) out.b_mat = 2.0 * phi * phi.transpose();
  return out;
}

CTerms eval_C(const SpectralMap& map, const Ray2& ray, double r, bool with_matrix) {
  const SegmentIntegrals table(map.shape(), ray, r);
  CTerms out{contract_gradient(map, table.values()), std::nullopt};
  if (with_matrix) out.c_mat = contract_hessian(map.shape(), table.values());
  return out;
}

GradHess ray_loglik_grad(const SpectralMap& map, const LidarRay& z, const SensorLimits& limits,
                         bool with_hessian) {
  const double length = clipped_length(map.shape().extent(), z, limits);
  const CTerms c = eval_C(map, z.ray, length, with_hessian);
  GradHess out;

  switch (z.outcome.kind) {
    case RayOutcome::Kind::Super:
      out.grad = -c.c;
      if (with_hessian) out.hess = -*c.c_mat;
      break;

    case RayOutcome::Kind::Return: {
      const BTerms b = eval_B(map, z.ray.at(z.outcome.range), with_hessian);
      const double lambda = std::max(0.5 * b.b.dot(map.flat()), kLambdaFloor);  // B . a = 2 lambda
      out.grad = b.b / lambda - c.c;
      if (with_hessian)
        out.hess = *b.b_mat / lambda - b.b * b.b.transpose() / (lambda * lambda) - *c.c_mat;
      break;
    }

    case RayOutcome::Kind::Sub: {
      // S = a' C / 2, since S is quadratic in a.
      const double s = std::max(0.5 * map.flat().dot(c.c), sub_floor(limits));
      const double odds = survival_odds(s);
      out.grad = odds * c.c;
      if (with_hessian) out.hess = odds * *c.c_mat - (odds + odds * odds) * c.c * c.c.transpose();
      break;
    }
  }
  return out;
}

ScanObjective::ScanObjective(const SpectralShape& shape, const ScanSet& scans, double min_segment)
    : shape_(shape) {
  scans.limits.validate();
  sub_floor_ = sub_floor(scans.limits);
  const Extent extent = shape.extent();
  std::vector<Eigen::VectorXd> bases;
  rays_.reserve(scans.size());
  for (const auto& z : scans.rays) {
    const double length = clipped_length(extent, z, scans.limits);
    if (length < min_segment) {
      ++dropped_;
      continue;
    }
    PreparedRay ray{z.outcome.kind, SegmentIntegrals(shape, z.ray, length), -1};
    if (z.outcome.is_return()) {
      ray.basis_column = static_cast<int>(bases.size());
      bases.push_back(basis_at(shape, z.ray.at(z.outcome.range)));
    }
    rays_.push_back(std::move(ray));
  }
  return_basis_.resize(shape.size(), static_cast<Eigen::Index>(bases.size()));
  for (std::size_t k = 0; k < bases.size(); ++k) return_basis_.col(static_cast<Eigen::Index>(k)) = bases[k];

  const int p_count = 2 * shape.rows - 1, q_count = 2 * shape.cols - 1;
  for (const auto& z : scans.rays) {
    if (!z.outcome.is_return() || clipped_length(extent, z, scans.limits) < min_segment) continue;
    const Point2 end = z.ray.at(z.outcome.range);
    const double xt = std::numbers::pi * end.x / shape.extent_x, yt = std::numbers::pi * end.y / shape.extent_y;
    for (int p = 0; p < p_count; ++p) return_cos_x_.push_back(std::cos(p * xt));
    for (int q = 0; q < q_count; ++q) return_cos_y_.push_back(std::cos(q * yt));
  }
}

double ScanObjective::loglik(const Eigen::VectorXd& coeffs) const {
  return evaluate(coeffs, false, false).loglik;
}

ScanObjective::Value ScanObjective::evaluate(const Eigen::VectorXd& coeffs, bool with_grad,
                                             bool with_hessian) const {
  with_grad = with_grad || with_hessian;
  const SpectralMap map(shape_, coeffs);
  const auto weights = coefficient_autocorrelation(map);
  const Eigen::VectorXd endpoint_f = return_basis_.transpose() * coeffs;

  Value out;
  std::vector<double> weighted_table;
  Eigen::VectorXd return_weight, return_curvature;
  std::vector<std::pair<double, const PreparedRay*>> sub_rays;
  if (with_grad) {
    weighted_table.assign(weights.size(), 0.0);
    return_weight.resize(return_basis_.cols());
    return_curvature.resize(return_basis_.cols());
  }

  for (const auto& ray : rays_) {
    const auto& t = ray.integrals.values();
    double s = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) s += weights[k] * t[k];
    s = std::max(s, 0.0);

    double table_weight = -1.0;
    switch (ray.kind) {
      case RayOutcome::Kind::Super:
        out.loglik -= s;
        break;
      case RayOutcome::Kind::Return: {
        const double f = endpoint_f[ray.basis_column];
        const double lambda = std::max(f * f, kLambdaFloor);
        out.loglik += std::log(lambda) - s;
        if (with_grad) {
          return_weight[ray.basis_column] = 2.0 * f / lambda;
          return_curvature[ray.basis_column] = 2.0 / lambda - 4.0 * f * f / (lambda * lambda);
        }
        break;
      }
      case RayOutcome::Kind::Sub: {
        s = std::max(s, sub_floor_);
        out.loglik += std::log(-std::expm1(-s));
        table_weight = survival_odds(s);
        if (with_hessian) sub_rays.emplace_back(table_weight, &ray);
        break;
      }
    }
    if (with_grad)
      for (std::size_t k = 0; k < t.size(); ++k) weighted_table[k] += table_weight * t[k];
  }

  if (!with_grad) return out;
  out.grad = return_basis_ * return_weight + contract_gradient(map, weighted_table);
  if (!with_hessian) return out;

  // Sum_k w_k phi_k phi_k^T contracts like the segment tables, with cos(p x~) cos(q y~) in place
  // of the integral, so return curvature folds into the same table.
  const std::size_t p_count = 2 * shape_.rows - 1, q_count = 2 * shape_.cols - 1;
  for (Eigen::Index k = 0; k < return_curvature.size(); ++k) {
    const double w = 0.5 * return_curvature[k];
    const double* cx = return_cos_x_.data() + k * p_count;
    const double* cy = return_cos_y_.data() + k * q_count;
    for (std::size_t p = 0; p < p_count; ++p) {
      const double wx = w * cx[p];
      double* row = weighted_table.data() + p * q_count;
      for (std::size_t q = 0; q < q_count; ++q) row[q] += wx * cy[q];
    }
  }
  Eigen::MatrixXd hess = contract_hessian(shape_, weighted_table);
  for (const auto& [odds, ray] : sub_rays) {
    const Eigen::VectorXd c = contract_gradient(map, ray->integrals.values());
    hess.noalias() -= (odds + odds * odds) * c * c.transpose();
  }
  out.hess = std::move(hess);
  return out;
}

GradHess scan_loglik_grad(const SpectralMap& map, const ScanSet& scans, bool with_hessian) {
  if (scans.empty()) {
    GradHess out{Eigen::VectorXd::Zero(map.size()), std::nullopt};
    if (with_hessian) out.hess = Eigen::MatrixXd::Zero(map.size(), map.size());
    return out;
  }
  const ScanObjective objective(map.shape(), scans);
  auto value = objective.evaluate(map.flat(), true, with_hessian);
  return {std::move(value.grad), std::move(value.hess)};
}

FdReport fd_check(const SpectralMap& map, const ScanSet& scans, double step, int order) {
  if (order != 1 && order != 2) throw InvalidInput("fd_check order must be 1 or 2");
  if (step <= 0.0) step = order == 1 ? 1e-6 : 1e-4;
  const GradHess analytic = scan_loglik_grad(map, scans, order == 2);
  const Eigen::VectorXd a0 = map.flat();
  const int n = map.size();

  auto loglik_at = [&](const Eigen::VectorXd& a) { return scan_log_likelihood(map.with_coefficients(a), scans); };
  auto h_of = [&](int i) { return step * (1.0 + std::abs(a0[i])); };
  auto rel = [](double an, double num) { return std::abs(an - num) / std::max(1.0, std::abs(num)); };

  FdReport report;
  report.order = order;
  auto consider = [&](double err, int i, int j) {
    if (err > report.max_rel_error || report.index < 0) {
      report.max_rel_error = err;
      report.index = i;
      report.index2 = j;
    }
  };

  if (order == 1) {
    for (int i = 0; i < n; ++i) {
      const double h = h_of(i);
      Eigen::VectorXd plus = a0, minus = a0;
      plus[i] += h;
      minus[i] -= h;
      consider(rel(analytic.grad[i], (loglik_at(plus) - loglik_at(minus)) / (2.0 * h)), i, -1);
    }
    return report;
  }

  for (int j = 0; j < n; ++j) {
    const double h = h_of(j);
    Eigen::VectorXd plus = a0, minus = a0;
    plus[j] += h;
    minus[j] -= h;
    const Eigen::VectorXd column = (scan_loglik_grad(map.with_coefficients(plus), scans).grad -
                                    scan_loglik_grad(map.with_coefficients(minus), scans).grad) / (2.0 * h);
    for (int i = 0; i < n; ++i) consider(rel((*analytic.hess)(i, j), column[i]), i, j);
  }
  return report;
}

}  // namespace dctmap
