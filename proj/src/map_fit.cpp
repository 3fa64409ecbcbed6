#include "dctmap/map_fit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "dctmap/derivatives.hpp"
#include "dctmap/error.hpp"
#include "dctmap/grid_map.hpp"

namespace dctmap {

namespace {

// Rays whose clipped segment is shorter than this carry no information and are skipped.
constexpr double kMinSegment = 1e-9;

double relative_change(double delta, double value) { return std::abs(delta) / std::max(1.0, std::abs(value)); }

// Dogleg step for maximizing the quadratic model g'p - p'Bp/2, B = -H.
Eigen::VectorXd trust_region_step(const Eigen::VectorXd& g, const Eigen::MatrixXd& neg_hess, double radius) {
  const double g_norm = g.norm();
  const double g_curv = g.dot(neg_hess * g);
  Eigen::VectorXd cauchy = g_curv > 0.0 ? Eigen::VectorXd((g_norm * g_norm / g_curv) * g) : Eigen::VectorXd(g);
  if (g_curv <= 0.0 || cauchy.norm() >= radius) return (radius / g_norm) * g;

  const Eigen::LLT<Eigen::MatrixXd> llt(neg_hess);
  if (llt.info() != Eigen::Success) return cauchy;  // indefinite: stay on the gradient direction
  const Eigen::VectorXd newton = llt.solve(g);
  if (!newton.allFinite() || newton.dot(g) <= 0.0) return cauchy;
  if (newton.norm() <= radius) return newton;

  // Point on the segment cauchy -> newton at distance `radius`.
  const Eigen::VectorXd d = newton - cauchy;
  const double a = d.squaredNorm();
  const double b = 2.0 * cauchy.dot(d);
  const double c = cauchy.squaredNorm() - radius * radius;
  const double tau = (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
  return cauchy + tau * d;
}

}  // namespace

void FitConfig::validate() const {
  if (rows < 1 || cols < 1) throw InvalidInput("fit needs rows, cols >= 1");
  if (max_iters < 1) throw InvalidInput("max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw InvalidInput("rel_tol must be positive");
  if (!(noise_scale >= 0.0)) throw InvalidInput("noise_scale must be >= 0");
}

Eigen::MatrixXd forward_cosine_transform(const Eigen::MatrixXd& values) {
  const Eigen::Index rows = values.rows(), cols = values.cols();
  auto basis = [](Eigen::Index n) {
    // basis(k, c) = w_k / n cos(k pi (c + 1/2) / n), the inverse of sampling at midpoints
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index c = 0; c < n; ++c)
        b(k, c) = (k == 0 ? 1.0 : 2.0) / static_cast<double>(n) *
                  std::cos(static_cast<double>(k) * std::numbers::pi * (static_cast<double>(c) + 0.5) / static_cast<double>(n));
    return b;
  };
  return basis(rows) * values * basis(cols).transpose();
}

SpectralMap initial_map(const ScanSet& scans, const Extent& extent, const FitConfig& config) {
  config.validate();
  const GridDecayMap grid = build_grid(scans, GridGeometry::covering(extent, config.rows, config.cols));

  double sum = 0.0;
  int observed = 0;
  for (int ix = 0; ix < config.rows; ++ix)
    for (int iy = 0; iy < config.cols; ++iy)
      if (grid.observed(ix, iy)) {
        sum += grid.decay(ix, iy);
        ++observed;
      }
  const double mean_decay = observed > 0 ? sum / observed : 0.0;

  if (config.init == InitMode::FromGridDCT && observed > 0) {
    Eigen::MatrixXd root(config.rows, config.cols);
    for (int ix = 0; ix < config.rows; ++ix)
      for (int iy = 0; iy < config.cols; ++iy)
        root(ix, iy) = std::sqrt(grid.observed(ix, iy) ? grid.decay(ix, iy) : mean_decay);
    return SpectralMap(forward_cosine_transform(root), extent.x, extent.y);
  }

  Eigen::MatrixXd coeffs(config.rows, config.cols);
  std::mt19937_64 gen(config.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int l = 0; l < config.rows; ++l)
    for (int m = 0; m < config.cols; ++m) coeffs(l, m) = config.noise_scale * noise(gen);
  coeffs(0, 0) = std::sqrt(mean_decay);
  return SpectralMap(coeffs, extent.x, extent.y);
}

std::pair<SpectralMap, FitReport> fit(const ScanSet& scans, const Extent& extent, const FitConfig& config) {
  config.validate();
  if (scans.empty()) throw InvalidInput("cannot fit a map to an empty scan set");
  return fit_from(scans, initial_map(scans, extent, config), config);
}

std::pair<SpectralMap, FitReport> fit_from(const ScanSet& scans, const SpectralMap& start, const FitConfig& config) {
  config.validate();
  if (scans.empty()) throw InvalidInput("cannot fit a map to an empty scan set");
  const auto clock_start = std::chrono::steady_clock::now();
  const bool newton = config.hessian_mode == HessianMode::Newton;

  const ScanObjective objective(start.shape(), scans, kMinSegment);
  Eigen::VectorXd a = start.flat();
  auto current = objective.evaluate(a, true, newton);
  if (!std::isfinite(current.loglik) || !current.grad.allFinite())
    throw InitFailure("log-likelihood is not finite at the initial map");

  FitReport report;
  report.dropped_rays = objective.dropped();
  report.loglik_trace.push_back(current.loglik);
  report.initial_grad_norm = current.grad.lpNorm<Eigen::Infinity>();
  double radius = std::max(0.1, 0.5 * a.norm());

  for (int iter = 0; iter < config.max_iters; ++iter) {
    ++report.iterations;
    const Eigen::VectorXd& g = current.grad;
    if (g.lpNorm<Eigen::Infinity>() == 0.0) {
      report.converged = true;
      break;
    }

    Eigen::VectorXd step;
    double predicted;
    if (newton) {
      const Eigen::MatrixXd neg_hess = -*current.hess;
      step = trust_region_step(g, neg_hess, radius);
      predicted = g.dot(step) - 0.5 * step.dot(neg_hess * step);
    } else {
      step = (radius / g.norm()) * g;
      predicted = g.dot(step);
    }

    const double trial = objective.loglik(a + step);
    const double gain = trial - current.loglik;
    const double ratio = predicted > 0.0 ? gain / predicted : -1.0;
    const double step_norm = step.norm();

    if (newton) {
      if (ratio < 0.25) radius = 0.25 * step_norm;
      else if (ratio > 0.75 && step_norm >= 0.99 * radius) radius *= 2.0;
    } else {
      // Armijo backtracking on the gradient direction, carried across iterations via the radius.
      if (ratio < 1e-4) radius *= 0.5;
      else radius = 2.0 * step_norm;
    }

    if (std::isfinite(trial) && gain > 0.0 && ratio > 1e-4) {
      a += step;
      current = objective.evaluate(a, true, newton);
      report.loglik_trace.push_back(current.loglik);
      if (relative_change(gain, current.loglik) < config.rel_tol) {
        report.converged = true;
        break;
      }
    }
    if (radius < 1e-12 * std::max(1.0, a.norm())) {
      // No representable step improves the objective.
      report.converged = true;
      break;
    }
  }

  report.final_loglik = current.loglik;
  report.final_grad_norm = current.grad.lpNorm<Eigen::Infinity>();
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return {start.with_coefficients(a), report};
}

}  // namespace dctmap
