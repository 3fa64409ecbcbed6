#include "dctmap/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dctmap/error.hpp"

namespace dctmap {

namespace {

struct NormalizedRay {
  double sx, sy, vx, vy;
};

NormalizedRay normalize(const SpectralShape& shape, const Ray2& ray) {
  const double kx = std::numbers::pi / shape.extent_x;
  const double ky = std::numbers::pi / shape.extent_y;
  return {kx * ray.origin().x, ky * ray.origin().y, kx * ray.direction().x, ky * ray.direction().y};
}

// Integral of cos(phase + freq t) over [0, r].
double integrate_phase(double freq, double phase, double r) {
  if (std::abs(freq) < kZeroFrequencyBand) return r * std::cos(phase);
  // [sin(phase + freq t)]_0^r / freq, written as a product to avoid cancellation.
  const double half = 0.5 * freq * r;
  return 2.0 * std::cos(phase + half) * std::sin(half) / freq;
}

// Integral of cos(fx (sx + vx t) + fy (sy + vy t)) over [0, r].
double integrate_cosine(const NormalizedRay& n, double r, double fx, double fy) {
  return integrate_phase(fx * n.vx + fy * n.vy, fx * n.sx + fy * n.sy, r);
}

void check_length(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidInput("segment length must be finite and >= 0");
}

double contract(const std::vector<double>& weights, const SegmentIntegrals& table) {
  const auto& t = table.values();
  double s = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) s += weights[k] * t[k];
  return std::max(s, 0.0);
}

double line_integral_with(const SpectralMap& map, const std::vector<double>& weights, const Ray2& ray,
                          double r) {
  if (r == 0.0) return 0.0;
  return contract(weights, SegmentIntegrals(map.shape(), ray, r));
}

double log_likelihood_with(const SpectralMap& map, const std::vector<double>& weights, const LidarRay& z,
                           const SensorLimits& limits) {
  const double length = clipped_length(map.shape().extent(), z, limits);
  const double s = line_integral_with(map, weights, z.ray, length);
  switch (z.outcome.kind) {
    case RayOutcome::Kind::Sub:
      return std::log(-std::expm1(-std::max(s, kLambdaFloor * limits.r_min)));
    case RayOutcome::Kind::Return:
      return std::log(std::max(eval_lambda_on_ray(map, z.ray, z.outcome.range), kLambdaFloor)) - s;
    case RayOutcome::Kind::Super:
      break;
  }
  return -s;
}

}  // namespace

double cosine_line_integral(const SpectralShape& shape, const Ray2& ray, double r, int fx, int fy) {
  check_length(r);
  return integrate_cosine(normalize(shape, ray), r, fx, fy);
}

SegmentIntegrals::SegmentIntegrals(const SpectralShape& shape, const Ray2& ray, double r)
    : p_count_(2 * shape.rows - 1), q_count_(2 * shape.cols - 1), length_(r) {
  check_length(r);
  const auto n = normalize(shape, ray);
  values_.resize(static_cast<std::size_t>(p_count_) * q_count_);
  // cos(p x) cos(q y) = (cos(p x + q y) + cos(p x - q y)) / 2
  for (int p = 0; p < p_count_; ++p) {
    for (int q = 0; q < q_count_; ++q) {
      const double plus = integrate_cosine(n, r, p, q);
      const double minus = q == 0 ? plus : integrate_cosine(n, r, p, -q);
      values_[p * q_count_ + q] = 0.5 * (plus + minus);
    }
  }
}

std::vector<double> coefficient_autocorrelation(const SpectralMap& map) {
  const auto& shape = map.shape();
  const int rows = shape.rows, cols = shape.cols;
  const int q_count = 2 * cols - 1;
  std::vector<double> w(static_cast<std::size_t>(2 * rows - 1) * q_count, 0.0);
  const auto& a = map.flat();
  for (int li = 0; li < rows; ++li) {
    for (int lj = 0; lj < rows; ++lj) {
      const int p_sum = li + lj, p_diff = std::abs(li - lj);
      for (int mi = 0; mi < cols; ++mi) {
        const double ai = 0.25 * a[li * cols + mi];
        if (ai == 0.0) continue;
        for (int mj = 0; mj < cols; ++mj) {
          const double aa = ai * a[lj * cols + mj];
          const int q_sum = mi + mj, q_diff = std::abs(mi - mj);
          w[p_sum * q_count + q_sum] += aa;
          w[p_sum * q_count + q_diff] += aa;
          w[p_diff * q_count + q_sum] += aa;
          w[p_diff * q_count + q_diff] += aa;
        }
      }
    }
  }
  return w;
}

Eigen::VectorXd contract_gradient(const SpectralMap& map, const std::vector<double>& table) {
  const int rows = map.rows(), cols = map.cols();
  const int q_count = 2 * cols - 1;
  const auto& a = map.flat();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(map.size());
  for (int li = 0; li < rows; ++li) {
    for (int lj = 0; lj < rows; ++lj) {
      const double* t_sum = table.data() + (li + lj) * q_count;
      const double* t_diff = table.data() + std::abs(li - lj) * q_count;
      for (int mi = 0; mi < cols; ++mi) {
        double acc = 0.0;
        for (int mj = 0; mj < cols; ++mj) {
          const int q_sum = mi + mj, q_diff = std::abs(mi - mj);
          acc += a[lj * cols + mj] * (t_sum[q_sum] + t_sum[q_diff] + t_diff[q_sum] + t_diff[q_diff]);
        }
        c[li * cols + mi] += 0.5 * acc;
      }
    }
  }
  return c;
}

Eigen::MatrixXd contract_hessian(const SpectralShape& shape, const std::vector<double>& table) {
  const int rows = shape.rows, cols = shape.cols;
  const int q_count = 2 * cols - 1;
  Eigen::MatrixXd c(shape.size(), shape.size());
  for (int li = 0; li < rows; ++li) {
    for (int lj = 0; lj < rows; ++lj) {
      const double* t_sum = table.data() + (li + lj) * q_count;
      const double* t_diff = table.data() + std::abs(li - lj) * q_count;
      for (int mi = 0; mi < cols; ++mi) {
        for (int mj = 0; mj < cols; ++mj) {
          const int q_sum = mi + mj, q_diff = std::abs(mi - mj);
          c(li * cols + mi, lj * cols + mj) =
              0.5 * (t_sum[q_sum] + t_sum[q_diff] + t_diff[q_sum] + t_diff[q_diff]);
        }
      }
    }
  }
  return c;
}

RayIntegral::RayIntegral(const SpectralMap& map, const Ray2& ray) {
  const auto weights = coefficient_autocorrelation(map);
  const auto n = normalize(map.shape(), ray);
  const int q_count = 2 * map.cols() - 1;
  for (int p = 0; p < 2 * map.rows() - 1; ++p) {
    for (int q = 0; q < q_count; ++q) {
      const double w = weights[p * q_count + q];
      if (w == 0.0) continue;
      // W(p, q) T(p, q) with T = (I(p, q) + I(p, -q)) / 2
      terms_.push_back({0.5 * w, p * n.vx + q * n.vy, p * n.sx + q * n.sy});
      terms_.push_back({0.5 * w, p * n.vx - q * n.vy, p * n.sx - q * n.sy});
    }
  }
}

double RayIntegral::operator()(double r) const {
  check_length(r);
  double s = 0.0;
  for (const auto& t : terms_) s += t.weight * integrate_phase(t.frequency, t.phase, r);
  return std::max(s, 0.0);
}

double line_integral_S(const SpectralMap& map, const Ray2& ray, double r) {
  check_length(r);
  return line_integral_with(map, coefficient_autocorrelation(map), ray, r);
}

double survival_N(const SpectralMap& map, const Ray2& ray, double r) {
  return std::exp(-line_integral_S(map, ray, r));
}

double return_density(const SpectralMap& map, const Ray2& ray, double r, const SensorLimits& limits) {
  limits.validate();
  if (!(r >= limits.r_min && r <= limits.r_max)) throw InvalidInput("return radius outside sensor limits");
  return eval_lambda_on_ray(map, ray, r) * survival_N(map, ray, r);
}

double prob_sub(const SpectralMap& map, const Ray2& ray, const SensorLimits& limits) {
  limits.validate();
  return -std::expm1(-line_integral_S(map, ray, limits.r_min));
}

double prob_super(const SpectralMap& map, const Ray2& ray, const SensorLimits& limits) {
  limits.validate();
  return survival_N(map, ray, limits.r_max);
}

double clipped_length(const Extent& extent, const LidarRay& z, const SensorLimits& limits) {
  const double exit = exit_distance(extent, z.ray);
  if (z.outcome.is_return()) {
    if (z.outcome.range > exit + 1e-9) throw InvalidInput("return lies beyond the map extent");
    return std::min(z.outcome.range, exit);
  }
  return std::min(observed_length(z.outcome, limits), exit);
}

double ray_log_likelihood(const SpectralMap& map, const LidarRay& z, const SensorLimits& limits) {
  return log_likelihood_with(map, coefficient_autocorrelation(map), z, limits);
}

double scan_log_likelihood(const SpectralMap& map, const ScanSet& scans) {
  if (scans.empty()) return 0.0;
  const auto weights = coefficient_autocorrelation(map);
  double total = 0.0;
  for (const auto& z : scans.rays) total += log_likelihood_with(map, weights, z, scans.limits);
  return total;
}

}  // namespace dctmap
