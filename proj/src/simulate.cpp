#include "dctmap/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "dctmap/error.hpp"
#include "dctmap/forward_model.hpp"

namespace dctmap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Uniform in (0, 1), never 0 or 1.
double open_uniform(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

// Classifies a sampled range against the observable horizon of the ray.
LidarRay classify(const Ray2& ray, double range, double exit, const SensorLimits& limits) {
  if (range < limits.r_min) return {ray, RayOutcome::sub()};
  if (range > std::min(exit, limits.r_max))
    return {ray, exit < limits.r_max ? RayOutcome::super(exit) : RayOutcome::super()};
  return {ray, RayOutcome::hit(range)};
}

// Root of s(r) = target on [lo, hi], with s nondecreasing and s(lo) <= target <= s(hi).
template <typename S, typename Rate>
double solve_monotone(const S& s, const Rate& rate, double target, double lo, double hi) {
  double r = 0.5 * (lo + hi);
  const double tol = 1e-14 * std::max(1.0, target);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = s(r) - target;
    if (std::abs(f) <= tol) break;
    if (f < 0.0) lo = r; else hi = r;
    const double slope = rate(r);
    double next = slope > 0.0 ? r - f / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == r || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    r = next;
  }
  return r;
}

}  // namespace

double simulation_uniform(std::uint64_t seed, std::uint64_t index) {
  auto gen = substream(seed, index);
  return open_uniform(gen);
}

ScanSet simulate_scan(const SpectralMap& field, const std::vector<Ray2>& rays, const SensorLimits& limits,
                      std::uint64_t seed) {
  limits.validate();
  ScanSet out;
  out.limits = limits;
  out.extent = field.shape().extent();
  out.rays.reserve(rays.size());
  for (std::size_t k = 0; k < rays.size(); ++k) {
    const Ray2& ray = rays[k];
    const double target = -std::log(simulation_uniform(seed, k));
    const double exit = exit_distance(field.shape().extent(), ray);
    const double horizon = std::min(exit, limits.r_max);
    const RayIntegral s(field, ray);
    if (s(horizon) < target) {
      out.rays.push_back(classify(ray, kInf, exit, limits));
      continue;
    }
    const double lo = std::min(limits.r_min, horizon);
    if (s(lo) >= target) {
      out.rays.push_back(classify(ray, 0.0, exit, limits));
      continue;
    }
    const double r = solve_monotone(s, [&](double t) { return eval_lambda_on_ray(field, ray, t); }, target, lo, horizon);
    out.rays.push_back(classify(ray, std::max(r, limits.r_min), exit, limits));
  }
  return out;
}

ScanSet simulate_scan(const GridDecayMap& field, const std::vector<Ray2>& rays, const SensorLimits& limits,
                      std::uint64_t seed) {
  limits.validate();
  const auto& g = field.geometry();
  const Extent extent{g.width(), g.height()};
  ScanSet out;
  out.limits = limits;
  if (g.origin.x == 0.0 && g.origin.y == 0.0) out.extent = extent;
  out.rays.reserve(rays.size());
  for (std::size_t k = 0; k < rays.size(); ++k) {
    const Ray2& ray = rays[k];
    const double target = -std::log(simulation_uniform(seed, k));
    const Ray2 local(ray.origin() - g.origin, ray.direction());
    const double exit = exit_distance(extent, local);
    double range = kInf;
    double acc = 0.0;
    for (const auto& seg : trace_ray(g, ray, std::min(exit, limits.r_max))) {
      const double rate = field.decay(seg.ix, seg.iy);
      const double next = acc + rate * seg.length();
      if (next >= target && rate > 0.0) {
        range = seg.t_enter + (target - acc) / rate;
        break;
      }
      acc = next;
    }
    out.rays.push_back(classify(ray, range, exit, limits));
  }
  return out;
}

std::vector<Ray2> random_rays(const Extent& extent, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ux(0.0, extent.x), uy(0.0, extent.y), ua(-std::numbers::pi, std::numbers::pi);
  std::vector<Ray2> rays;
  rays.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const Point2 origin{ux(gen), uy(gen)};
    rays.push_back(Ray2::from_angle(origin, ua(gen)));
  }
  return rays;
}

std::vector<Ray2> random_scans(const Extent& extent, std::size_t poses, std::size_t beams, double fov,
                               std::uint64_t seed) {
  if (beams == 0) throw InvalidInput("a scan needs at least one beam");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ux(0.0, extent.x), uy(0.0, extent.y), ua(-std::numbers::pi, std::numbers::pi);
  std::vector<Ray2> rays;
  rays.reserve(poses * beams);
  const double increment = beams > 1 ? fov / static_cast<double>(beams - 1) : 0.0;
  for (std::size_t k = 0; k < poses; ++k) {
    const Point2 origin{ux(gen), uy(gen)};
    const double heading = ua(gen);
    for (std::size_t b = 0; b < beams; ++b)
      rays.push_back(Ray2::from_angle(origin, heading - (beams > 1 ? 0.5 * fov : 0.0) + b * increment));
  }
  return rays;
}

}  // namespace dctmap
