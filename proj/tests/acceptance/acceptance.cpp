// One PASS/FAIL line per acceptance criterion. Usage: acceptance <dctmap-cli> <work-dir>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "../oracles.hpp"
#include "dctmap/carmen.hpp"
#include "dctmap/derivatives.hpp"
#include "dctmap/eval.hpp"
#include "dctmap/forward_model.hpp"
#include "dctmap/grid_map.hpp"
#include "dctmap/map_fit.hpp"
#include "dctmap/scan_io.hpp"
#include "dctmap/simulate.hpp"

using namespace dctmap;
namespace fs = std::filesystem;

namespace {

// Criterion 6 threshold. Oracle run before freezing: 3x3 fits on 2000 rays over seeds 0..7 gave
// RMSE 0.0147 to 0.0367 (mean 0.026).
constexpr double kRoundTripRmse = 0.05;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Ray2 ray_with_reach(std::mt19937_64& gen, const Extent& e, double reach) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (true) {
    const Ray2 ray = Ray2::from_angle({e.x * u(gen), e.y * u(gen)}, 2 * std::numbers::pi * u(gen));
    if (exit_distance(e, ray) >= reach) return ray;
  }
}

// True when some frequency pair other than (0, 0) has a vanishing phase rate along the ray.
bool hits_zero_band(int rows, int cols, const Extent& e, const Ray2& ray) {
  const double vx = std::numbers::pi * ray.direction().x / e.x, vy = std::numbers::pi * ray.direction().y / e.y;
  for (int p = 0; p < 2 * rows - 1; ++p)
    for (int q = 0; q < 2 * cols - 1; ++q)
      if ((p || q) && (std::abs(p * vx + q * vy) < 1e-9 || std::abs(p * vx - q * vy) < 1e-9)) return true;
  return false;
}

void criterion_1() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 4);
  double worst = 0.0;
  int zero_band = 0;
  for (int k = 0; k < 100; ++k) {
    const int rows = size(gen), cols = size(gen);
    const Extent e{k % 2 ? 10.0 : 8.0, k % 2 ? 10.0 : 6.0};
    const SpectralMap map(oracle::random_coeffs(rows, cols, gen), e.x, e.y);
    Ray2 ray = ray_with_reach(gen, e, 1.0);
    if (k % 5 == 0) {
      // axis-aligned, diagonal in normalized coordinates, or along a (1, 2) frequency null
      const Point2 s{0.5 + (e.x - 1) * u(gen), 0.5 + (e.y - 1) * u(gen)};
      const int kind = (k / 5) % 4;
      const Point2 d = kind == 0 ? Point2{1, 0} : kind == 1 ? Point2{0, -1} : kind == 2 ? Point2{e.x, e.y} : Point2{2 * e.x, -e.y};
      ray = Ray2::normalized(s, d);
      if (exit_distance(e, ray) < 0.5) ray = Ray2(s, -1.0 * ray.direction());
    }
    const double r = exit_distance(e, ray) * (0.2 + 0.8 * u(gen));
    const double s = line_integral_S(map, ray, r);
    const double q = oracle::line_integral_quadrature(map.matrix(), e.x, e.y, ray, 0.0, r);
    worst = std::max(worst, std::abs(s - q) / std::max(1.0, s));
    zero_band += hits_zero_band(rows, cols, e, ray) ? 1 : 0;
  }
  const double t = seconds_since(t0);
  report(1, worst < 1e-8 && zero_band >= 10 && t < 30.0,
         fmt("line integral vs quadrature: max rel err %.2e (< 1e-8), zero-band instances %d (>= 10), %.1f s (< 30 s)",
             worst, zero_band, t));
}

void criterion_2() {
  std::mt19937_64 gen(1002);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Extent e{10, 10};
    const SpectralMap map(oracle::random_coeffs(1 + k % 4, 1 + (k / 4) % 4, gen, 0.6), e.x, e.y);
    const Ray2 ray = ray_with_reach(gen, e, 3.0);
    const SensorLimits limits{0.05 + 0.3 * u(gen), 3.0};
    const double density = oracle::integrate(
        [&](double r) { return return_density(map, ray, r, limits); }, limits.r_min, limits.r_max, 1e-11);
    const double total = prob_sub(map, ray, limits) + density + prob_super(map, ray, limits);
    worst = std::max(worst, std::abs(total - 1.0));
  }
  report(2, worst < 1e-6, fmt("mixed density sums to one: max |total - 1| %.2e over 50 instances (< 1e-6)", worst));
}

void criterion_3() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1003);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SensorLimits limits{0.3, 5.0};
  const Extent e{10, 10};
  double worst_grad = 0.0, worst_hess = 0.0;
  for (int k = 0; k < 20; ++k) {
    const SpectralMap map(oracle::random_coeffs(4, 4, gen, 0.5), e.x, e.y);
    const Ray2 ray = ray_with_reach(gen, e, limits.r_max);
    for (const RayOutcome outcome : {RayOutcome::sub(), RayOutcome::super(), RayOutcome::hit(0.3 + 4.5 * u(gen))}) {
      const LidarRay z{ray, outcome};
      const GradHess an = ray_loglik_grad(map, z, limits, true);
      const Eigen::VectorXd a0 = map.flat();
      for (int i = 0; i < map.size(); ++i) {
        const double h = 1e-6 * (1 + std::abs(a0[i]));
        Eigen::VectorXd p = a0, m = a0;
        p[i] += h;
        m[i] -= h;
        const double fd = (ray_log_likelihood(map.with_coefficients(p), z, limits) -
                           ray_log_likelihood(map.with_coefficients(m), z, limits)) / (2 * h);
        worst_grad = std::max(worst_grad, rel(an.grad[i], fd));
        const Eigen::VectorXd column = (ray_loglik_grad(map.with_coefficients(p), z, limits).grad -
                                        ray_loglik_grad(map.with_coefficients(m), z, limits).grad) / (2 * h);
        for (int j = 0; j < map.size(); ++j) worst_hess = std::max(worst_hess, rel((*an.hess)(j, i), column[j]));
      }
    }
  }
  const double t = seconds_since(t0);
  report(3, worst_grad < 1e-5 && worst_hess < 1e-4 && t < 60.0,
         fmt("derivatives vs central differences, 20 instances x 3 outcomes, L=M=4: gradient %.2e (< 1e-5), "
             "Hessian %.2e (< 1e-4), %.1f s (< 60 s)",
             worst_grad, worst_hess, t));
}

void criterion_4() {
  std::mt19937_64 gen(1004);
  const Extent e{10, 10};
  const SensorLimits limits{0.04, 80};
  double worst_ks = 0.0, worst_residual = 0.0;
  for (int f = 0; f < 5; ++f) {
    const SpectralMap field(oracle::random_coeffs(3, 3, gen, 0.5), e.x, e.y);
    const Ray2 ray = ray_with_reach(gen, e, 6.0);
    const std::uint64_t seed = 500 + f;
    const ScanSet sim = simulate_scan(field, std::vector<Ray2>(10000, ray), limits, seed);
    std::vector<double> ranges;
    for (std::size_t k = 0; k < sim.rays.size(); ++k) {
      const auto& z = sim.rays[k];
      if (!z.outcome.is_return()) continue;
      ranges.push_back(z.outcome.range);
      const double n = std::exp(-oracle::line_integral_quadrature(field.matrix(), e.x, e.y, ray, 0.0, z.outcome.range, 1e-13));
      worst_residual = std::max(worst_residual, std::abs(n - simulation_uniform(seed, k)));
    }
    std::sort(ranges.begin(), ranges.end());
    // Return ranges are conditioned on [r_min, exit]; CDF by cumulative quadrature between samples.
    const double horizon = std::min(exit_distance(e, ray), limits.r_max);
    auto rate = [&](double t) { return oracle::lambda_double_sum(field.matrix(), e.x, e.y, ray.at(t).x, ray.at(t).y); };
    const double s_lo = oracle::integrate(rate, 0.0, limits.r_min, 1e-13);
    const double s_hi = s_lo + oracle::integrate(rate, limits.r_min, horizon, 1e-13);
    const double mass = std::exp(-s_lo) - std::exp(-s_hi);
    double s = s_lo, prev = limits.r_min, d = 0.0;
    const double n = static_cast<double>(ranges.size());
    for (std::size_t k = 0; k < ranges.size(); ++k) {
      s += oracle::integrate(rate, prev, ranges[k], 1e-13);
      prev = ranges[k];
      const double cdf = (std::exp(-s_lo) - std::exp(-s)) / mass;
      d = std::max({d, std::abs(cdf - k / n), std::abs(cdf - (k + 1) / n)});
    }
    worst_ks = std::max(worst_ks, d);
  }
  report(4, worst_ks < 0.02 && worst_residual < 1e-9,
         fmt("simulator: max KS statistic %.4f over 5 fields (< 0.02), max root residual %.2e (< 1e-9)", worst_ks,
             worst_residual));
}

void criterion_5() {
  const double c2 = 0.4;
  Eigen::MatrixXd a(1, 1);
  a << std::sqrt(c2);
  const Extent e{10, 10};
  const SensorLimits limits{0.04, 80};
  const ScanSet scans = simulate_scan(SpectralMap(a, e.x, e.y), random_rays(e, 2000, 1005), limits, 1006);
  double hits = 0.0, length = 0.0;
  for (const auto& z : scans.rays) {
    if (z.outcome.is_sub()) continue;
    length += std::min(observed_length(z.outcome, limits), exit_distance(e, z.ray));
    hits += z.outcome.is_return() ? 1.0 : 0.0;
  }
  ScanSet no_sub = scans;
  std::erase_if(no_sub.rays, [](const LidarRay& z) { return z.outcome.is_sub(); });
  FitConfig config;
  config.rows = config.cols = 1;
  const auto [map, fit_report] = fit(no_sub, e, config);
  const double estimate = map.coeff(0, 0) * map.coeff(0, 0);
  const double closed = hits / length;
  const double err = std::abs(estimate - closed) / closed;
  report(5, err < 0.05,
         fmt("constant field: fitted %.5f vs hits/length %.5f, rel diff %.2e (< 5%%); %zu of 2000 sub rays excluded",
             estimate, closed, err, scans.size() - no_sub.size()));
}

void criterion_6() {
  const auto t0 = Clock::now();
  Eigen::MatrixXd a(3, 3);
  a << 0.9, 0.25, -0.1, 0.2, -0.15, 0.05, -0.1, 0.1, 0.2;
  const SpectralMap truth(a, 10, 10);
  const ScanSet scans = simulate_scan(truth, random_rays({10, 10}, 2000, 60), {0.04, 80}, 70);
  FitConfig config;
  config.rows = config.cols = 3;
  const auto [map, fit_report] = fit(scans, {10, 10}, config);
  const Raster ref = rasterize(truth, 200, 200);
  const double rmse = rmse_pref(rasterize(map, 200, 200), ref, ref.valid);
  const double t = seconds_since(t0);
  report(6, rmse < kRoundTripRmse && t < 300.0,
         fmt("3x3 round trip on 2000 rays: p_ref RMSE %.4f (< %.2f frozen), %.1f s (< 300 s)", rmse, kRoundTripRmse, t));
}

struct SceneResult {
  int loglik_wins = 0;
  int rmse_wins = 0;
  int pairs = 0;
  std::string rows;
};

// Five seeded scenes: a random 5x5 spectral field (a_00 = 1, other coefficients N(0, 0.3^2)) on a
// 10 m patch observed by 500 poses of 20 beams. Maps for the RMSE use all 10^4 rays; the
// likelihood comparison rebuilds both maps from the first 500 rays and scores those rays.
SceneResult run_scenes() {
  SceneResult out;
  for (int s = 0; s < 5; ++s) {
    std::mt19937_64 gen(100 + s);
    Eigen::MatrixXd a = oracle::random_coeffs(5, 5, gen, 0.3);
    a(0, 0) = 1.0;
    const SpectralMap truth(a, 10, 10);
    const ScanSet scans =
        simulate_scan(truth, random_scans({10, 10}, 500, 20, std::numbers::pi, 200 + s), {0.04, 80}, 300 + s);
    EvalConfig config;
    config.resolutions = {20, 29, 40};
    config.truth_field = truth;
    config.likelihood_rays = 500;
    const EvalReport rep = run_map_comparison(scans, config);
    for (const auto& r : rep.records) {
      ++out.pairs;
      out.loglik_wins += r.loglik_dct >= r.loglik_grid ? 1 : 0;
      out.rmse_wins += r.rmse_dct <= r.rmse_grid ? 1 : 0;
      out.rows += fmt("    scene %d  %2dx%-2d  loglik dct %9.2f grid %9.2f   rmse dct %.4f grid %.4f   fit %.1f s\n", s,
                      r.resolution, r.resolution, r.loglik_dct, r.loglik_grid, r.rmse_dct, r.rmse_grid, r.fit_time_s);
    }
  }
  return out;
}

bool run(const std::string& command) {
  const int status = std::system(command.c_str());
  return status == 0;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criteria_7_8(const std::string& cli, const fs::path& work) {
  const SceneResult scenes = run_scenes();
  std::fputs(scenes.rows.c_str(), stdout);
  report(7, scenes.loglik_wins >= 12,
         fmt("DCT log-likelihood >= grid at 20/29/40 cells per side: %d of %d pairs (>= 12)", scenes.loglik_wins,
             scenes.pairs));

  // Carmen log written from simulated scans, then the eval command end to end.
  const fs::path dir = work / "carmen";
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "field.txt");
    f << "3 3 10 10\n0.9 0.25 -0.1\n0.2 -0.15 0.05\n-0.1 0.1 0.2\n";
  }
  const std::string q = "\"";
  const bool sim_ok = run(q + cli + q + " simulate --field " + q + (dir / "field.txt").string() + q +
                          " --seed 11 --poses 60 --beams 20 --out " + q + (dir / "scans.txt").string() + q +
                          " --carmen " + q + (dir / "log.txt").string() + q + " > /dev/null");
  const fs::path csv = dir / "report.csv";
  fs::remove(csv);
  const bool eval_ok = sim_ok && run(q + cli + q + " eval --log " + q + (dir / "log.txt").string() + q +
                                     " --corner 0 0 --csv " + q + csv.string() + q + " > /dev/null");
  const std::string text = fs::exists(csv) ? slurp(csv) : std::string();
  const bool csv_ok = eval_ok && text.rfind("edge_len,params,resolution,rmse_dct,rmse_grid,delta_mu_percent", 0) == 0 &&
                      std::count(text.begin(), text.end(), '\n') == 6;
  report(8, scenes.rmse_wins >= 12 && csv_ok,
         fmt("DCT RMSE <= grid at 20/29/40 cells per side: %d of %d pairs (>= 12); eval on a Carmen log wrote the "
             "5-row CSV: %s",
             scenes.rmse_wins, scenes.pairs, csv_ok ? "yes" : "no"));
}

void criterion_9() {
  std::mt19937_64 gen(1009);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Extent e{10, 10};
  const SensorLimits limits{0.05, 20};
  ScanSet scans;
  scans.limits = limits;
  scans.extent = e;
  for (int k = 0; k < 200; ++k) {
    const Ray2 ray = ray_with_reach(gen, e, 0.5);
    const double exit = exit_distance(e, ray);
    const RayOutcome o = k % 3 == 0 ? RayOutcome::sub() : k % 3 == 1 ? RayOutcome::super() : RayOutcome::hit(0.05 + (std::min(exit, 20.0) - 0.05) * u(gen));
    scans.rays.push_back({ray, o});
  }
  Eigen::MatrixXd c(1, 1);
  c << 0.8;
  GridDecayMap grid(GridGeometry::covering(e, 7, 7));
  for (int ix = 0; ix < 7; ++ix)
    for (int iy = 0; iy < 7; ++iy) grid.set_decay(ix, iy, 0.64);
  const double spectral = scan_log_likelihood(SpectralMap(c, e.x, e.y), scans);
  const double gridded = grid_scan_log_likelihood(grid, scans);
  const double cross = std::abs(spectral - gridded) / std::abs(spectral);

  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Eigen::MatrixXd a = oracle::random_coeffs(1 + k % 5, 1 + (k / 5) % 5, gen);
    const double x = 10 * u(gen), y = 10 * u(gen);
    const double sq = eval_lambda(SpectralMap(a, 10, 10), {x, y});
    const double expanded = oracle::lambda_sign_expansion(a, 10, 10, x, y);
    worst = std::max(worst, std::abs(sq - expanded) / std::max(1.0, std::abs(expanded)));
  }
  report(9, cross < 1e-8 && worst < 1e-12,
         fmt("constant field spectral vs grid likelihood rel diff %.2e (< 1e-8); squared sum vs sign expansion %.2e "
             "(< 1e-12)",
             cross, worst));
}

void criterion_10(const std::string& cli, const fs::path& work) {
  const std::string q = "\"";
  bool ok = true;
  std::vector<fs::path> dirs{work / "det_a", work / "det_b"};
  for (const auto& d : dirs) {
    fs::remove_all(d);
    fs::create_directories(d);
    {
      std::ofstream f(d / "field.txt");
      f << "2 3 10 10\n0.8 0.2 -0.1\n0.15 0.1 -0.2\n";
    }
    auto p = [&](const char* name) { return q + (d / name).string() + q; };
    ok = run(q + cli + q + " simulate --field " + p("field.txt") + " --seed 99 --rays 1500 --out " + p("scans.txt") +
             " > /dev/null") &&
         ok;
    ok = run(q + cli + q + " build-dct --scans " + p("scans.txt") + " --rows 4 --cols 4 --out " + p("map.txt") +
             " > /dev/null") &&
         ok;
    ok = run(q + cli + q + " build-grid --scans " + p("scans.txt") + " --resolution 4 --out " + p("grid.txt") +
             " > /dev/null") &&
         ok;
    ok = run(q + cli + q + " render --map " + p("map.txt") + " --out " + p("map.pgm") + " > /dev/null") && ok;
  }
  int identical = 0;
  const char* artifacts[] = {"scans.txt", "map.txt", "grid.txt", "map.pgm"};
  for (const char* name : artifacts) {
    const std::string a = slurp(dirs[0] / name), b = slurp(dirs[1] / name);
    identical += !a.empty() && a == b ? 1 : 0;
  }
  report(10, ok && identical == 4,
         fmt("two seeded simulate/build-dct/build-grid/render runs: %d of 4 artifacts byte-identical", identical));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <dctmap-cli> <work-dir>\n", argv[0]);
    return 64;
  }
  const std::string cli = argv[1];
  const fs::path work = argv[2];
  fs::create_directories(work);

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criteria_7_8(cli, work);
  criterion_9();
  criterion_10(cli, work);

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
