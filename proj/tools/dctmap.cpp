#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dctmap/carmen.hpp"
#include "dctmap/derivatives.hpp"
#include "dctmap/error.hpp"
#include "dctmap/eval.hpp"
#include "dctmap/grid_map.hpp"
#include "dctmap/map_fit.hpp"
#include "dctmap/scan_io.hpp"
#include "dctmap/simulate.hpp"
#include "dctmap/threads.hpp"

namespace fs = std::filesystem;
using namespace dctmap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitUsage = 64;

struct InputOptions {
  std::string log_path;
  std::string scans_path;
  double r_min = 0.04;
  double r_max = 80.0;
  std::vector<double> corner;
  double width = 10.0;
  double height = 10.0;
  std::size_t max_rays = 10000;
  bool patch = false;
};

void add_input_options(CLI::App& cmd, InputOptions& in) {
  auto* group = cmd.add_option_group("input");
  group->add_option("--log", in.log_path, "Carmen log with FLASER records");
  group->add_option("--scans", in.scans_path, "scan set file");
  group->require_option(1);
  cmd.add_option("--r-min", in.r_min, "minimum sensor range [m]")->capture_default_str();
  cmd.add_option("--r-max", in.r_max, "maximum sensor range [m]")->capture_default_str();
  cmd.add_option("--corner", in.corner, "patch lower-left corner x y (default: densest window)")->expected(2);
  cmd.add_option("--width", in.width, "patch width [m]")->capture_default_str();
  cmd.add_option("--height", in.height, "patch height [m]")->capture_default_str();
  cmd.add_option("--max-rays", in.max_rays, "rays kept in the patch")->capture_default_str();
  cmd.add_flag("--patch", in.patch, "extract a patch from a scan set file as well");
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

ScanSet load_scans(const InputOptions& in) {
  ScanSet scans;
  bool needs_patch = in.patch;
  if (!in.log_path.empty()) {
    auto file = open_in(in.log_path);
    const SensorLimits limits{in.r_min, in.r_max};
    try {
      scans = scans_to_rays(parse_carmen(file), limits);
    } catch (const ParseError& e) {
      throw std::runtime_error(in.log_path + ":" + std::to_string(e.line()) + ": " + e.what());
    }
    needs_patch = true;
  } else {
    auto file = open_in(in.scans_path);
    try {
      scans = read_scan_set(file);
    } catch (const ParseError& e) {
      throw std::runtime_error(in.scans_path + ":" + std::to_string(e.line()) + ": " + e.what());
    }
    needs_patch = needs_patch || !scans.extent || !in.corner.empty();
  }
  if (needs_patch) {
    PatchSpec patch;
    if (!in.corner.empty()) patch.corner = Point2{in.corner[0], in.corner[1]};
    patch.width = in.width;
    patch.height = in.height;
    patch.max_rays = in.max_rays;
    scans = extract_patch(scans, patch);
  } else if (scans.rays.size() > in.max_rays) {
    scans.rays.resize(in.max_rays);
  }
  if (scans.empty()) throw std::runtime_error("no rays inside the patch");
  return scans;
}

struct FitOptions {
  int rows = 10;
  int cols = 10;
  int max_iters = 100;
  double rel_tol = 1e-3;
  std::string init = "grid";
  double noise_scale = 0.01;
  std::uint64_t seed = 0;
  std::string hessian = "newton";
};

void add_fit_options(CLI::App& cmd, FitOptions& f, bool with_shape) {
  if (with_shape) {
    cmd.add_option("--rows", f.rows, "coefficient rows L (along x)")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--cols", f.cols, "coefficient columns M (along y)")->capture_default_str()->check(CLI::PositiveNumber);
  }
  cmd.add_option("--max-iters", f.max_iters, "optimizer iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
  cmd.add_option("--rel-tol", f.rel_tol, "relative log-likelihood change for convergence")->capture_default_str();
  cmd.add_option("--init", f.init, "initialization")->capture_default_str()->check(CLI::IsMember({"grid", "noise"}));
  cmd.add_option("--noise-scale", f.noise_scale, "noise scale for --init noise")->capture_default_str();
  cmd.add_option("--fit-seed", f.seed, "seed for --init noise")->capture_default_str();
  cmd.add_option("--hessian", f.hessian, "step type")->capture_default_str()->check(CLI::IsMember({"newton", "gradient"}));
}

FitConfig to_config(const FitOptions& f) {
  FitConfig c;
  c.rows = f.rows;
  c.cols = f.cols;
  c.max_iters = f.max_iters;
  c.rel_tol = f.rel_tol;
  c.init = f.init == "noise" ? InitMode::ConstantPlusNoise : InitMode::FromGridDCT;
  c.noise_scale = f.noise_scale;
  c.seed = f.seed;
  c.hessian_mode = f.hessian == "gradient" ? HessianMode::GradientOnly : HessianMode::Newton;
  c.validate();
  return c;
}

nlohmann::json fit_report_json(const FitReport& r) {
  return {{"final_loglik", r.final_loglik},     {"iterations", r.iterations},
          {"converged", r.converged},           {"wall_time_s", r.wall_time},
          {"dropped_rays", r.dropped_rays},     {"initial_grad_norm", r.initial_grad_norm},
          {"final_grad_norm", r.final_grad_norm}, {"loglik_trace", r.loglik_trace}};
}

bool is_grid_file(const std::string& path) {
  auto in = open_in(path);
  std::string tag;
  in >> tag;
  return tag == "grid";
}

SpectralMap load_spectral(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_spectral_map(in);
  } catch (const ParseError& e) {
    throw std::runtime_error(path + ":" + std::to_string(e.line()) + ": " + e.what());
  }
}

GridDecayMap load_grid(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_grid_map(in);
  } catch (const ParseError& e) {
    throw std::runtime_error(path + ":" + std::to_string(e.line()) + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& bytes) {
  auto out = open_out(path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral (DCT) decay-rate maps from lidar scans"};
  app.set_config("--config", "", "TOML/INI file with option defaults; command-line flags take precedence");
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (0: available parallelism)")->envname("DCTMAP_THREADS");

  // build-dct
  InputOptions dct_in;
  FitOptions dct_fit;
  std::string dct_out, dct_report;
  auto* build_dct = app.add_subcommand("build-dct", "fit a DCT decay-rate map");
  add_input_options(*build_dct, dct_in);
  add_fit_options(*build_dct, dct_fit, true);
  build_dct->add_option("--out", dct_out, "map file")->required();
  build_dct->add_option("--report", dct_report, "fit report (JSON)");

  // build-grid
  InputOptions grid_in;
  int grid_res = 20;
  std::string grid_out;
  auto* build_grid_cmd = app.add_subcommand("build-grid", "build a decay-rate grid map");
  add_input_options(*build_grid_cmd, grid_in);
  build_grid_cmd->add_option("--resolution", grid_res, "cells per side")->capture_default_str()->check(CLI::PositiveNumber);
  build_grid_cmd->add_option("--out", grid_out, "map file")->required();

  // simulate
  std::string sim_field, sim_out, sim_carmen;
  std::uint64_t sim_seed = 0;
  std::size_t sim_rays = 0, sim_poses = 0, sim_beams = 181;
  double sim_fov_deg = 180.0, sim_r_min = 0.04, sim_r_max = 80.0;
  auto* simulate = app.add_subcommand("simulate", "draw exact measurements from a map");
  simulate->add_option("--field", sim_field, "spectral or grid map file")->required();
  simulate->add_option("--seed", sim_seed, "random seed")->required();
  auto* ray_group = simulate->add_option_group("rays");
  ray_group->add_option("--rays", sim_rays, "independent rays with uniform origin and heading");
  ray_group->add_option("--poses", sim_poses, "scan poses, each a fan of --beams rays");
  ray_group->require_option(1);
  simulate->add_option("--beams", sim_beams, "beams per pose")->capture_default_str();
  simulate->add_option("--fov", sim_fov_deg, "field of view per pose [deg]")->capture_default_str();
  simulate->add_option("--r-min", sim_r_min, "minimum sensor range [m]")->capture_default_str();
  simulate->add_option("--r-max", sim_r_max, "maximum sensor range [m]")->capture_default_str();
  simulate->add_option("--out", sim_out, "scan set file")->required();
  simulate->add_option("--carmen", sim_carmen, "also write the scans as a Carmen log (requires --poses)");

  // eval
  InputOptions eval_in;
  FitOptions eval_fit;
  std::vector<int> eval_res{10, 13, 20, 29, 40};
  int truth_cells = 200;
  std::size_t likelihood_rays = 500;
  std::string truth_field, eval_csv, eval_jsonl, eval_images, eval_label;
  bool require_hit = false;
  auto* eval = app.add_subcommand("eval", "compare DCT and grid maps of equal parameter count");
  add_input_options(*eval, eval_in);
  add_fit_options(*eval, eval_fit, false);
  eval->add_option("--resolutions", eval_res, "cells per side of each compared pair")->capture_default_str();
  eval->add_option("--truth-cells", truth_cells, "truth raster cells per side")->capture_default_str();
  eval->add_option("--likelihood-rays", likelihood_rays, "rays used for the likelihood comparison")->capture_default_str();
  eval->add_option("--truth-field", truth_field, "known generating spectral map");
  eval->add_flag("--observed-requires-hit", require_hit, "truth cells count as observed only with a reflection");
  eval->add_option("--csv", eval_csv, "CSV report")->required();
  eval->add_option("--jsonl", eval_jsonl, "JSON-lines report");
  eval->add_option("--images", eval_images, "directory for PGM images of every map");
  eval->add_option("--label", eval_label, "report label");

  // render
  std::string render_map, render_out;
  int render_rows = 200, render_cols = 200;
  auto* render = app.add_subcommand("render", "render a map as a p_ref PGM image");
  render->add_option("--map", render_map, "spectral or grid map file")->required();
  render->add_option("--rows", render_rows, "image rows (spectral maps)")->capture_default_str();
  render->add_option("--cols", render_cols, "image columns (spectral maps)")->capture_default_str();
  render->add_option("--out", render_out, "PGM file")->required();

  // check-grads
  std::string check_map, check_scans;
  int check_order = 1;
  double check_step = 0.0, check_tol = 0.0;
  auto* check = app.add_subcommand("check-grads", "compare analytic derivatives with finite differences");
  check->add_option("--map", check_map, "spectral map file")->required();
  check->add_option("--scans", check_scans, "scan set file")->required();
  check->add_option("--order", check_order, "1: gradient, 2: Hessian")->capture_default_str()->check(CLI::IsMember({1, 2}));
  check->add_option("--step", check_step, "finite-difference step (0: default)");
  check->add_option("--tol", check_tol, "pass threshold (0: 1e-5 for order 1, 1e-4 for order 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  set_thread_count(threads);

  try {
    if (*build_dct) {
      const ScanSet scans = load_scans(dct_in);
      const auto [map, report] = fit(scans, *scans.extent, to_config(dct_fit));
      auto out = open_out(dct_out);
      write_spectral_map(out, map);
      if (!dct_report.empty()) write_text(dct_report, fit_report_json(report).dump(2) + "\n");
      std::printf("build-dct: %dx%d map, %zu rays, loglik %.6f, %d iterations, %s -> %s\n", map.rows(), map.cols(),
                  scans.size(), report.final_loglik, report.iterations,
                  report.converged ? "converged" : "not converged", dct_out.c_str());
      return report.converged ? kExitOk : kExitNotConverged;
    }

    if (*build_grid_cmd) {
      const ScanSet scans = load_scans(grid_in);
      const GridDecayMap map = build_grid(scans, GridGeometry::covering(*scans.extent, grid_res, grid_res));
      auto out = open_out(grid_out);
      write_grid_map(out, map);
      std::printf("build-grid: %dx%d grid, %zu rays, loglik %.6f -> %s\n", grid_res, grid_res, scans.size(),
                  grid_scan_log_likelihood(map, scans), grid_out.c_str());
      return kExitOk;
    }

    if (*simulate) {
      const bool grid_field = is_grid_file(sim_field);
      Extent extent{};
      std::optional<SpectralMap> spectral;
      std::optional<GridDecayMap> grid;
      if (grid_field) {
        grid = load_grid(sim_field);
        extent = {grid->geometry().width(), grid->geometry().height()};
      } else {
        spectral = load_spectral(sim_field);
        extent = spectral->shape().extent();
      }
      const double fov = sim_fov_deg * std::numbers::pi / 180.0;
      const std::vector<Ray2> rays = sim_rays > 0 ? random_rays(extent, sim_rays, sim_seed)
                                                  : random_scans(extent, sim_poses, sim_beams, fov, sim_seed);
      const SensorLimits limits{sim_r_min, sim_r_max};
      const ScanSet scans =
          grid ? simulate_scan(*grid, rays, limits, sim_seed + 1) : simulate_scan(*spectral, rays, limits, sim_seed + 1);
      auto out = open_out(sim_out);
      write_scan_set(out, scans);
      if (!sim_carmen.empty()) {
        if (sim_poses == 0) throw InvalidInput("--carmen requires --poses");
        std::vector<RawScan> raw(sim_poses);
        for (std::size_t p = 0; p < sim_poses; ++p) {
          RawScan& r = raw[p];
          const Ray2& first = rays[p * sim_beams];
          const Point2 d = rays[p * sim_beams + sim_beams / 2].direction();
          r.pose = {first.origin().x, first.origin().y, std::atan2(d.y, d.x)};
          if (sim_beams % 2 == 0) {
            const Point2 a = rays[p * sim_beams + sim_beams / 2 - 1].direction();
            r.pose.heading = std::atan2(a.y + d.y, a.x + d.x);
          }
          r.timestamp = static_cast<double>(p);
          for (std::size_t b = 0; b < sim_beams; ++b) {
            const RayOutcome& o = scans.rays[p * sim_beams + b].outcome;
            r.ranges.push_back(o.is_return() ? o.range : o.is_sub() ? 0.0 : limits.r_max);
          }
        }
        auto log = open_out(sim_carmen);
        log << "PARAM laser_front_laser_fov " << sim_fov_deg << "\n";
        write_carmen(log, raw);
      }
      std::size_t sub = 0, ret = 0;
      for (const auto& z : scans.rays) {
        sub += z.outcome.is_sub() ? 1 : 0;
        ret += z.outcome.is_return() ? 1 : 0;
      }
      std::printf("simulate: %zu rays (%zu sub, %zu return, %zu super), seed %llu -> %s\n", scans.size(), sub, ret,
                  scans.size() - sub - ret, static_cast<unsigned long long>(sim_seed), sim_out.c_str());
      return kExitOk;
    }

    if (*eval) {
      const ScanSet scans = load_scans(eval_in);
      EvalConfig config;
      config.resolutions = eval_res;
      config.truth_cells = truth_cells;
      config.likelihood_rays = likelihood_rays;
      config.fit = to_config(eval_fit);
      config.observed_requires_hit = require_hit;
      if (!truth_field.empty()) config.truth_field = load_spectral(truth_field);
      if (!eval_images.empty()) {
        config.on_maps = [&](const EvalRecord& rec, const SpectralMap& dct, const GridDecayMap& grid) {
          const std::string stem = eval_images + "/" + std::to_string(rec.resolution);
          write_text(stem + "_dct.pgm", render_pgm(rasterize(dct, truth_cells, truth_cells)));
          write_text(stem + "_grid.pgm", render_pgm(rasterize(grid, rec.resolution, rec.resolution)));
        };
      }
      EvalReport report = run_map_comparison(scans, config);
      report.label = eval_label.empty() ? (eval_in.log_path.empty() ? eval_in.scans_path : eval_in.log_path) : eval_label;
      {
        auto out = open_out(eval_csv);
        write_report_csv(out, report);
      }
      if (!eval_jsonl.empty()) {
        auto out = open_out(eval_jsonl);
        write_report_jsonl(out, report);
      }
      int dct_better = 0;
      for (const auto& r : report.records) dct_better += r.loglik_dct >= r.loglik_grid ? 1 : 0;
      std::printf("eval: %zu rays, %zu resolutions, DCT likelihood >= grid in %d -> %s\n", scans.size(),
                  report.records.size(), dct_better, eval_csv.c_str());
      return kExitOk;
    }

    if (*render) {
      const Raster raster = is_grid_file(render_map)
                                ? [&] {
                                    const GridDecayMap g = load_grid(render_map);
                                    return rasterize(g, g.geometry().rows, g.geometry().cols);
                                  }()
                                : rasterize(load_spectral(render_map), render_rows, render_cols);
      write_text(render_out, render_pgm(raster));
      std::printf("render: %dx%d -> %s\n", raster.cols, raster.rows, render_out.c_str());
      return kExitOk;
    }

    if (*check) {
      const SpectralMap map = load_spectral(check_map);
      auto in = open_in(check_scans);
      const ScanSet scans = read_scan_set(in);
      const FdReport r = fd_check(map, scans, check_step, check_order);
      const double tol = check_tol > 0.0 ? check_tol : (check_order == 1 ? 1e-5 : 1e-4);
      const bool pass = r.max_rel_error < tol;
      nlohmann::json j{{"order", r.order},  {"max_rel_error", r.max_rel_error}, {"index", r.index},
                       {"index2", r.index2}, {"tolerance", tol},                {"pass", pass}};
      std::printf("%s\n", j.dump().c_str());
      return pass ? kExitOk : kExitError;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dctmap: %s\n", e.what());
    return kExitError;
  }
  return kExitUsage;
}
