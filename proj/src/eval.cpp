#include "dctmap/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"

#include "dctmap/error.hpp"
#include "dctmap/forward_model.hpp"
#include "text_format.hpp"

namespace dctmap {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Raster blank_raster(int rows, int cols) {
  if (rows < 1 || cols < 1) throw InvalidInput("raster needs rows, cols >= 1");
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  return {rows, cols, std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 0)};
}

ScanSet prefix(const ScanSet& scans, std::size_t count) {
  ScanSet out = scans;
  if (out.rays.size() > count) out.rays.resize(count);
  return out;
}

nlohmann::json to_json(const EvalRecord& r) {
  auto optional = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"params", r.params},           {"resolution", r.resolution},         {"edge_len", r.edge_len},
          {"rmse_dct", r.rmse_dct},       {"rmse_grid", r.rmse_grid},           {"loglik_dct", r.loglik_dct},
          {"loglik_grid", r.loglik_grid}, {"fit_time_s", r.fit_time_s},         {"grid_time_s", r.grid_time_s},
          {"fit_iterations", r.fit_iterations}, {"fit_converged", r.fit_converged},
          {"loglik_gpom", optional(r.loglik_gpom)}, {"loglik_hilbert", optional(r.loglik_hilbert)}};
}

EvalRecord from_json(const nlohmann::json& j) {
  auto optional = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  EvalRecord r;
  r.params = j.at("params").get<int>();
  r.resolution = j.at("resolution").get<int>();
  r.edge_len = j.at("edge_len").get<double>();
  r.rmse_dct = j.at("rmse_dct").get<double>();
  r.rmse_grid = j.at("rmse_grid").get<double>();
  r.loglik_dct = j.at("loglik_dct").get<double>();
  r.loglik_grid = j.at("loglik_grid").get<double>();
  r.fit_time_s = j.at("fit_time_s").get<double>();
  r.grid_time_s = j.at("grid_time_s").get<double>();
  r.fit_iterations = j.at("fit_iterations").get<int>();
  r.fit_converged = j.at("fit_converged").get<bool>();
  r.loglik_gpom = optional("loglik_gpom");
  r.loglik_hilbert = optional("loglik_hilbert");
  return r;
}

}  // namespace

double p_ref(double decay) {
  if (!(decay >= 0.0)) throw InvalidInput("p_ref needs a nonnegative decay rate");
  return -std::expm1(-decay);
}

Raster rasterize(const SpectralMap& field, int rows, int cols) {
  Raster out = blank_raster(rows, cols);
  const double dx = field.extent_x() / cols, dy = field.extent_y() / rows;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * cols + c;
      out.values[i] = p_ref(eval_lambda(field, {(c + 0.5) * dx, (r + 0.5) * dy}));
      out.valid[i] = 1;
    }
  }
  return out;
}

Raster rasterize(const GridDecayMap& field, int rows, int cols) {
  Raster out = blank_raster(rows, cols);
  const auto& g = field.geometry();
  const double dx = g.width() / cols, dy = g.height() / rows;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * cols + c;
      if (const auto decay = field.sample({g.origin.x + (c + 0.5) * dx, g.origin.y + (r + 0.5) * dy})) {
        out.values[i] = p_ref(*decay);
        out.valid[i] = 1;
      }
    }
  }
  return out;
}

double rmse_pref(const Raster& candidate, const Raster& truth, const std::vector<std::uint8_t>& mask) {
  if (candidate.rows != truth.rows || candidate.cols != truth.cols || mask.size() != truth.values.size() ||
      candidate.values.size() != truth.values.size())
    throw InvalidInput("rmse: raster shapes differ");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const double d = candidate.values[i] - truth.values[i];
    sum += d * d;
    ++count;
  }
  if (count == 0) throw InvalidInput("rmse: empty mask");
  return std::sqrt(sum / static_cast<double>(count));
}

std::string render_pgm(const Raster& raster) {
  std::string out = "P5\n" + std::to_string(raster.cols) + ' ' + std::to_string(raster.rows) + "\n255\n";
  out.reserve(out.size() + raster.values.size());
  for (double v : raster.values) {
    const long level = std::lround(255.0 * std::clamp(v, 0.0, 1.0));
    out.push_back(static_cast<char>(static_cast<unsigned char>(level)));
  }
  return out;
}

EvalReport run_map_comparison(const ScanSet& scans, const EvalConfig& config) {
  if (!scans.extent) throw InvalidInput("map comparison needs scans in patch coordinates (with an extent)");
  if (scans.empty()) throw InvalidInput("map comparison needs at least one ray");
  const Extent extent = *scans.extent;
  const int n = config.truth_cells;

  const GridDecayMap truth_grid = build_grid(scans, GridGeometry::covering(extent, n, n));
  const Raster truth = config.truth_field ? rasterize(*config.truth_field, n, n) : rasterize(truth_grid, n, n);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 0);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      mask[static_cast<std::size_t>(iy) * n + ix] = truth_grid.observed(ix, iy, config.observed_requires_hit) ? 1 : 0;

  const bool separate_likelihood = scans.size() > config.likelihood_rays;
  const ScanSet likelihood_scans = prefix(scans, config.likelihood_rays);

  EvalReport report;
  for (int res : config.resolutions) {
    FitConfig fit_config = config.fit;
    fit_config.rows = fit_config.cols = res;
    EvalRecord rec;
    rec.resolution = res;
    rec.params = res * res;
    rec.edge_len = extent.x / res;

    const GridGeometry geometry = GridGeometry::covering(extent, res, res);
    auto t0 = Clock::now();
    const GridDecayMap grid = build_grid(scans, geometry);
    rec.grid_time_s = seconds_since(t0);

    t0 = Clock::now();
    const auto [dct, fit_report] = fit(scans, extent, fit_config);
    rec.fit_time_s = seconds_since(t0);
    rec.fit_iterations = fit_report.iterations;
    rec.fit_converged = fit_report.converged;

    rec.rmse_dct = rmse_pref(rasterize(dct, n, n), truth, mask);
    rec.rmse_grid = rmse_pref(rasterize(grid, n, n), truth, mask);

    if (separate_likelihood) {
      const auto [small_dct, small_report] = fit(likelihood_scans, extent, fit_config);
      rec.loglik_dct = small_report.final_loglik;
      rec.loglik_grid = grid_scan_log_likelihood(build_grid(likelihood_scans, geometry), likelihood_scans);
    } else {
      rec.loglik_dct = fit_report.final_loglik;
      rec.loglik_grid = grid_scan_log_likelihood(grid, scans);
    }
    if (config.on_maps) config.on_maps(rec, dct, grid);
    report.records.push_back(rec);
  }
  return report;
}

void write_report_jsonl(std::ostream& out, const EvalReport& report) {
  out << nlohmann::json{{"label", report.label}}.dump() << '\n';
  for (const auto& r : report.records) out << to_json(r).dump() << '\n';
}

EvalReport read_report_jsonl(std::istream& in) {
  EvalReport report;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!have_header) {
        report.label = j.at("label").get<std::string>();
        have_header = true;
      } else {
        report.records.push_back(from_json(j));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!have_header) throw ParseError(line_no + 1, "missing report header");
  return report;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  using detail::format_double;
  auto optional = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << "edge_len,params,resolution,rmse_dct,rmse_grid,delta_mu_percent,loglik_dct,loglik_grid,loglik_diff,"
         "fit_time_s,grid_time_s,fit_iterations,fit_converged,loglik_gpom,loglik_hilbert\n";
  for (const auto& r : report.records) {
    const double delta = r.rmse_grid > 0.0 ? 100.0 * (1.0 - r.rmse_dct / r.rmse_grid) : 0.0;
    out << format_double(r.edge_len) << ',' << r.params << ',' << r.resolution << ',' << format_double(r.rmse_dct)
        << ',' << format_double(r.rmse_grid) << ',' << format_double(delta) << ',' << format_double(r.loglik_dct)
        << ',' << format_double(r.loglik_grid) << ',' << format_double(r.loglik_dct - r.loglik_grid) << ','
        << format_double(r.fit_time_s) << ',' << format_double(r.grid_time_s) << ',' << r.fit_iterations << ','
        << (r.fit_converged ? 1 : 0) << ',' << optional(r.loglik_gpom) << ',' << optional(r.loglik_hilbert) << '\n';
  }
}

}  // namespace dctmap
