#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dctmap/grid_map.hpp"
#include "dctmap/map_fit.hpp"
#include "dctmap/spectral_map.hpp"

namespace dctmap {

/// Probability that a ray reflects within 1 m of a homogeneous medium with this decay rate.
double p_ref(double decay);

/// Row-major raster, row = y index, col = x index. `valid` marks cells carrying a value.
struct Raster {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * cols + col]; }
};

/// p_ref of the field at the midpoints of a rows x cols tiling of the map extent.
Raster rasterize(const SpectralMap& field, int rows, int cols);
/// Same for a grid map over its own geometry; unobserved cells are invalid with value 0.
Raster rasterize(const GridDecayMap& field, int rows, int cols);

/// Root mean squared difference over the cells set in `mask`. Throws InvalidInput on shape
/// mismatch or an empty mask.
double rmse_pref(const Raster& candidate, const Raster& truth, const std::vector<std::uint8_t>& mask);

/// Binary 8-bit PGM (P5), pixel = round(255 p_ref), rows written in raster order.
std::string render_pgm(const Raster& raster);

struct EvalRecord {
  int params = 0;     ///< L * M == grid cell count
  int resolution = 0;
  double edge_len = 0.0;
  double rmse_dct = 0.0;
  double rmse_grid = 0.0;
  double loglik_dct = 0.0;
  double loglik_grid = 0.0;
  double fit_time_s = 0.0;
  double grid_time_s = 0.0;
  int fit_iterations = 0;
  bool fit_converged = false;
  /// Reserved for externally computed baselines; never filled here.
  std::optional<double> loglik_gpom;
  std::optional<double> loglik_hilbert;

  bool operator==(const EvalRecord&) const = default;
};

struct EvalReport {
  std::string label;
  std::vector<EvalRecord> records;

  bool operator==(const EvalReport&) const = default;
};

struct EvalConfig {
  std::vector<int> resolutions{10, 13, 20, 29, 40};
  int truth_cells = 200;
  /// Likelihoods are compared on the first `likelihood_rays` rays, with both maps rebuilt from
  /// that subset when the scan set is larger.
  std::size_t likelihood_rays = 500;
  FitConfig fit;
  /// Known generating field (synthetic scenes). When absent the truth is a fine grid map built
  /// from the scans.
  std::optional<SpectralMap> truth_field;
  /// Count a truth cell as observed only if it holds a reflection.
  bool observed_requires_hit = false;
  /// Called once per resolution with the finished record and the two maps it compares.
  std::function<void(const EvalRecord&, const SpectralMap&, const GridDecayMap&)> on_maps;
};

/// Map-value and likelihood comparison between DCT maps and grid maps of equal parameter count.
/// `scans` must carry an extent.
EvalReport run_map_comparison(const ScanSet& scans, const EvalConfig& config);

/// One JSON object per line: a header line {"label": ...} then one line per record.
void write_report_jsonl(std::ostream& out, const EvalReport& report);
EvalReport read_report_jsonl(std::istream& in);
/// CSV with one row per resolution, columns in the order of EvalRecord plus delta_mu_percent.
void write_report_csv(std::ostream& out, const EvalReport& report);

}  // namespace dctmap
