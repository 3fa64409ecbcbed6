#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "../oracles.hpp"
#include "dctmap/error.hpp"
#include "dctmap/eval.hpp"
#include "dctmap/simulate.hpp"

using namespace dctmap;

TEST_CASE("p_ref") {
  CHECK(p_ref(0.0) == 0.0);
  CHECK(p_ref(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p_ref(10.0) == doctest::Approx(0.9999546).epsilon(1e-7));
  CHECK_THROWS_AS(p_ref(-1e-3), InvalidInput);
  double prev = -1.0;
  for (double l = 0.0; l < 30.0; l += 0.25) {
    CHECK(p_ref(l) > prev);
    CHECK(p_ref(l) < 1.0);
    prev = p_ref(l);
  }
}

TEST_CASE("rasterize") {
  Eigen::MatrixXd c(1, 1);
  c << 0.8;
  const Raster flat = rasterize(SpectralMap(c, 10, 10), 7, 5);
  CHECK(flat.rows == 7);
  CHECK(flat.cols == 5);
  for (double v : flat.values) CHECK(v == doctest::Approx(p_ref(0.64)).epsilon(1e-15));

  GridDecayMap grid(GridGeometry::square({0, 0}, 4, 3, 0.5));
  grid.set_decay(1, 2, 2.0);
  grid.set_decay(3, 0, 0.25);
  const Raster g = rasterize(grid, 3, 4);
  for (int iy = 0; iy < 3; ++iy)
    for (int ix = 0; ix < 4; ++ix) {
      CHECK(g.at(iy, ix) == (grid.observed(ix, iy) ? p_ref(grid.decay(ix, iy)) : 0.0));
      CHECK(static_cast<bool>(g.valid[iy * 4 + ix]) == grid.observed(ix, iy));
    }

  std::mt19937_64 gen(41);
  const SpectralMap map(oracle::random_coeffs(3, 3, gen), 10, 8);
  const Raster fine = rasterize(map, 200, 200);
  std::uniform_int_distribution<int> cell(0, 199);
  for (int k = 0; k < 100; ++k) {
    const int row = cell(gen), col = cell(gen);
    const double x = (col + 0.5) * 10 / 200.0, y = (row + 0.5) * 8 / 200.0;
    const double lambda = oracle::lambda_double_sum(map.matrix(), 10, 8, x, y);
    CHECK(fine.at(row, col) == doctest::Approx(1 - std::exp(-lambda)).epsilon(1e-12));
  }
}

TEST_CASE("rmse") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Raster a, b, c;
  a.rows = b.rows = c.rows = 20;
  a.cols = b.cols = c.cols = 30;
  std::vector<std::uint8_t> mask(600);
  for (int i = 0; i < 600; ++i) {
    a.values.push_back(u(gen));
    b.values.push_back(u(gen));
    c.values.push_back(u(gen));
    mask[i] = u(gen) < 0.7;
  }
  CHECK(rmse_pref(a, a, mask) == 0.0);
  Raster shifted = a;
  for (auto& v : shifted.values) v += 0.1;
  CHECK(rmse_pref(shifted, a, mask) == doctest::Approx(0.1).epsilon(1e-12));

  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < 600; ++i)
    if (mask[i]) {
      sum += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
      ++count;
    }
  CHECK(rmse_pref(a, b, mask) == doctest::Approx(std::sqrt(sum / count)).epsilon(1e-12));
  CHECK(rmse_pref(a, b, mask) == rmse_pref(b, a, mask));
  CHECK(rmse_pref(a, c, mask) <= rmse_pref(a, b, mask) + rmse_pref(b, c, mask));

  CHECK_THROWS_AS(rmse_pref(a, b, std::vector<std::uint8_t>(600, 0)), InvalidInput);
  Raster small;
  small.rows = 1;
  small.cols = 1;
  small.values = {0.0};
  CHECK_THROWS_AS(rmse_pref(a, small, mask), InvalidInput);
}

TEST_CASE("pgm bytes") {
  Raster one;
  one.rows = one.cols = 1;
  one.values = {1.0};
  CHECK(render_pgm(one) == std::string("P5\n1 1\n255\n\xff", 12));
  one.values = {0.0};
  CHECK(render_pgm(one) == std::string("P5\n1 1\n255\n\x00", 12));

  Raster fixture;
  fixture.rows = fixture.cols = 2;
  fixture.values = {0.0, 0.5, 0.25, 1.0};
  const std::string expected = std::string("P5\n2 2\n255\n") + '\x00' + '\x80' + '\x40' + '\xff';
  CHECK(render_pgm(fixture) == expected);
}

TEST_CASE("report round trip") {
  EvalReport report;
  report.label = "scene \"a\"";
  EvalRecord r;
  r.params = 400;
  r.resolution = 20;
  r.edge_len = 0.5;
  r.rmse_dct = 0.1234567890123;
  r.rmse_grid = 0.2;
  r.loglik_dct = -123.456;
  r.loglik_grid = -234.5;
  r.fit_time_s = 1.5;
  r.grid_time_s = 0.001;
  r.fit_iterations = 17;
  r.fit_converged = true;
  report.records.push_back(r);
  r.loglik_gpom = -99.0;
  r.fit_converged = false;
  report.records.push_back(r);
  std::stringstream ss;
  write_report_jsonl(ss, report);
  CHECK(read_report_jsonl(ss) == report);

  std::ostringstream csv;
  write_report_csv(csv, report);
  const std::string text = csv.str();
  CHECK(text.rfind("edge_len,params,resolution,rmse_dct,rmse_grid,delta_mu_percent", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);

  std::istringstream bad("{\"label\": \"x\"}\n{not json}\n");
  CHECK_THROWS_AS(read_report_jsonl(bad), ParseError);
}

TEST_CASE("constant scene comparison") {
  Eigen::MatrixXd c(1, 1);
  c << 0.6;
  const SpectralMap field(c, 10, 10);
  const ScanSet scans = simulate_scan(field, random_rays({10, 10}, 400, 43), {0.04, 80}, 44);
  EvalConfig config;
  config.resolutions = {1, 2};
  config.truth_cells = 50;
  config.truth_field = field;
  const EvalReport report = run_map_comparison(scans, config);
  REQUIRE(report.records.size() == 2);
  for (const auto& r : report.records) {
    CHECK(r.params == r.resolution * r.resolution);
    CHECK(r.edge_len == doctest::Approx(10.0 / r.resolution));
    CHECK(r.rmse_dct < 0.05);
    CHECK(r.rmse_grid < 0.1);
    CHECK(std::isfinite(r.loglik_dct));
    CHECK(std::isfinite(r.loglik_grid));
    CHECK(r.fit_time_s >= 0.0);
  }
  CHECK(report.records[0].rmse_grid < 0.05);

  ScanSet no_extent = scans;
  no_extent.extent.reset();
  CHECK_THROWS_AS(run_map_comparison(no_extent, config), InvalidInput);
}
