#include "dctmap/grid_map.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "dctmap/error.hpp"
#include "dctmap/forward_model.hpp"
#include "text_format.hpp"

namespace dctmap {

namespace {

// Cell index along one axis; a coordinate exactly on a boundary goes to the cell `dir` enters.
// The outer boundaries are closed.
std::optional<int> axis_cell(double coord, double origin, double edge, int count, double dir) {
  const double f = (coord - origin) / edge;
  int i = dir < 0.0 ? static_cast<int>(std::ceil(f)) - 1 : static_cast<int>(std::floor(f));
  if (i == count && f <= count) i = count - 1;
  if (i == -1 && f >= 0.0) i = 0;
  if (i < 0 || i >= count) return std::nullopt;
  return i;
}

// [t0, t1] of the segment [0, r] that lies inside [lo, hi] along one axis.
bool clip_axis(double s, double v, double lo, double hi, double& t0, double& t1) {
  if (v == 0.0) return s >= lo && s <= hi;
  double a = (lo - s) / v, b = (hi - s) / v;
  if (a > b) std::swap(a, b);
  t0 = std::max(t0, a);
  t1 = std::min(t1, b);
  return true;
}

}  // namespace

void GridGeometry::validate() const {
  if (cols < 1 || rows < 1) throw InvalidInput("grid needs at least one cell");
  if (!(cell_edge_x > 0.0) || !(cell_edge_y > 0.0)) throw InvalidInput("grid cell edge must be positive");
  if (!origin.finite()) throw InvalidInput("grid origin must be finite");
}

std::optional<std::pair<int, int>> cell_of(const GridGeometry& g, Point2 p, Point2 d) {
  const auto ix = axis_cell(p.x, g.origin.x, g.cell_edge_x, g.cols, d.x);
  const auto iy = axis_cell(p.y, g.origin.y, g.cell_edge_y, g.rows, d.y);
  if (!ix || !iy) return std::nullopt;
  return std::pair{*ix, *iy};
}

std::vector<CellSegment> trace_ray(const GridGeometry& g, const Ray2& ray, double r) {
  std::vector<CellSegment> out;
  if (!(r > 0.0)) return out;
  const Point2 s = ray.origin();
  const Point2 v = ray.direction();
  double t0 = 0.0, t1 = r;
  if (!clip_axis(s.x, v.x, g.origin.x, g.origin.x + g.width(), t0, t1)) return out;
  if (!clip_axis(s.y, v.y, g.origin.y, g.origin.y + g.height(), t0, t1)) return out;
  if (!(t1 > t0)) return out;

  const Point2 start = ray.at(t0);
  int ix = std::clamp(static_cast<int>(std::floor((start.x - g.origin.x) / g.cell_edge_x)), 0, g.cols - 1);
  int iy = std::clamp(static_cast<int>(std::floor((start.y - g.origin.y) / g.cell_edge_y)), 0, g.rows - 1);
  if (const auto cell = cell_of(g, start, v)) std::tie(ix, iy) = *cell;

  const int step_x = v.x > 0.0 ? 1 : -1;
  const int step_y = v.y > 0.0 ? 1 : -1;
  constexpr double inf = std::numeric_limits<double>::infinity();
  double t = t0;
  while (true) {
    // Boundaries are recomputed from the cell index so that errors do not accumulate.
    const double next_x =
        v.x == 0.0 ? inf : (g.origin.x + (ix + (v.x > 0.0 ? 1 : 0)) * g.cell_edge_x - s.x) / v.x;
    const double next_y =
        v.y == 0.0 ? inf : (g.origin.y + (iy + (v.y > 0.0 ? 1 : 0)) * g.cell_edge_y - s.y) / v.y;
    const double t_next = std::max(t, std::min({next_x, next_y, t1}));
    if (t_next > t) out.push_back({ix, iy, t, t_next});
    if (t_next >= t1) break;
    if (next_x <= next_y) ix += step_x;
    if (next_y <= next_x) iy += step_y;
    if (ix < 0 || ix >= g.cols || iy < 0 || iy >= g.rows) break;
    t = t_next;
  }
  return out;
}

GridDecayMap::GridDecayMap(GridGeometry geometry) : geometry_(geometry) {
  geometry_.validate();
  hits_.assign(geometry_.cell_count(), 0.0);
  path_.assign(geometry_.cell_count(), 0.0);
}

bool GridDecayMap::observed(int ix, int iy, bool require_hit) const {
  const int i = geometry_.index(ix, iy);
  return path_[i] > 0.0 && (!require_hit || hits_[i] > 0.0);
}

double GridDecayMap::decay(int ix, int iy) const {
  const int i = geometry_.index(ix, iy);
  return path_[i] > 0.0 ? hits_[i] / path_[i] : 0.0;
}

void GridDecayMap::set_decay(int ix, int iy, double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw InvalidInput("decay must be finite and >= 0");
  const int i = geometry_.index(ix, iy);
  hits_[i] = value;
  path_[i] = 1.0;
}

std::optional<double> GridDecayMap::sample(Point2 p) const {
  const auto& g = geometry_;
  if (!p.finite() || p.x < g.origin.x || p.y < g.origin.y || p.x > g.origin.x + g.width() ||
      p.y > g.origin.y + g.height())
    throw InvalidInput("grid query outside the map");
  const int ix = std::min(static_cast<int>(std::floor((p.x - g.origin.x) / g.cell_edge_x)), g.cols - 1);
  const int iy = std::min(static_cast<int>(std::floor((p.y - g.origin.y) / g.cell_edge_y)), g.rows - 1);
  if (!observed(ix, iy)) return std::nullopt;
  return decay(ix, iy);
}

GridDecayMap build_grid(const ScanSet& scans, const GridGeometry& geometry) {
  GridDecayMap map(geometry);
  for (const auto& z : scans.rays) {
    const double length = observed_length(z.outcome, scans.limits);
    for (const auto& seg : trace_ray(geometry, z.ray, length)) map.add_path(seg.ix, seg.iy, seg.length());
    if (z.outcome.is_return()) {
      if (const auto cell = cell_of(geometry, z.ray.at(length), z.ray.direction()))
        map.add_hit(cell->first, cell->second);
    }
  }
  return map;
}

double grid_ray_log_likelihood(const GridDecayMap& map, const LidarRay& z, const SensorLimits& limits) {
  const double length = observed_length(z.outcome, limits);
  double s = 0.0;
  for (const auto& seg : trace_ray(map.geometry(), z.ray, length)) s += map.decay(seg.ix, seg.iy) * seg.length();
  switch (z.outcome.kind) {
    case RayOutcome::Kind::Sub:
      return std::log(-std::expm1(-std::max(s, kLambdaFloor * limits.r_min)));
    case RayOutcome::Kind::Return: {
      double lambda = 0.0;
      if (const auto cell = cell_of(map.geometry(), z.ray.at(length), z.ray.direction()))
        lambda = map.decay(cell->first, cell->second);
      return std::log(std::max(lambda, kLambdaFloor)) - s;
    }
    case RayOutcome::Kind::Super:
      break;
  }
  return -s;
}

double grid_scan_log_likelihood(const GridDecayMap& map, const ScanSet& scans) {
  double total = 0.0;
  for (const auto& z : scans.rays) total += grid_ray_log_likelihood(map, z, scans.limits);
  return total;
}

void write_grid_map(std::ostream& out, const GridDecayMap& map) {
  const auto& g = map.geometry();
  out << "grid " << g.cols << ' ' << g.rows << ' ' << detail::format_double(g.cell_edge_x) << ' '
      << detail::format_double(g.cell_edge_y) << ' ' << detail::format_double(g.origin.x) << ' '
      << detail::format_double(g.origin.y) << '\n';
  for (int iy = 0; iy < g.rows; ++iy) {
    for (int ix = 0; ix < g.cols; ++ix) {
      if (ix) out << ' ';
      out << (map.observed(ix, iy) ? detail::format_double(map.decay(ix, iy)) : std::string("nan"));
    }
    out << '\n';
  }
}

GridDecayMap read_grid_map(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_tokens = [&]() {
    while (std::getline(in, line)) {
      ++line_no;
      auto tokens = detail::split_ws(line);
      if (!tokens.empty()) return tokens;
    }
    throw ParseError(line_no + 1, "unexpected end of grid map");
  };
  const auto header = next_tokens();
  if (header.size() != 7 || header[0] != "grid") throw ParseError(line_no, "expected 'grid cols rows ex ey ox oy'");
  const auto cols = detail::parse_int(header[1]);
  const auto rows = detail::parse_int(header[2]);
  double vals[4];
  for (int k = 0; k < 4; ++k) {
    const auto v = detail::parse_double(header[3 + k]);
    if (!v) throw ParseError(line_no, "non-numeric grid header");
    vals[k] = *v;
  }
  if (!cols || !rows) throw ParseError(line_no, "non-numeric grid size");
  GridDecayMap map(GridGeometry{{vals[2], vals[3]}, static_cast<int>(*cols), static_cast<int>(*rows), vals[0], vals[1]});
  for (int iy = 0; iy < *rows; ++iy) {
    const auto tokens = next_tokens();
    if (static_cast<long long>(tokens.size()) != *cols) throw ParseError(line_no, "wrong number of grid values");
    for (int ix = 0; ix < *cols; ++ix) {
      const auto v = detail::parse_double(tokens[ix]);
      if (!v) throw ParseError(line_no, "non-numeric grid value");
      if (!std::isnan(*v)) map.set_decay(ix, iy, *v);
    }
  }
  return map;
}

}  // namespace dctmap
