#include "dctmap/scan_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dctmap/error.hpp"
#include "text_format.hpp"

namespace dctmap {

Point2 densest_window(const ScanSet& scans, double width, double height) {
  if (!(width > 0.0) || !(height > 0.0)) throw InvalidInput("patch size must be positive");
  std::vector<Point2> ends;
  for (const auto& z : scans.rays)
    if (z.outcome.is_return()) ends.push_back(z.ray.at(z.outcome.range));
  if (ends.empty()) return {0.0, 0.0};

  double min_x = ends[0].x, min_y = ends[0].y, max_x = min_x, max_y = min_y;
  for (const auto& p : ends) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  constexpr double bin = 1.0;
  const double x0 = std::floor(min_x), y0 = std::floor(min_y);
  const int nx = static_cast<int>(std::floor(max_x - x0)) + 1;
  const int ny = static_cast<int>(std::floor(max_y - y0)) + 1;
  // Summed-area table of endpoint counts.
  std::vector<long> sat(static_cast<std::size_t>(nx + 1) * (ny + 1), 0);
  auto at = [&](int i, int j) -> long& { return sat[static_cast<std::size_t>(j) * (nx + 1) + i]; };
  for (const auto& p : ends) {
    const int i = std::min(nx - 1, static_cast<int>((p.x - x0) / bin));
    const int j = std::min(ny - 1, static_cast<int>((p.y - y0) / bin));
    ++at(i + 1, j + 1);
  }
  for (int j = 1; j <= ny; ++j)
    for (int i = 1; i <= nx; ++i) at(i, j) += at(i - 1, j) + at(i, j - 1) - at(i - 1, j - 1);

  const int wx = std::max(1, static_cast<int>(std::floor(width / bin)));
  const int wy = std::max(1, static_cast<int>(std::floor(height / bin)));
  long best = -1;
  Point2 corner{x0, y0};
  for (int i = 0; i <= std::max(0, nx - wx); ++i) {
    for (int j = 0; j <= std::max(0, ny - wy); ++j) {
      const int i1 = std::min(nx, i + wx), j1 = std::min(ny, j + wy);
      const long count = at(i1, j1) - at(i, j1) - at(i1, j) + at(i, j);
      if (count > best) {
        best = count;
        corner = {x0 + i * bin, y0 + j * bin};
      }
    }
  }
  return corner;
}

ScanSet extract_patch(const ScanSet& scans, const PatchSpec& patch) {
  if (!(patch.width > 0.0) || !(patch.height > 0.0)) throw InvalidInput("patch size must be positive");
  const Point2 corner = patch.corner ? *patch.corner : densest_window(scans, patch.width, patch.height);
  const Extent extent{patch.width, patch.height};

  ScanSet out;
  out.limits = scans.limits;
  out.extent = extent;
  for (const auto& z : scans.rays) {
    if (out.rays.size() >= patch.max_rays) break;
    const Point2 local = z.ray.origin() - corner;
    if (!extent.contains(local, 0.0)) continue;
    const Ray2 ray(local, z.ray.direction());
    const double exit = exit_distance(extent, ray);
    RayOutcome outcome = z.outcome;
    if (outcome.is_return() && outcome.range > exit) {
      outcome = RayOutcome::super(exit);
    } else if (outcome.is_super() && std::min(outcome.range, scans.limits.r_max) > exit) {
      outcome = RayOutcome::super(exit);
    }
    if (outcome.is_super() && !(outcome.range > 0.0)) continue;  // starts on the boundary, heading out
    out.rays.push_back({ray, outcome});
  }
  return out;
}

void write_scan_set(std::ostream& out, const ScanSet& scans) {
  using detail::format_double;
  const Extent extent = scans.extent.value_or(Extent{0.0, 0.0});
  out << "scanset " << format_double(scans.limits.r_min) << ' ' << format_double(scans.limits.r_max) << ' '
      << format_double(extent.x) << ' ' << format_double(extent.y) << '\n';
  for (const auto& z : scans.rays) {
    const char tag = z.outcome.is_sub() ? 'S' : z.outcome.is_return() ? 'R' : 'P';
    const Point2 s = z.ray.origin(), v = z.ray.direction();
    out << tag << ' ' << format_double(s.x) << ' ' << format_double(s.y) << ' ' << format_double(v.x) << ' '
        << format_double(v.y);
    if (z.outcome.is_return() || z.outcome.has_cutoff()) out << ' ' << format_double(z.outcome.range);
    out << '\n';
  }
}

ScanSet read_scan_set(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  ScanSet scans;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = detail::split_ws(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;
    std::vector<double> nums;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const auto v = detail::parse_double(tokens[k]);
      if (!v) throw ParseError(line_no, "non-numeric token '" + std::string(tokens[k]) + "'");
      nums.push_back(*v);
    }
    if (!have_header) {
      if (tokens[0] != "scanset" || nums.size() != 4) throw ParseError(line_no, "expected 'scanset r_min r_max X Y'");
      scans.limits = {nums[0], nums[1]};
      if (nums[2] > 0.0 && nums[3] > 0.0) scans.extent = Extent{nums[2], nums[3]};
      have_header = true;
      continue;
    }
    const std::string_view tag = tokens[0];
    const bool ok = (tag == "S" && nums.size() == 4) || (tag == "R" && nums.size() == 5) ||
                    (tag == "P" && (nums.size() == 4 || nums.size() == 5));
    if (!ok) throw ParseError(line_no, "malformed ray record");
    Ray2 ray;
    try {
      ray = Ray2({nums[0], nums[1]}, {nums[2], nums[3]});
    } catch (const InvalidInput& e) {
      throw ParseError(line_no, e.what());
    }
    RayOutcome outcome = tag == "S"   ? RayOutcome::sub()
                         : tag == "R" ? RayOutcome::hit(nums[4])
                         : nums.size() == 5 ? RayOutcome::super(nums[4])
                                            : RayOutcome::super();
    scans.rays.push_back({ray, outcome});
  }
  if (!have_header) throw ParseError(line_no + 1, "missing scanset header");
  return scans;
}

}  // namespace dctmap
