#include "dctmap/carmen.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "dctmap/error.hpp"
#include "text_format.hpp"

namespace dctmap {

namespace {

constexpr double kDefaultFov = std::numbers::pi;

double to_number(std::string_view token, std::size_t line_no) {
  const auto v = detail::parse_double(token);
  if (!v) throw ParseError(line_no, "non-numeric token '" + std::string(token) + "'");
  return *v;
}

}  // namespace

std::vector<RawScan> parse_carmen(std::istream& in) {
  std::vector<RawScan> scans;
  double fov = kDefaultFov;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = detail::split_ws(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;

    if (tokens[0] == "PARAM") {
      if (tokens.size() >= 3 && tokens[1] == "laser_front_laser_fov")
        fov = to_number(tokens[2], line_no) * std::numbers::pi / 180.0;
      continue;
    }
    if (tokens[0] != "FLASER") continue;

    if (tokens.size() < 2) throw ParseError(line_no, "FLASER record without reading count");
    const auto count = detail::parse_int(tokens[1]);
    if (!count || *count < 0) throw ParseError(line_no, "invalid FLASER reading count");
    const std::size_t n = static_cast<std::size_t>(*count);
    // count, n ranges, corrected pose (3), odometry pose (3)
    if (tokens.size() < n + 8)
      throw ParseError(line_no, "FLASER record declares " + std::to_string(n) + " readings but is truncated");

    RawScan scan;
    scan.ranges.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double r = to_number(tokens[2 + k], line_no);
      if (r < 0.0) throw ParseError(line_no, "negative range reading");
      scan.ranges.push_back(r);
    }
    const std::size_t p = 2 + n;
    scan.pose = {to_number(tokens[p], line_no), to_number(tokens[p + 1], line_no), to_number(tokens[p + 2], line_no)};
    for (std::size_t k = p + 3; k < p + 6; ++k) to_number(tokens[k], line_no);
    if (tokens.size() > p + 6) scan.timestamp = to_number(tokens[p + 6], line_no);
    scan.start_angle = -0.5 * fov;
    scan.angle_increment = n > 1 ? fov / static_cast<double>(n - 1) : 0.0;
    scans.push_back(std::move(scan));
  }
  return scans;
}

void write_carmen(std::ostream& out, const std::vector<RawScan>& scans) {
  for (const auto& scan : scans) {
    out << "FLASER " << scan.ranges.size();
    for (double r : scan.ranges) out << ' ' << detail::format_double(r);
    const std::string pose = detail::format_double(scan.pose.x) + ' ' + detail::format_double(scan.pose.y) + ' ' +
                             detail::format_double(scan.pose.heading);
    out << ' ' << pose << ' ' << pose << ' ' << detail::format_double(scan.timestamp) << " dctmap "
        << detail::format_double(scan.timestamp) << '\n';
  }
}

ScanSet scans_to_rays(const std::vector<RawScan>& raw, const SensorLimits& limits) {
  limits.validate();
  ScanSet out;
  out.limits = limits;
  for (const auto& scan : raw) {
    const Point2 origin{scan.pose.x, scan.pose.y};
    for (std::size_t k = 0; k < scan.ranges.size(); ++k) {
      const double angle = scan.pose.heading + scan.start_angle + static_cast<double>(k) * scan.angle_increment;
      const double r = scan.ranges[k];
      RayOutcome outcome = r >= limits.r_max   ? RayOutcome::super()
                           : r <= limits.r_min ? RayOutcome::sub()
                                               : RayOutcome::hit(r);
      out.rays.push_back({Ray2::from_angle(origin, angle), outcome});
    }
  }
  return out;
}

}  // namespace dctmap
