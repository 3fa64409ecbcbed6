#pragma once

#include <iosfwd>
#include <vector>

#include "dctmap/scan.hpp"

namespace dctmap {

struct RobotPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

/// One FLASER record. Beam k points at pose.heading + start_angle + k * angle_increment.
struct RawScan {
  RobotPose pose;
  std::vector<double> ranges;
  double start_angle = 0.0;
  double angle_increment = 0.0;
  double timestamp = 0.0;
};

/// Reads FLASER records of a Carmen log:
///
///   FLASER n r_1 ... r_n x y theta odom_x odom_y odom_theta [ipc_timestamp host logger_timestamp]
///
/// Other record types and '#' comments are skipped. Beams span a 180 degree field of view
/// unless PARAM laser_front_laser_fov (degrees) appears earlier in the log. Throws ParseError
/// naming the line for truncated records or non-numeric tokens.
std::vector<RawScan> parse_carmen(std::istream& in);

/// Writes one FLASER line per scan; the odometry pose repeats the corrected pose.
void write_carmen(std::ostream& out, const std::vector<RawScan>& scans);

/// One ray per range reading, classified against `limits`: range <= r_min is sub, range >= r_max
/// is super, anything between is a return.
ScanSet scans_to_rays(const std::vector<RawScan>& raw, const SensorLimits& limits);

}  // namespace dctmap
