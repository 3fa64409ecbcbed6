#include "dctmap/scan.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dctmap/error.hpp"

namespace dctmap {

void SensorLimits::validate() const {
  if (!(r_min >= 0.0) || !(r_min < r_max) || !std::isfinite(r_max))
    throw InvalidInput("sensor limits must satisfy 0 <= r_min < r_max < inf");
}

void ScanSet::validate() const {
  limits.validate();
  for (std::size_t k = 0; k < rays.size(); ++k) {
    const auto& z = rays[k];
    const auto fail = [k](const std::string& what) {
      throw InvalidInput("ray " + std::to_string(k) + ": " + what);
    };
    if (z.outcome.is_return() && !(z.outcome.range >= limits.r_min && z.outcome.range <= limits.r_max))
      fail("return radius outside sensor limits");
    if (z.outcome.is_super() && !(z.outcome.range > 0.0)) fail("super cutoff must be positive");
    if (z.outcome.is_sub() && !(limits.r_min > 0.0)) fail("sub ray with r_min = 0");
    if (extent) {
      if (!extent->contains(z.ray.origin())) fail("origin outside the extent");
      if (z.outcome.is_return() && !extent->contains(z.ray.at(z.outcome.range)))
        fail("return ends outside the extent");
    }
  }
}

double observed_length(const RayOutcome& outcome, const SensorLimits& limits) {
  switch (outcome.kind) {
    case RayOutcome::Kind::Sub:
      return limits.r_min;
    case RayOutcome::Kind::Return:
      return outcome.range;
    case RayOutcome::Kind::Super:
      break;
  }
  return std::min(outcome.range, limits.r_max);
}

}  // namespace dctmap
