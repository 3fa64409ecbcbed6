#pragma once

#include <cstdint>
#include <vector>

#include "dctmap/grid_map.hpp"
#include "dctmap/spectral_map.hpp"

namespace dctmap {

/// Draws one measurement per ray by inverting N(r) = exp(-S(r)): with u ~ U(0, 1), the range is
/// the root of S(r) = -ln u. Ray k uses the stream seeded by (seed, k), so results do not depend
/// on evaluation order. Roots are refined until |N(r) - u| <= 1e-12 (relative to u).
///
/// Rays are clipped to the field extent: a ray that leaves without reflecting is super with the
/// exit distance as cutoff (unless r_max comes first).
ScanSet simulate_scan(const SpectralMap& field, const std::vector<Ray2>& rays,
                      const SensorLimits& limits, std::uint64_t seed);
ScanSet simulate_scan(const GridDecayMap& field, const std::vector<Ray2>& rays,
                      const SensorLimits& limits, std::uint64_t seed);

/// The uniform variate used for ray `index`, in (0, 1).
double simulation_uniform(std::uint64_t seed, std::uint64_t index);

/// `count` rays with origins uniform in `extent` and uniform headings.
std::vector<Ray2> random_rays(const Extent& extent, std::size_t count, std::uint64_t seed);

/// `poses` scans of `beams` rays each, fanned over `fov` radians around a uniform heading.
std::vector<Ray2> random_scans(const Extent& extent, std::size_t poses, std::size_t beams, double fov,
                               std::uint64_t seed);

}  // namespace dctmap
