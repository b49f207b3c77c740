#pragma once

#include "skalg/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace skalg {

/// Hypersurface x^coordinate = value removed from the chart together with a
/// margin on each side.
struct Exclusion {
  std::size_t coordinate = 0;
  double value = 0.0;
  double margin = 0.1;
};

/// Single-chart domain: a coordinate box with excluded hypersurfaces.
struct Chart {
  std::vector<std::string> coordinates;
  Vector lower;
  Vector upper;
  std::vector<Exclusion> exclusions;

  std::size_t dim() const { return coordinates.size(); }
  bool in_box(const BasePoint& x) const;
  bool admissible(const BasePoint& x) const;
  /// Distance to the nearest excluded hypersurface minus its margin; negative
  /// inside an exclusion zone, +inf without exclusions.
  double exclusion_clearance(const BasePoint& x) const;

  /// Box [-1, 1]^n with no exclusions.
  static Chart unit_box(std::vector<std::string> coordinates);
};

/// Deterministic low-discrepancy samples: a Halton sequence shifted by a
/// seed-dependent Cranley-Patterson rotation, with exclusion zones rejected.
std::vector<BasePoint> sample_points(const Chart& chart, std::size_t count, std::uint64_t seed);

/// Gaussian fiber vectors of unit Euclidean norm, reproducible from the seed.
std::vector<FiberPoint> sample_fibers(std::size_t rank, std::size_t count, std::uint64_t seed);

}  // namespace skalg
