#pragma once

#include <vector>

#include "kerek/types.hpp"

namespace kerek {

// Deterministic sample grids.  Point count is a pure function of
// (space, resolution), and grids are nested under doubling the resolution:
//   circle  n points at i/n
//   disk    center + n rings at radius (i+1)/n, 4n angles j/(4n) per ring
//   sphere  union of Fibonacci lattices at m, m/2, m/4, ... (m >= 4),
//           2 m^2 points per level; the union keeps refinement monotone
struct SampleGrid {
  Space space;
  int resolution;
  std::vector<SurfacePoint> points;
};

SampleGrid make_grid(Space space, int resolution);

// One Fibonacci lattice level of 2 m^2 points (no cascade).
std::vector<Vec3> fibonacci_lattice(int m);

}  // namespace kerek
