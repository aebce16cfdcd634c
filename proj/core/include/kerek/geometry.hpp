#pragma once

#include <vector>

#include "kerek/grid.hpp"
#include "kerek/map_expr.hpp"
#include "kerek/metric.hpp"

namespace kerek {

// max over the grid of metric(f(x), g(x)).  Monotone nondecreasing along the
// doubling refinement chain because the grids are nested.
double sup_distance(const MapExpr& f, const MapExpr& g, const SampleGrid& grid,
                    const Metric& metric);

// Brouwer degree of a sphere map: signed spherical areas of the images of an
// icosahedral mesh subdivided mesh_resolution times per edge, summed / 4 pi.
// Throws NonIntegralDegree when the sum is more than 0.1 from an integer.
int map_degree(const MapExpr& f, int mesh_resolution);

// Empirical equicontinuity modulus phi(eps) of a family on a sampled space:
// the largest alpha (found by bisection over pair scans) such that every
// sampled pair with d(x, y) < alpha has d(g x, g y) < eps for all members g.
// Throws DegenerateFamily when a member fails the invertibility check.
double modulus_of_continuity(const std::vector<MapExpr>& family, double epsilon,
                             const SampleGrid& grid, const Metric& metric);

}  // namespace kerek
