#pragma once

#include <memory>
#include <vector>

#include "kerek/map_expr.hpp"

namespace kerek {

// Distances on the three spaces.
//   circle: arc length in turns (default) or chord of the unit-circle embedding
//   disk:   euclidean
//   sphere: chord (default), geodesic in radians, or geodesic normalized so
//           a hemisphere has radius 1 (geodesic / (pi/2))
// averaged() is the Haar average over a finite group: the arithmetic mean of
// base distances over all listed elements, which the listed elements preserve.
class Metric {
public:
  static Metric intrinsic(Space s);
  static Metric chordal(Space s);
  static Metric geodesic();             // sphere, radians
  static Metric geodesic_normalized();  // sphere, hemisphere radius 1
  static Metric averaged(const Metric& base, std::vector<MapExpr> group_elements);

  double operator()(const SurfacePoint& a, const SurfacePoint& b) const;
  Space space() const { return space_; }
  // Upper bound for distances under this metric (bisection bracket).
  double diameter() const;

private:
  enum class Kind { CircleArc, CircleChord, DiskEuclid, SphereChord, SphereGeo, SphereGeoNorm };
  Metric(Kind k, Space s) : kind_(k), space_(s) {}
  double base_distance(const SurfacePoint& a, const SurfacePoint& b) const;

  Kind kind_;
  Space space_;
  std::shared_ptr<const std::vector<MapExpr>> group_;  // set for averaged metrics
};

}  // namespace kerek
