#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "kerek/grid.hpp"
#include "kerek/group_spec.hpp"
#include "kerek/map_expr.hpp"
#include "kerek/raster.hpp"
#include "kerek/types.hpp"

namespace kerek {

// Closed polyline on the sphere bounding an invariant disk, plus the data
// needed to audit it: the witness point on the bounded side and the two-step
// equicontinuity radii that produced the seed disk.
struct JordanCurve {
  std::vector<Vec3> points;
  Vec3 witness{0.0, 0.0, 1.0};
  double eta = 0.0, delta = 0.0;
  int resolution = 0;
  double pixel_radius = 0.0;
};

// Boundary of a group-invariant disk neighborhood of the common fixed point
// x0: rasterize the union of group images of a small metric disk, flood the
// component of the antipode, and trace the separating boundary.  When
// mask_out is given it receives the raster (1 = union, 0 = enclosed holes,
// 2 = outer component).
JordanCurve invariant_disk(const GroupSpec& spec, const SurfacePoint& x0, double epsilon,
                           int raster_resolution, CubeMap* mask_out = nullptr);

// max over curve vertices of chordal distance from g(vertex) to the curve.
double curve_invariance_defect(const JordanCurve& curve, const MapExpr& g);

// The two fixed points of an orientation-preserving regular sphere map,
// certified by winding bisection in local charts.  Deterministic order:
// descending z, then x, then y.
std::pair<SurfacePoint, SurfacePoint> fixed_point_pair(const MapExpr& f);

// Conjugation report for a sphere map topologically equivalent to a rotation.
// `from_model` maps the round model sphere (rotation about +z by `rho` turns)
// to the original sphere; `to_model` is its inverse.  `defect` is the chordal
// sup distance between to_model o f o from_model and the model rotation.
struct SphereLinearization {
  double rho = 0.0;  // turns in [0, 1)
  bool finite = false;
  int order = 0;      // rho == numerator/order when finite
  int numerator = 0;
  bool exact_rotation = false;  // input matched a rigid rotation to 1e-10
  Vec3 fix_a{0.0, 0.0, 1.0};    // sent to the north pole of the model
  Vec3 fix_b{0.0, 0.0, -1.0};   // sent to the south pole
  int rows = 0, cols = 0;
  std::vector<std::vector<Vec3>> table;  // sampled conjugator, original coords
  double defect = 0.0;
  std::function<Vec3(const Vec3&)> from_model;
  std::function<Vec3(const Vec3&)> to_model;
};

SphereLinearization linearize_sphere_map(const MapExpr& f, int resolution = 512);

// Quantitative periodicity bounds.  Distances are reported both in the
// chordal metric and in geodesic units scaled so a hemisphere has radius 1;
// the bounds are asserted on the scaled values.
struct NewmanReport {
  int period = 0;
  double d_id_norm = 0.0, d_id_chord = 0.0;
  double max_iterate_norm = 0.0, max_iterate_chord = 0.0;
  int argmax_iterate = 1;
  bool bound_two_over_p_ok = false;  // d(f, Id) > 2/p
  bool bound_unit_ok = false;        // some iterate moves a point beyond a hemisphere
};

NewmanReport newman_check(const MapExpr& f, int p, const SampleGrid& grid);

enum class InvolutionClass { Reflection, AntipodalType };
const char* involution_class_name(InvolutionClass c);

// Orientation-reversing involutions split by their fixed sets: a fixed curve
// marks a reflection conjugate, a displacement bounded away from zero marks a
// conjugate of x -> -x.  Throws Inconclusive when the measured minimum sits
// between the two thresholds.
InvolutionClass classify_involution(const MapExpr& s);

}  // namespace kerek
