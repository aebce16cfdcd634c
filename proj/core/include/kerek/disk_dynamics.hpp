#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "kerek/grid.hpp"
#include "kerek/group_spec.hpp"
#include "kerek/types.hpp"

namespace kerek {

// ---------------------------------------------------------------------------
// Fixed points by winding-number bisection on the displacement field.
// ---------------------------------------------------------------------------

struct FixedPointResult {
  Vec2 point;
  int root_winding = 0;
  // True if at some level more than one child cell carried nonzero winding;
  // valid inputs (one isolated fixed point) never set this.
  bool sibling_violation = false;
  int levels = 0;
};

// Bisects the box [lo, hi] toward the zero of p -> f(p) - p certified by a
// nonzero boundary winding; stops when the cell diagonal is <= cell_tol.
FixedPointResult find_fixed_point_field(const std::function<Vec2(const Vec2&)>& f, Vec2 lo,
                                        Vec2 hi, double cell_tol = 1e-9);

// Unique interior fixed point of an orientation-preserving disk map.
SurfacePoint find_fixed_point(const MapExpr& f);

// ---------------------------------------------------------------------------
// Compact groups acting on a planar disk.
// ---------------------------------------------------------------------------

// Presented either as a continuous one-parameter family t in [0,1) -> Psi_t
// (a circle group) or as a finite cyclic group given by its minimal angular
// step element. `center` is the common fixed point.
class DiskAction {
 public:
  using FamilyFn = std::function<Vec2(double, const Vec2&)>;
  using MapFn = std::function<Vec2(const Vec2&)>;
  using OrbitFn = std::function<std::vector<Vec2>(const Vec2&, int)>;

  static DiskAction family(FamilyFn psi, const Vec2& center);
  static DiskAction cyclic(MapFn step, int order, const Vec2& center);
  // Families take precedence over finite generators; finite generator sets
  // must generate a cyclic group (compact orientation-preserving disk groups
  // are circular, so anything else is rejected).
  static DiskAction from_spec(const GroupSpec& spec);

  bool continuous() const { return order_ == 0; }
  int order() const { return order_; }
  const Vec2& center() const { return center_; }

  // Group element at parameter t; finite groups snap t to the nearest j/order
  // and apply the step element j times.
  Vec2 apply(double t, const Vec2& p) const;

  // Closed orbit polyline through x. Continuous: `samples` vertices at
  // t = j/samples. Finite: `order` vertices in angular order about the center
  // (samples is ignored).
  std::vector<Vec2> orbit_points(const Vec2& x, int samples) const;

  // Optional bulk orbit evaluator for actions where a single apply() is
  // costly (iterate-snapped families); orbit_points delegates to it.
  void set_orbit_fn(OrbitFn fn) { orbit_fn_ = std::move(fn); }

 private:
  int order_ = 0;  // 0 = continuous family
  FamilyFn family_;
  MapFn step_;
  Vec2 center_{0.0, 0.0};
  OrbitFn orbit_fn_;
};

// ---------------------------------------------------------------------------
// Orbit curves and the enclosure order.
// ---------------------------------------------------------------------------

struct OrbitCurve {
  std::vector<Vec2> points;  // closed polyline; implicit edge back() -> front()
  Vec2 base{0.0, 0.0};       // generating point (== points.front())
  Vec2 center{0.0, 0.0};     // group fixed point
  bool discrete = false;     // finite orbit: points are the whole orbit

  double max_edge() const;      // polyline resolution ("grid cell")
  double diameter() const;      // max pairwise vertex distance
  double order_radius() const;  // max distance from center; strictly monotone
                                // under strict nesting of the curves
};

OrbitCurve orbit_curve(const DiskAction& action, const Vec2& x, int samples);
OrbitCurve orbit_curve(const GroupSpec& spec, const SurfacePoint& x, int samples);

// Signed winding of a closed polygon about p (0 when p is outside).
int polygon_winding(const std::vector<Vec2>& poly, const Vec2& p);
// Number of proper (transversal) crossings between two closed polylines.
int polygon_crossings(const std::vector<Vec2>& a, const std::vector<Vec2>& b);
// Self-intersection test for a closed polyline.
bool polyline_simple(const std::vector<Vec2>& poly);
// Symmetric Hausdorff distance between closed polylines (vertex-to-segment).
double hausdorff_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

enum class Enclosure { Inside, Outside, Same };
const char* enclosure_name(Enclosure e);

// Relation of `a` to `b`: Inside when a lies strictly in the region bounded
// by b, Outside when a strictly encloses b, Same within polyline resolution.
Enclosure enclosure_compare(const OrbitCurve& a, const OrbitCurve& b);

// ---------------------------------------------------------------------------
// Monotone chains and transversal arcs.
// ---------------------------------------------------------------------------

struct MonotoneChain {
  std::vector<Vec2> points;  // x = points.front(), y = points.back()
  double mu = 0.0;
  double diameter = 0.0;
};

// Chain from x to y with steps < mu whose orbits strictly increase in the
// enclosure order; diameter is kept within 4*dist(x,y) + mu.
MonotoneChain monotone_chain(const DiskAction& action, const Vec2& x, const Vec2& y, double mu);
MonotoneChain monotone_chain(const GroupSpec& spec, const SurfacePoint& x, const SurfacePoint& y,
                             double mu);

struct ChainStage {
  double delta;  // gaps wider than this get re-chained ...
  double mu;     // ... at this spacing
};

// Geometric schedule delta_n = 2^-(n+2), mu_n = 2^-(n+4).
std::vector<ChainStage> default_chain_schedule(int stages);

struct TransversalArc {
  std::vector<Vec2> points;  // from the fixed point to the outer base point
  std::vector<double> r;     // strictly increasing, r.front() = 0, r.back() = 1
  Vec2 center{0.0, 0.0};

  Vec2 sample(double r) const;  // piecewise-linear in the r parameter
  double max_gap() const;
};

// Iteratively refined chain from the fixed point to `outer`, parametrized by
// normalized enclosure order; refinement stops once every gap <= target_gap.
TransversalArc transversal_arc(const DiskAction& action, const Vec2& outer,
                               const std::vector<ChainStage>& schedule, double target_gap);
TransversalArc transversal_arc(const GroupSpec& spec, const SurfacePoint& outer,
                               double target_gap);

// Number of inside/outside transitions of the arc against a closed curve.
int crossing_count(const TransversalArc& arc, const OrbitCurve& curve);

// ---------------------------------------------------------------------------
// Linearization: conjugating the action to standard rotations.
// ---------------------------------------------------------------------------

struct DiskLinearization {
  int radial_cells = 0;
  int angular_cells = 0;
  // rings[i][j] = H(i / radial_cells, j / angular_cells); ring 0 degenerates
  // to the center. H(r, theta) = Psi_theta(x(r)) on the transversal x(r).
  std::vector<std::vector<Vec2>> rings;
  TransversalArc arc;
  Vec2 center{0.0, 0.0};
  double defect = 0.0;  // sup distance between conjugated elements and models

  Vec2 forward(double r, double theta) const;   // bilinear in the table
  Vec2 forward_pt(const Vec2& model) const;     // model disk point -> image
  Vec2 inverse_polar(const Vec2& p) const;      // -> (r, theta)
  Vec2 inverse_pt(const Vec2& p) const;         // image point -> model disk
};

// Defect test element: a map together with the model rotation (in turns) it
// must conjugate to.
using DefectElement = std::pair<DiskAction::MapFn, double>;

DiskLinearization linearize_disk_action(const DiskAction& action, const Vec2& outer,
                                        int radial_cells, int angular_cells,
                                        const std::vector<DefectElement>& defect_set);
DiskLinearization linearize_disk_action(const GroupSpec& spec, int radial_cells = 256,
                                        int angular_cells = 256, int defect_samples = 16);

// ---------------------------------------------------------------------------
// Boundary rigidity diagnostic.
// ---------------------------------------------------------------------------

struct BoundaryRigidityReport {
  double boundary_defect = 0.0;  // sup |f - id| on the unit circle
  double interior_defect = 0.0;  // sup |f - id| on the disk grid
};

BoundaryRigidityReport check_boundary_rigidity(const MapExpr& f, const SampleGrid& grid);

}  // namespace kerek
