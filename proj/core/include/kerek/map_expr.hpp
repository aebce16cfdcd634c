#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "kerek/types.hpp"

namespace kerek {

// Closed-form homeomorphisms of S^1, D^2 and S^2, built as expression trees.
// Every primitive has a closed-form or monotone-bisection inverse, so the
// algebra is closed under inverse.  Circle angles and rotation amounts for
// S^1 / D^2 are in turns; sphere rotation angles are in radians.
//
// Disk primitives are defined on the whole plane (they fix the origin and
// infinity), which is what makes the stereographic transport to the sphere
// and the plane winding searches work.
enum class MapKind {
  Identity,
  CircleRotation,   // x -> x + a
  CircleWarp,       // lift x -> x + sum_k a_k sin(2 pi k x) / (2 pi k), sum |a_k| < 1
  DiskRotation,     // rotate about the origin by a turns
  RadialWarp,       // r -> r^beta along rays
  AngularShear,     // theta -> theta + c * r^m turns
  SphereRotation,   // axis + angle (radians)
  SphereReflection, // reflect in the plane with the given unit normal
  Antipodal,        // x -> -x
  Stereographic,    // plane map transported to S^2; north pole = infinity
  Conjugation,      // (g, f) -> g o f o g^-1
  Compose,          // (f, g) -> f o g
  Inverse,
  Power,            // f^k, k any integer
};

class MapExpr {
public:
  MapExpr() : MapExpr(identity()) {}

  static MapExpr identity();
  static MapExpr circle_rotation(double turns);
  static MapExpr circle_warp(std::vector<double> coeffs);
  static MapExpr disk_rotation(double turns);
  static MapExpr radial_warp(double beta);
  static MapExpr angular_shear(double amount_turns, double power = 1.0);
  static MapExpr sphere_rotation(const Vec3& axis, double angle_radians);
  static MapExpr sphere_reflection(const Vec3& normal);
  static MapExpr antipodal();
  static MapExpr stereographic(const MapExpr& plane_map);
  static MapExpr conjugation(const MapExpr& g, const MapExpr& f);
  static MapExpr compose(const MapExpr& f, const MapExpr& g);
  static MapExpr inverse(const MapExpr& f);
  static MapExpr power(const MapExpr& f, long k);

  // Parametric rotation slots for one-parameter families: the slot angle is
  // multiplier * t (turns on S^1 / D^2, 2 pi t radians on S^2).
  static MapExpr parametric_circle_rotation(int multiplier = 1);
  static MapExpr parametric_disk_rotation(int multiplier = 1);
  static MapExpr parametric_sphere_rotation(const Vec3& axis, int multiplier = 1);

  // nullopt while the expression only contains space-agnostic nodes.
  std::optional<Space> space() const;
  // +1 orientation-preserving, -1 reversing.  Multiplicative over the tree.
  int orientation() const;
  bool is_parametric() const;
  // Substitutes t into every parametric slot.  No-op when none are present.
  MapExpr bind_parameter(double t) const;

  // Raw pointwise evaluation per space.  eval_circle takes and returns an
  // angle in [0, 1).  eval_plane acts on the whole plane.  eval_sphere
  // renormalizes after every primitive step.
  double eval_circle(double angle_turns) const;
  Vec2 eval_plane(const Vec2& p) const;
  Vec3 eval_sphere(const Vec3& p) const;

  struct Node;
  const Node& node() const { return *node_; }
  const std::shared_ptr<const Node>& node_ptr() const { return node_; }

private:
  explicit MapExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  friend MapExpr wrap_node(std::shared_ptr<const Node> n);
  std::shared_ptr<const Node> node_;
};

struct MapExpr::Node {
  MapKind kind = MapKind::Identity;
  double a = 0;                 // rotation amount / shear amount / warp beta
  double b = 0;                 // shear radial power
  std::vector<double> coeffs;   // circle warp coefficients
  Vec3 vec{0, 0, 1};            // rotation axis / reflection normal
  long k = 0;                   // power exponent
  int param_multiplier = 0;     // nonzero marks a parametric rotation slot
  std::shared_ptr<const Node> f, g;
};

// Typed evaluation with space checking.
SurfacePoint evaluate(const MapExpr& m, const SurfacePoint& p);

// Restriction of a disk expression to the boundary circle.  Total on the
// algebra: every disk primitive preserves the unit circle.
MapExpr boundary_restriction(const MapExpr& disk_map);

// Structural equality of expression trees (used by IO round-trip tests).
bool structurally_equal(const MapExpr& a, const MapExpr& b);

}  // namespace kerek
