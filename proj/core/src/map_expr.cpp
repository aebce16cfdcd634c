#include "kerek/map_expr.hpp"

#include <cmath>

namespace kerek {
namespace {

using Node = MapExpr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

// ---- circle warp ----------------------------------------------------------

// Lift of the warp: strictly increasing, commutes with x -> x + 1.
double warp_lift(const std::vector<double>& coeffs, double x) {
  double s = x;
  for (size_t k = 0; k < coeffs.size(); ++k) {
    double w = kTau * double(k + 1);
    s += coeffs[k] * std::sin(w * x) / w;
  }
  return s;
}

double warp_slack(const std::vector<double>& coeffs) {
  double s = 0;
  for (double a : coeffs) s += std::fabs(a);
  return s / kTau;
}

// Solves warp_lift(x) = y by monotone bisection; 56 iterations from a
// bracket of width < 0.35 lands well below the 1e-12 contract.
double warp_lift_inverse(const std::vector<double>& coeffs, double y) {
  double slack = warp_slack(coeffs) + 1e-12;
  double lo = y - slack, hi = y + slack;
  for (int it = 0; it < 56; ++it) {
    double mid = 0.5 * (lo + hi);
    if (warp_lift(coeffs, mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ---- per-space evaluation --------------------------------------------------

[[noreturn]] void wrong_space(const Node& n, Space s) {
  (void)n;
  throw Error(ErrorCode::SpaceMismatch,
              std::string("expression does not act on the ") + space_name(s));
}

void require_bound(const Node& n) {
  if (n.param_multiplier != 0)
    throw std::invalid_argument("evaluate: unbound family parameter");
}

double eval_c(const Node& n, double x);
double eval_c_inv(const Node& n, double y);

double eval_c(const Node& n, double x) {
  require_bound(n);
  switch (n.kind) {
    case MapKind::Identity: return x;
    case MapKind::CircleRotation: return frac(x + n.a);
    case MapKind::CircleWarp: return frac(warp_lift(n.coeffs, x));
    case MapKind::Compose: return eval_c(*n.f, eval_c(*n.g, x));
    case MapKind::Conjugation: return eval_c(*n.g, eval_c(*n.f, eval_c_inv(*n.g, x)));
    case MapKind::Inverse: return eval_c_inv(*n.f, x);
    case MapKind::Power: {
      long k = n.k;
      for (long i = 0; i < std::labs(k); ++i) x = k > 0 ? eval_c(*n.f, x) : eval_c_inv(*n.f, x);
      return x;
    }
    default: wrong_space(n, Space::Circle);
  }
}

double eval_c_inv(const Node& n, double y) {
  require_bound(n);
  switch (n.kind) {
    case MapKind::Identity: return y;
    case MapKind::CircleRotation: return frac(y - n.a);
    case MapKind::CircleWarp: return frac(warp_lift_inverse(n.coeffs, y));
    case MapKind::Compose: return eval_c_inv(*n.g, eval_c_inv(*n.f, y));
    case MapKind::Conjugation: return eval_c(*n.g, eval_c_inv(*n.f, eval_c_inv(*n.g, y)));
    case MapKind::Inverse: return eval_c(*n.f, y);
    case MapKind::Power: {
      long k = n.k;
      for (long i = 0; i < std::labs(k); ++i) y = k > 0 ? eval_c_inv(*n.f, y) : eval_c(*n.f, y);
      return y;
    }
    default: wrong_space(n, Space::Circle);
  }
}

Vec2 rotate2(const Vec2& p, double turns) {
  double c = std::cos(kTau * turns), s = std::sin(kTau * turns);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

Vec2 eval_p(const Node& n, Vec2 p);
Vec2 eval_p_inv(const Node& n, Vec2 p);

Vec2 eval_p(const Node& n, Vec2 p) {
  require_bound(n);
  switch (n.kind) {
    case MapKind::Identity: return p;
    case MapKind::DiskRotation: return rotate2(p, n.a);
    case MapKind::RadialWarp: {
      double r = norm(p);
      if (r <= 0) return {0, 0};
      return p * std::pow(r, n.a - 1.0);
    }
    case MapKind::AngularShear: {
      double r = norm(p);
      return rotate2(p, n.a * std::pow(r, n.b));
    }
    case MapKind::Compose: return eval_p(*n.f, eval_p(*n.g, p));
    case MapKind::Conjugation: return eval_p(*n.g, eval_p(*n.f, eval_p_inv(*n.g, p)));
    case MapKind::Inverse: return eval_p_inv(*n.f, p);
    case MapKind::Power: {
      long k = n.k;
      for (long i = 0; i < std::labs(k); ++i) p = k > 0 ? eval_p(*n.f, p) : eval_p_inv(*n.f, p);
      return p;
    }
    default: wrong_space(n, Space::Disk);
  }
}

Vec2 eval_p_inv(const Node& n, Vec2 p) {
  require_bound(n);
  switch (n.kind) {
    case MapKind::Identity: return p;
    case MapKind::DiskRotation: return rotate2(p, -n.a);
    case MapKind::RadialWarp: {
      double r = norm(p);
      if (r <= 0) return {0, 0};
      return p * std::pow(r, 1.0 / n.a - 1.0);
    }
    case MapKind::AngularShear: {
      double r = norm(p);  // preserved by the forward map
      return rotate2(p, -n.a * std::pow(r, n.b));
    }
    case MapKind::Compose: return eval_p_inv(*n.g, eval_p_inv(*n.f, p));
    case MapKind::Conjugation: return eval_p(*n.g, eval_p_inv(*n.f, eval_p_inv(*n.g, p)));
    case MapKind::Inverse: return eval_p(*n.f, p);
    case MapKind::Power: {
      long k = n.k;
      for (long i = 0; i < std::labs(k); ++i) p = k > 0 ? eval_p_inv(*n.f, p) : eval_p(*n.f, p);
      return p;
    }
    default: wrong_space(n, Space::Disk);
  }
}

Vec3 rodrigues(const Vec3& axis, double angle, const Vec3& p) {
  double c = std::cos(angle), s = std::sin(angle);
  return p * c + cross(axis, p) * s + axis * (dot(axis, p) * (1.0 - c));
}

// Stereographic projection from the north pole; (0,0,1) <-> infinity.
Vec2 stereo_project(const Vec3& p) { return {p.x / (1.0 - p.z), p.y / (1.0 - p.z)}; }

Vec3 stereo_unproject(const Vec2& w) {
  double r2 = dot(w, w);
  return Vec3{2.0 * w.x, 2.0 * w.y, r2 - 1.0} * (1.0 / (r2 + 1.0));
}

constexpr double kPoleGap = 1e-13;

Vec3 eval_s(const Node& n, Vec3 p);
Vec3 eval_s_inv(const Node& n, Vec3 p);

Vec3 eval_s(const Node& n, Vec3 p) {
  require_bound(n);
  switch (n.kind) {
    case MapKind::Identity: return p;
    case MapKind::SphereRotation: return normalized(rodrigues(n.vec, n.a, p));
    case MapKind::SphereReflection: return normalized(p - n.vec * (2.0 * dot(p, n.vec)));
    case MapKind::Antipodal: return -p;
    case MapKind::Stereographic: {
      if (p.z > 1.0 - kPoleGap) return {0, 0, 1};  // plane maps fix infinity
      return normalized(stereo_unproject(eval_p(*n.f, stereo_project(p))));
    }
    case MapKind::Compose: return eval_s(*n.f, eval_s(*n.g, p));
    case MapKind::Conjugation: return eval_s(*n.g, eval_s(*n.f, eval_s_inv(*n.g, p)));
    case MapKind::Inverse: return eval_s_inv(*n.f, p);
    case MapKind::Power: {
      long k = n.k;
      for (long i = 0; i < std::labs(k); ++i) p = k > 0 ? eval_s(*n.f, p) : eval_s_inv(*n.f, p);
      return p;
    }
    default: wrong_space(n, Space::Sphere);
  }
}

Vec3 eval_s_inv(const Node& n, Vec3 p) {
  require_bound(n);
  switch (n.kind) {
    case MapKind::Identity: return p;
    case MapKind::SphereRotation: return normalized(rodrigues(n.vec, -n.a, p));
    case MapKind::SphereReflection: return normalized(p - n.vec * (2.0 * dot(p, n.vec)));
    case MapKind::Antipodal: return -p;
    case MapKind::Stereographic: {
      if (p.z > 1.0 - kPoleGap) return {0, 0, 1};
      return normalized(stereo_unproject(eval_p_inv(*n.f, stereo_project(p))));
    }
    case MapKind::Compose: return eval_s_inv(*n.g, eval_s_inv(*n.f, p));
    case MapKind::Conjugation: return eval_s(*n.g, eval_s_inv(*n.f, eval_s_inv(*n.g, p)));
    case MapKind::Inverse: return eval_s(*n.f, p);
    case MapKind::Power: {
      long k = n.k;
      for (long i = 0; i < std::labs(k); ++i) p = k > 0 ? eval_s_inv(*n.f, p) : eval_s(*n.f, p);
      return p;
    }
    default: wrong_space(n, Space::Sphere);
  }
}

std::optional<Space> node_space(const Node& n) {
  switch (n.kind) {
    case MapKind::Identity: return std::nullopt;
    case MapKind::CircleRotation:
    case MapKind::CircleWarp: return Space::Circle;
    case MapKind::DiskRotation:
    case MapKind::RadialWarp:
    case MapKind::AngularShear: return Space::Disk;
    case MapKind::SphereRotation:
    case MapKind::SphereReflection:
    case MapKind::Antipodal:
    case MapKind::Stereographic: return Space::Sphere;
    case MapKind::Conjugation:
    case MapKind::Compose: {
      auto a = node_space(*n.f), b = node_space(*n.g);
      return a ? a : b;
    }
    case MapKind::Inverse:
    case MapKind::Power: return node_space(*n.f);
  }
  return std::nullopt;
}

int node_orientation(const Node& n) {
  switch (n.kind) {
    case MapKind::SphereReflection:
    case MapKind::Antipodal: return -1;
    case MapKind::Conjugation: return node_orientation(*n.f);
    case MapKind::Compose: return node_orientation(*n.f) * node_orientation(*n.g);
    case MapKind::Inverse: return node_orientation(*n.f);
    case MapKind::Power:
      return (n.k % 2 == 0) ? 1 : node_orientation(*n.f);
    case MapKind::Stereographic: return node_orientation(*n.f);
    default: return 1;
  }
}

bool node_parametric(const Node& n) {
  if (n.param_multiplier != 0) return true;
  if (n.f && node_parametric(*n.f)) return true;
  if (n.g && node_parametric(*n.g)) return true;
  return false;
}

NodePtr bind_node(const NodePtr& n, double t) {
  if (!node_parametric(*n)) return n;
  Node out = *n;
  if (out.param_multiplier != 0) {
    double amount = double(out.param_multiplier) * t;
    out.a = (out.kind == MapKind::SphereRotation) ? kTau * amount : amount;
    out.param_multiplier = 0;
  }
  if (out.f) out.f = bind_node(out.f, t);
  if (out.g) out.g = bind_node(out.g, t);
  return make(std::move(out));
}

void check_space_compatible(const NodePtr& a, const NodePtr& b, const char* what) {
  auto sa = node_space(*a), sb = node_space(*b);
  if (sa && sb && *sa != *sb)
    throw Error(ErrorCode::SpaceMismatch,
                std::string(what) + ": operands act on " + space_name(*sa) + " and " +
                    space_name(*sb));
}

}  // namespace

MapExpr wrap_node(std::shared_ptr<const MapExpr::Node> n) { return MapExpr(std::move(n)); }

MapExpr MapExpr::identity() { return MapExpr(make(Node{})); }

MapExpr MapExpr::circle_rotation(double turns) {
  if (!std::isfinite(turns)) throw std::invalid_argument("circle_rotation: non-finite amount");
  Node n;
  n.kind = MapKind::CircleRotation;
  n.a = turns;
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::circle_warp(std::vector<double> coeffs) {
  double total = 0;
  for (double a : coeffs) {
    if (!std::isfinite(a)) throw std::invalid_argument("circle_warp: non-finite coefficient");
    total += std::fabs(a);
  }
  if (total >= 1.0)
    throw std::invalid_argument("circle_warp: coefficient l1 norm must be < 1");
  Node n;
  n.kind = MapKind::CircleWarp;
  n.coeffs = std::move(coeffs);
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::disk_rotation(double turns) {
  if (!std::isfinite(turns)) throw std::invalid_argument("disk_rotation: non-finite amount");
  Node n;
  n.kind = MapKind::DiskRotation;
  n.a = turns;
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::radial_warp(double beta) {
  if (!(beta > 0) || !std::isfinite(beta))
    throw std::invalid_argument("radial_warp: exponent must be positive");
  Node n;
  n.kind = MapKind::RadialWarp;
  n.a = beta;
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::angular_shear(double amount_turns, double power) {
  if (!std::isfinite(amount_turns) || !std::isfinite(power) || power < 0)
    throw std::invalid_argument("angular_shear: bad profile");
  Node n;
  n.kind = MapKind::AngularShear;
  n.a = amount_turns;
  n.b = power;
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::sphere_rotation(const Vec3& axis, double angle_radians) {
  if (!std::isfinite(angle_radians)) throw std::invalid_argument("sphere_rotation: bad angle");
  Node n;
  n.kind = MapKind::SphereRotation;
  n.vec = normalized(axis);
  n.a = angle_radians;
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::sphere_reflection(const Vec3& normal) {
  Node n;
  n.kind = MapKind::SphereReflection;
  n.vec = normalized(normal);
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::antipodal() {
  Node n;
  n.kind = MapKind::Antipodal;
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::stereographic(const MapExpr& plane_map) {
  auto s = plane_map.space();
  if (s && *s != Space::Disk)
    throw Error(ErrorCode::SpaceMismatch, "stereographic: inner map must act on the disk/plane");
  Node n;
  n.kind = MapKind::Stereographic;
  n.f = plane_map.node_ptr();
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::conjugation(const MapExpr& g, const MapExpr& f) {
  auto gp = g.node_ptr(), fp = f.node_ptr();
  check_space_compatible(gp, fp, "conjugation");
  Node n;
  n.kind = MapKind::Conjugation;
  n.g = gp;
  n.f = fp;
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::compose(const MapExpr& f, const MapExpr& g) {
  auto fp = f.node_ptr(), gp = g.node_ptr();
  check_space_compatible(fp, gp, "compose");
  Node n;
  n.kind = MapKind::Compose;
  n.f = fp;
  n.g = gp;
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::inverse(const MapExpr& f) {
  // inverse(inverse(f)) collapses to f, so double inversion is bit-exact.
  if (f.node().kind == MapKind::Inverse) return MapExpr(f.node().f);
  Node n;
  n.kind = MapKind::Inverse;
  n.f = f.node_ptr();
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::power(const MapExpr& f, long k) {
  Node n;
  n.kind = MapKind::Power;
  n.f = f.node_ptr();
  n.k = k;
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::parametric_circle_rotation(int multiplier) {
  if (multiplier == 0) throw std::invalid_argument("parametric slot: zero multiplier");
  Node n;
  n.kind = MapKind::CircleRotation;
  n.param_multiplier = multiplier;
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::parametric_disk_rotation(int multiplier) {
  if (multiplier == 0) throw std::invalid_argument("parametric slot: zero multiplier");
  Node n;
  n.kind = MapKind::DiskRotation;
  n.param_multiplier = multiplier;
  return MapExpr(make(std::move(n)));
}

MapExpr MapExpr::parametric_sphere_rotation(const Vec3& axis, int multiplier) {
  if (multiplier == 0) throw std::invalid_argument("parametric slot: zero multiplier");
  Node n;
  n.kind = MapKind::SphereRotation;
  n.vec = normalized(axis);
  n.param_multiplier = multiplier;
  return MapExpr(make(std::move(n)));
}

std::optional<Space> MapExpr::space() const { return node_space(*node_); }

int MapExpr::orientation() const { return node_orientation(*node_); }

bool MapExpr::is_parametric() const { return node_parametric(*node_); }

MapExpr MapExpr::bind_parameter(double t) const { return MapExpr(bind_node(node_, t)); }

double MapExpr::eval_circle(double angle_turns) const {
  return eval_c(*node_, frac(angle_turns));
}

Vec2 MapExpr::eval_plane(const Vec2& p) const { return eval_p(*node_, p); }

Vec3 MapExpr::eval_sphere(const Vec3& p) const { return eval_s(*node_, p); }

SurfacePoint evaluate(const MapExpr& m, const SurfacePoint& p) {
  auto s = m.space();
  if (s && *s != p.space())
    throw Error(ErrorCode::SpaceMismatch,
                std::string("evaluate: map acts on ") + space_name(*s) + ", point lies on " +
                    space_name(p.space()));
  switch (p.space()) {
    case Space::Circle: return SurfacePoint::circle(m.eval_circle(p.angle()));
    case Space::Disk: {
      Vec2 q = m.eval_plane(p.uv());
      double r = norm(q);
      if (r > 1.0 + 1e-9)
        throw std::invalid_argument("evaluate: disk image left the unit disk");
      return SurfacePoint::disk(q);
    }
    case Space::Sphere: return SurfacePoint::sphere(m.eval_sphere(p.xyz()));
  }
  throw std::logic_error("evaluate: unreachable");
}

MapExpr boundary_restriction(const MapExpr& disk_map) {
  const MapExpr::Node& n = disk_map.node();
  auto child_f = [&] { return wrap_node(n.f); };
  auto child_g = [&] { return wrap_node(n.g); };
  switch (n.kind) {
    case MapKind::Identity: return MapExpr::identity();
    case MapKind::DiskRotation:
      if (n.param_multiplier != 0)
        return MapExpr::parametric_circle_rotation(n.param_multiplier);
      return MapExpr::circle_rotation(n.a);
    case MapKind::RadialWarp: return MapExpr::identity();
    case MapKind::AngularShear: return MapExpr::circle_rotation(n.a);  // r = 1
    case MapKind::Compose:
      return MapExpr::compose(boundary_restriction(child_f()), boundary_restriction(child_g()));
    case MapKind::Conjugation:
      return MapExpr::conjugation(boundary_restriction(child_g()), boundary_restriction(child_f()));
    case MapKind::Inverse: return MapExpr::inverse(boundary_restriction(child_f()));
    case MapKind::Power: return MapExpr::power(boundary_restriction(child_f()), n.k);
    default:
      throw Error(ErrorCode::SpaceMismatch, "boundary_restriction: not a disk expression");
  }
}

namespace {
bool nodes_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.a != b.a || a.b != b.b || a.k != b.k ||
      a.param_multiplier != b.param_multiplier || a.coeffs != b.coeffs ||
      a.vec.x != b.vec.x || a.vec.y != b.vec.y || a.vec.z != b.vec.z)
    return false;
  if (bool(a.f) != bool(b.f) || bool(a.g) != bool(b.g)) return false;
  if (a.f && !nodes_equal(*a.f, *b.f)) return false;
  if (a.g && !nodes_equal(*a.g, *b.g)) return false;
  return true;
}
}  // namespace

bool structurally_equal(const MapExpr& a, const MapExpr& b) {
  return nodes_equal(a.node(), b.node());
}

}  // namespace kerek
