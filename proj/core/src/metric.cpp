#include "kerek/metric.hpp"

#include <cmath>

namespace kerek {

Metric Metric::intrinsic(Space s) {
  switch (s) {
    case Space::Circle: return Metric(Kind::CircleArc, s);
    case Space::Disk: return Metric(Kind::DiskEuclid, s);
    case Space::Sphere: return Metric(Kind::SphereChord, s);
  }
  throw std::invalid_argument("Metric::intrinsic: bad space");
}

Metric Metric::chordal(Space s) {
  switch (s) {
    case Space::Circle: return Metric(Kind::CircleChord, s);
    case Space::Disk: return Metric(Kind::DiskEuclid, s);
    case Space::Sphere: return Metric(Kind::SphereChord, s);
  }
  throw std::invalid_argument("Metric::chordal: bad space");
}

Metric Metric::geodesic() { return Metric(Kind::SphereGeo, Space::Sphere); }

Metric Metric::geodesic_normalized() { return Metric(Kind::SphereGeoNorm, Space::Sphere); }

Metric Metric::averaged(const Metric& base, std::vector<MapExpr> group_elements) {
  if (group_elements.empty())
    throw std::invalid_argument("Metric::averaged: empty group");
  for (const MapExpr& g : group_elements) {
    auto s = g.space();
    if (s && *s != base.space())
      throw Error(ErrorCode::SpaceMismatch, "Metric::averaged: element acts on the wrong space");
  }
  Metric m = base;
  m.group_ = std::make_shared<const std::vector<MapExpr>>(std::move(group_elements));
  return m;
}

double Metric::base_distance(const SurfacePoint& a, const SurfacePoint& b) const {
  switch (kind_) {
    case Kind::CircleArc: {
      double d = std::fabs(circle_diff(a.angle(), b.angle()));
      return d;
    }
    case Kind::CircleChord: {
      double d = std::fabs(circle_diff(a.angle(), b.angle()));
      return 2.0 * std::sin(kPi * d);
    }
    case Kind::DiskEuclid: return norm(a.uv() - b.uv());
    case Kind::SphereChord: return norm(a.xyz() - b.xyz());
    case Kind::SphereGeo:
    case Kind::SphereGeoNorm: {
      Vec3 u = a.xyz(), v = b.xyz();
      double g = std::atan2(norm(cross(u, v)), dot(u, v));
      return kind_ == Kind::SphereGeo ? g : g / (kPi / 2.0);
    }
  }
  throw std::logic_error("Metric: unreachable");
}

double Metric::operator()(const SurfacePoint& a, const SurfacePoint& b) const {
  require_space(a, space_, "Metric");
  require_space(b, space_, "Metric");
  if (!group_) return base_distance(a, b);
  double sum = 0;
  for (const MapExpr& g : *group_) sum += base_distance(evaluate(g, a), evaluate(g, b));
  return sum / double(group_->size());
}

double Metric::diameter() const {
  switch (kind_) {
    case Kind::CircleArc: return 0.5;
    case Kind::CircleChord: return 2.0;
    case Kind::DiskEuclid: return 2.0;
    case Kind::SphereChord: return 2.0;
    case Kind::SphereGeo: return kPi;
    case Kind::SphereGeoNorm: return 2.0;
  }
  return 2.0;
}

}  // namespace kerek
