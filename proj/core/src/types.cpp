#include "kerek/types.hpp"

namespace kerek {

const char* space_name(Space s) {
  switch (s) {
    case Space::Circle: return "circle";
    case Space::Disk: return "disk";
    case Space::Sphere: return "sphere";
  }
  return "?";
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::NonIntegralDegree: return "NonIntegralDegree";
    case ErrorCode::DegenerateFamily: return "DegenerateFamily";
    case ErrorCode::UnwrapFailure: return "UnwrapFailure";
    case ErrorCode::ClosureOverflow: return "ClosureOverflow";
    case ErrorCode::NonInjectiveMeasure: return "NonInjectiveMeasure";
    case ErrorCode::AmbiguousFixedPoints: return "AmbiguousFixedPoints";
    case ErrorCode::NoInteriorFixedPoint: return "NoInteriorFixedPoint";
    case ErrorCode::DegenerateOrbit: return "DegenerateOrbit";
    case ErrorCode::CrossingOrbits: return "CrossingOrbits";
    case ErrorCode::RefinementStall: return "RefinementStall";
    case ErrorCode::InversionFailure: return "InversionFailure";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::FixedPointCountMismatch: return "FixedPointCountMismatch";
    case ErrorCode::ClosureSamplingFailure: return "ClosureSamplingFailure";
    case ErrorCode::NotPeriodic: return "NotPeriodic";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::UnclassifiableSpec: return "UnclassifiableSpec";
  }
  return "UnknownError";
}

Vec3 normalized(const Vec3& a) {
  double n = norm(a);
  if (!(n > 0.0))
    throw std::invalid_argument("normalized: zero vector");
  return a * (1.0 / n);
}

Vec3 any_orthogonal(const Vec3& a) {
  Vec3 u = normalized(a);
  Vec3 ref = std::fabs(u.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
  return normalized(cross(u, ref));
}

SurfacePoint SurfacePoint::circle(double angle_turns) {
  if (!std::isfinite(angle_turns))
    throw std::invalid_argument("SurfacePoint::circle: non-finite angle");
  return SurfacePoint(Space::Circle, frac(angle_turns), 0, 0);
}

SurfacePoint SurfacePoint::disk(double u, double v) {
  if (!std::isfinite(u) || !std::isfinite(v))
    throw std::invalid_argument("SurfacePoint::disk: non-finite coordinates");
  double r2 = u * u + v * v;
  if (r2 > 1.0 + 2e-9)
    throw std::invalid_argument("SurfacePoint::disk: point outside unit disk");
  if (r2 > 1.0) {  // tolerated overshoot, pull back onto the boundary
    double s = 1.0 / std::sqrt(r2);
    u *= s;
    v *= s;
  }
  return SurfacePoint(Space::Disk, u, v, 0);
}

SurfacePoint SurfacePoint::sphere(double x, double y, double z) {
  double n = std::sqrt(x * x + y * y + z * z);
  if (!std::isfinite(n) || std::fabs(n - 1.0) > 1e-6)
    throw std::invalid_argument("SurfacePoint::sphere: point not on unit sphere");
  return SurfacePoint(Space::Sphere, x / n, y / n, z / n);
}

double SurfacePoint::angle() const {
  if (space_ != Space::Circle)
    throw Error(ErrorCode::SpaceMismatch, "angle() on a non-circle point");
  return c_[0];
}

Vec2 SurfacePoint::uv() const {
  if (space_ != Space::Disk)
    throw Error(ErrorCode::SpaceMismatch, "uv() on a non-disk point");
  return {c_[0], c_[1]};
}

Vec3 SurfacePoint::xyz() const {
  if (space_ != Space::Sphere)
    throw Error(ErrorCode::SpaceMismatch, "xyz() on a non-sphere point");
  return {c_[0], c_[1], c_[2]};
}

void require_space(const SurfacePoint& p, Space s, const char* where) {
  if (p.space() != s)
    throw Error(ErrorCode::SpaceMismatch,
                std::string(where) + ": expected " + space_name(s) + " point, got " +
                    space_name(p.space()));
}

}  // namespace kerek
