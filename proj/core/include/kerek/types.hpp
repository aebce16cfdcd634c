#pragma once

#include <array>
#include <cmath>

#include "kerek/error.hpp"

namespace kerek {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTau = 6.28318530717958647692;

enum class Space { Circle, Disk, Sphere };

const char* space_name(Space s);

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
};

inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 normalized(const Vec3& a);
// Deterministic unit vector orthogonal to a.
Vec3 any_orthogonal(const Vec3& a);

struct Vec2 {
  double x = 0, y = 0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

// x mod 1, result in [0, 1).
inline double frac(double x) {
  double r = x - std::floor(x);
  return r < 1.0 ? r : 0.0;
}

// Signed circle difference, result in [-1/2, 1/2).
inline double circle_diff(double a, double b) {
  double d = frac(a - b);
  return d < 0.5 ? d : d - 1.0;
}

// A point on one of the three supported spaces.
//   Circle: angle in turns, stored in [0, 1).
//   Disk:   (u, v) with u^2 + v^2 <= 1 + 1e-9.
//   Sphere: (x, y, z) with |(x,y,z)| = 1 within 1e-12.
class SurfacePoint {
public:
  static SurfacePoint circle(double angle_turns);
  static SurfacePoint disk(double u, double v);
  static SurfacePoint disk(const Vec2& p) { return disk(p.x, p.y); }
  static SurfacePoint sphere(double x, double y, double z);
  static SurfacePoint sphere(const Vec3& p) { return sphere(p.x, p.y, p.z); }

  Space space() const { return space_; }
  double angle() const;
  Vec2 uv() const;
  Vec3 xyz() const;

private:
  SurfacePoint(Space s, double a, double b, double c)
      : space_(s), c_{a, b, c} {}
  Space space_;
  std::array<double, 3> c_;
};

void require_space(const SurfacePoint& p, Space s, const char* where);

}  // namespace kerek
