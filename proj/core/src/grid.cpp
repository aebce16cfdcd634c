#include "kerek/grid.hpp"

#include <cmath>

namespace kerek {

std::vector<Vec3> fibonacci_lattice(int m) {
  const double golden = 0.6180339887498948482;  // (sqrt 5 - 1) / 2
  long n = 2L * m * m;
  std::vector<Vec3> pts;
  pts.reserve(size_t(n));
  for (long i = 0; i < n; ++i) {
    double z = 1.0 - (2.0 * double(i) + 1.0) / double(n);
    double phi = kTau * frac(double(i) * golden);
    double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts.push_back({rho * std::cos(phi), rho * std::sin(phi), z});
  }
  return pts;
}

SampleGrid make_grid(Space space, int resolution) {
  if (resolution < 1)
    throw std::invalid_argument("make_grid: resolution must be >= 1");
  SampleGrid g{space, resolution, {}};
  switch (space) {
    case Space::Circle: {
      g.points.reserve(size_t(resolution));
      for (int i = 0; i < resolution; ++i)
        g.points.push_back(SurfacePoint::circle(double(i) / double(resolution)));
      break;
    }
    case Space::Disk: {
      int n = resolution;
      g.points.reserve(size_t(1) + size_t(n) * size_t(4 * n));
      g.points.push_back(SurfacePoint::disk(0.0, 0.0));
      for (int i = 0; i < n; ++i) {
        double r = double(i + 1) / double(n);
        for (int j = 0; j < 4 * n; ++j) {
          double th = kTau * double(j) / double(4 * n);
          g.points.push_back(SurfacePoint::disk(r * std::cos(th), r * std::sin(th)));
        }
      }
      break;
    }
    case Space::Sphere: {
      for (int m = resolution; m >= 4 || m == resolution; m /= 2) {
        for (const Vec3& p : fibonacci_lattice(m)) g.points.push_back(SurfacePoint::sphere(p));
        if (m == 1) break;
      }
      break;
    }
  }
  return g;
}

}  // namespace kerek
