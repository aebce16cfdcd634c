#include "kerek/geometry.hpp"

#include <cmath>

#include "kerek/parallel.hpp"

namespace kerek {
namespace {

// Signed solid angle of the spherical triangle (a, b, c) seen from the
// origin; positive when (a, b, c) is positively oriented.
double signed_solid_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
  double triple = dot(a, cross(b, c));
  double denom = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
  return 2.0 * std::atan2(triple, denom);
}

struct Icosahedron {
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> faces;
};

const Icosahedron& icosahedron() {
  static const Icosahedron ico = [] {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    Icosahedron k;
    const double raw[12][3] = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                               {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                               {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : raw) k.verts.push_back(normalized({v[0], v[1], v[2]}));
    k.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    return k;
  }();
  return ico;
}

}  // namespace

double sup_distance(const MapExpr& f, const MapExpr& g, const SampleGrid& grid,
                    const Metric& metric) {
  if (grid.space != metric.space())
    throw Error(ErrorCode::SpaceMismatch, "sup_distance: grid and metric disagree");
  const auto& pts = grid.points;
  std::vector<double> chunk_max(pts.size(), 0.0);
  parallel_for(pts.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      chunk_max[i] = metric(evaluate(f, pts[i]), evaluate(g, pts[i]));
  });
  double best = 0;
  for (double d : chunk_max) best = std::max(best, d);
  return best;
}

int map_degree(const MapExpr& f, int mesh_resolution) {
  if (mesh_resolution < 1)
    throw std::invalid_argument("map_degree: mesh resolution must be >= 1");
  auto s = f.space();
  if (s && *s != Space::Sphere)
    throw Error(ErrorCode::SpaceMismatch, "map_degree: map does not act on the sphere");

  const Icosahedron& ico = icosahedron();
  const int m = mesh_resolution;
  std::vector<double> face_sum(ico.faces.size(), 0.0);

  parallel_for(ico.faces.size(), [&](std::size_t fb, std::size_t fe) {
    std::vector<Vec3> img((m + 1) * (m + 2) / 2);
    for (std::size_t fi = fb; fi < fe; ++fi) {
      const auto& face = ico.faces[fi];
      const Vec3 &A = ico.verts[face[0]], &B = ico.verts[face[1]], &C = ico.verts[face[2]];
      auto at = [&](int i, int j) { return img[i * (2 * m + 3 - i) / 2 + j]; };
      // row-major over (i, j), i + j <= m; index = sum of row lengths above
      int idx = 0;
      for (int i = 0; i <= m; ++i) {
        for (int j = 0; j <= m - i; ++j) {
          Vec3 p = normalized(A * double(m - i - j) + B * double(i) + C * double(j));
          img[idx++] = f.eval_sphere(p);
        }
      }
      double sum = 0;
      for (int i = 0; i + 1 <= m; ++i) {
        for (int j = 0; j + 1 <= m - i; ++j) {
          sum += signed_solid_angle(at(i, j), at(i + 1, j), at(i, j + 1));
          if (i + j + 2 <= m)
            sum += signed_solid_angle(at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
        }
      }
      face_sum[fi] = sum;
    }
  });

  double total = 0;
  for (double v : face_sum) total += v;
  double deg = total / (4.0 * kPi);
  double rounded = std::round(deg);
  if (std::fabs(deg - rounded) > 0.1)
    throw Error(ErrorCode::NonIntegralDegree,
                "degree estimate " + std::to_string(deg) + " is not close to an integer");
  return int(rounded);
}

double modulus_of_continuity(const std::vector<MapExpr>& family, double epsilon,
                             const SampleGrid& grid, const Metric& metric) {
  if (family.empty()) throw std::invalid_argument("modulus_of_continuity: empty family");
  if (!(epsilon > 0)) throw std::invalid_argument("modulus_of_continuity: epsilon must be > 0");
  if (grid.space != metric.space())
    throw Error(ErrorCode::SpaceMismatch, "modulus_of_continuity: grid and metric disagree");

  // Invertibility check: g^-1(g(x)) must return to x on a coarse probe.
  SampleGrid probe = make_grid(grid.space, grid.space == Space::Circle ? 16 : 4);
  for (const MapExpr& g : family) {
    MapExpr round_trip = MapExpr::compose(MapExpr::inverse(g), g);
    for (const auto& p : probe.points) {
      double d = Metric::intrinsic(grid.space)(evaluate(round_trip, p), p);
      if (!(d <= 1e-9))
        throw Error(ErrorCode::DegenerateFamily,
                    "family member fails the invertibility round trip");
    }
  }

  const auto& pts = grid.points;
  const std::size_t n = pts.size();
  std::vector<std::vector<SurfacePoint>> images(family.size());
  for (std::size_t k = 0; k < family.size(); ++k) {
    images[k].reserve(n);
    for (const auto& p : pts) images[k].push_back(evaluate(family[k], p));
  }

  // One scan over pairs records, for each pair, the base distance and
  // whether some member separates the pair to >= epsilon.
  const std::size_t pair_count = n * (n - 1) / 2;
  std::vector<float> pair_dist(pair_count);
  std::vector<unsigned char> pair_violates(pair_count, 0);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      std::size_t base = i * n - i * (i + 1) / 2 - i;  // index of pair (i, i+1)
      for (std::size_t j = i + 1; j < n; ++j) {
        std::size_t pidx = base + j - 1;
        pair_dist[pidx] = float(metric(pts[i], pts[j]));
        for (std::size_t k = 0; k < family.size(); ++k) {
          if (metric(images[k][i], images[k][j]) >= epsilon) {
            pair_violates[pidx] = 1;
            break;
          }
        }
      }
    }
  });

  auto admissible = [&](double alpha) {
    for (std::size_t p = 0; p < pair_count; ++p)
      if (pair_violates[p] && double(pair_dist[p]) < alpha) return false;
    return true;
  };

  double lo = 0.0, hi = metric.diameter() * (1.0 + 1e-9);
  if (admissible(hi)) return metric.diameter();
  for (int it = 0; it < 48; ++it) {
    double mid = 0.5 * (lo + hi);
    if (admissible(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace kerek
