#include "kerek/sphere_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

#include "kerek/disk_dynamics.hpp"
#include "kerek/error.hpp"
#include "kerek/geometry.hpp"
#include "kerek/parallel.hpp"
#include "kerek/raster.hpp"

namespace kerek {

namespace {

constexpr Vec3 kNorth{0.0, 0.0, 1.0};
constexpr Vec3 kSouth{0.0, 0.0, -1.0};

double chord(const Vec3& a, const Vec3& b) { return norm(a - b); }

Vec3 rotate_about(const Vec3& axis, double angle, const Vec3& v) {
  double c = std::cos(angle), s = std::sin(angle);
  return v * c + cross(axis, v) * s + axis * (dot(axis, v) * (1.0 - c));
}

Vec3 sph_point(double phi, double lambda) {
  double s = std::sin(phi);
  return {s * std::cos(lambda), s * std::sin(lambda), std::cos(phi)};
}

// Stereographic charts, named by the pole that lands at the origin.
Vec2 chart_north(const Vec3& y) {
  double d = std::max(1.0 + y.z, 1e-13);
  return {y.x / d, y.y / d};
}
Vec3 unchart_north(const Vec2& w) {
  double s = dot(w, w);
  return {2.0 * w.x / (1.0 + s), 2.0 * w.y / (1.0 + s), (1.0 - s) / (1.0 + s)};
}
Vec2 chart_south(const Vec3& y) {
  double d = std::max(1.0 - y.z, 1e-13);
  return {y.x / d, y.y / d};
}
Vec3 unchart_south(const Vec2& w) {
  double s = dot(w, w);
  return {2.0 * w.x / (1.0 + s), 2.0 * w.y / (1.0 + s), (s - 1.0) / (1.0 + s)};
}

Vec2 lerp2(const Vec2& a, const Vec2& b, double s) {
  return {a.x * (1.0 - s) + b.x * s, a.y * (1.0 - s) + b.y * s};
}

double polyline_distance3(const std::vector<Vec3>& poly, const Vec3& p, int* seg = nullptr,
                          double* frac_out = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec3& a = poly[i];
    const Vec3& b = poly[(i + 1) % n];
    Vec3 d = b - a;
    double len2 = dot(d, d);
    double s = len2 > 0.0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
    double v = chord(a + d * s, p);
    if (v < best) {
      best = v;
      if (seg) *seg = int(i);
      if (frac_out) *frac_out = s;
    }
  }
  return best;
}

// Conformal transport sending a prescribed point pair to the poles: a
// rotation takes the first point to N, then a plane translation in the chart
// centered at S (which fixes N) pulls the second point down to S.
struct PoleTransport {
  bool rotate = false;
  Vec3 axis{1.0, 0.0, 0.0};
  double angle = 0.0;
  bool translate = false;
  Vec2 w0{0.0, 0.0};

  Vec3 apply(const Vec3& y) const {
    Vec3 r = rotate ? rotate_about(axis, angle, y) : y;
    if (!translate) return r;
    if (1.0 - r.z < 1e-13) return kNorth;
    return unchart_south(chart_south(r) - w0);
  }
  Vec3 apply_inverse(const Vec3& y) const {
    Vec3 r = y;
    if (translate) {
      if (1.0 - r.z < 1e-13)
        r = kNorth;
      else
        r = unchart_south(chart_south(r) + w0);
    }
    return rotate ? rotate_about(axis, -angle, r) : r;
  }
};

PoleTransport make_transport(const Vec3& a, const Vec3& b) {
  PoleTransport t;
  double ca = std::clamp(dot(a, kNorth), -1.0, 1.0);
  if (ca < 1.0 - 1e-14) {
    t.rotate = true;
    t.angle = std::acos(ca);
    Vec3 ax = cross(a, kNorth);
    t.axis = norm(ax) > 1e-12 ? normalized(ax) : Vec3{1.0, 0.0, 0.0};
  }
  Vec3 b1 = t.rotate ? rotate_about(t.axis, t.angle, b) : b;
  Vec2 w0 = chart_south(b1);
  if (norm(w0) > 1e-13) {
    t.translate = true;
    t.w0 = w0;
  }
  return t;
}

using SphereFn = std::function<Vec3(const Vec3&)>;

// Compass pattern search on the sphere for a scalar objective.  The eval
// budget guards against slow crawls along shallow valleys of warped maps.
template <class F>
Vec3 compass_extremize(const F& fn, Vec3 p, double h0, bool maximize, double h_floor = 1e-6,
                       int max_evals = 20000) {
  double fp = fn(p);
  double sgn = maximize ? 1.0 : -1.0;
  int evals = 0;
  for (double h = h0; h > h_floor && evals < max_evals;) {
    Vec3 e1 = any_orthogonal(p);
    Vec3 e2 = cross(p, e1);
    bool moved = false;
    for (const Vec2& d : {Vec2{1, 0}, Vec2{-1, 0}, Vec2{0, 1}, Vec2{0, -1}, Vec2{1, 1},
                          Vec2{-1, -1}, Vec2{1, -1}, Vec2{-1, 1}}) {
      Vec3 q = normalized(p + e1 * (h * d.x) + e2 * (h * d.y));
      double fq = fn(q);
      ++evals;
      if (sgn * (fq - fp) > 0.0) {
        p = q;
        fp = fq;
        moved = true;
        break;
      }
    }
    if (!moved) h *= 0.5;
  }
  return p;
}

// Weighted Birkhoff average of the wrapped longitude step; converges far
// faster than the plain average for quasi-periodic orbits.
double weighted_rotation(const SphereFn& fp, const Vec3& x0, int iterations) {
  Vec3 z = x0;
  double lam_prev = std::atan2(z.y, z.x);
  double acc = 0.0, wsum = 0.0;
  for (int k = 1; k <= iterations; ++k) {
    z = fp(z);
    double lam = std::atan2(z.y, z.x);
    double d = lam - lam_prev;
    d -= kTau * std::round(d / kTau);
    lam_prev = lam;
    double t = double(k) / double(iterations + 1);
    double w = std::exp(-1.0 / (t * (1.0 - t)));
    acc += w * d;
    wsum += w;
  }
  return acc / (wsum * kTau);
}

// Per-bin iterate choices n with frac(n rho) closest to the bin phase j/N.
struct SnapTable {
  double rho = 0.0;
  std::vector<int> n;
  double max_err = 0.0;

  int at(double t) const {
    int N = int(n.size());
    return n[size_t(((std::lround(frac(t) * N)) % N + N) % N)];
  }
};

SnapTable build_snap(double rho, int bins, int cap) {
  SnapTable s;
  s.rho = rho;
  s.n.assign(size_t(bins), 0);
  std::vector<double> err(size_t(bins), std::numeric_limits<double>::infinity());
  for (int k = 0; k <= cap; ++k) {
    double phase = frac(double(k) * rho);
    int j = int(std::lround(phase * double(bins))) % bins;
    double e = std::fabs(circle_diff(phase, double(j) / double(bins)));
    if (e < err[size_t(j)]) {
      err[size_t(j)] = e;
      s.n[size_t(j)] = k;
    }
  }
  for (double e : err) s.max_err = std::max(s.max_err, e);
  return s;
}

// Orbit samples at model phases j/S.  All iterates are sorted by phase and
// each vertex is blended from its two bracketing iterates, so vertices stay
// on the sampled curve with phase error bounded by the bracket gap rather
// than the nearest-return error; a raw nearest-return vertex slips far enough
// along the curve to scramble order tests between close orbits.
std::vector<Vec3> snapped_orbit(const SphereFn& fp, double rho, const Vec3& x, int S, int cap) {
  std::vector<std::pair<double, Vec3>> samples;
  samples.reserve(size_t(cap) + 1);
  samples.emplace_back(0.0, x);
  Vec3 z = x;
  for (int k = 1; k <= cap; ++k) {
    z = fp(z);
    samples.emplace_back(frac(double(k) * rho), z);
  }
  std::sort(samples.begin(), samples.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double max_span = frac(samples.front().first - samples.back().first + 1.0);
  for (size_t i = 0; i + 1 < samples.size(); ++i)
    max_span = std::max(max_span, samples[i + 1].first - samples[i].first);
  if (max_span > 0.02)
    throw Error(ErrorCode::ClosureSamplingFailure, "orbit sampling left empty sectors");
  std::vector<Vec3> pts(static_cast<size_t>(S));
  for (int j = 0; j < S; ++j) {
    double t = double(j) / double(S);
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const auto& a, double v) { return a.first < v; });
    const auto& hi = it == samples.end() ? samples.front() : *it;
    const auto& lo = it == samples.begin() ? samples.back() : *(it - 1);
    double span = hi.first - lo.first;
    double off = t - lo.first;
    if (span < 0.0) span += 1.0;
    if (off < 0.0) off += 1.0;
    double w = span < 1e-15 ? 0.0 : std::clamp(off / span, 0.0, 1.0);
    pts[size_t(j)] = normalized(lo.second * (1.0 - w) + hi.second * w);
  }
  return pts;
}

long mod_inverse(long k, long n) {
  long t = 0, nt = 1, r = n, nr = k % n;
  while (nr != 0) {
    long q = r / nr;
    long tmp = t - q * nt;
    t = nt;
    nt = tmp;
    tmp = r - q * nr;
    r = nr;
    nr = tmp;
  }
  if (r != 1) throw std::invalid_argument("mod_inverse: arguments not coprime");
  return ((t % n) + n) % n;
}

std::pair<Vec3, Vec3> fixed_point_pair_vec(const MapExpr& f);

void require_sphere_map(const MapExpr& f, const char* where) {
  auto s = f.space();
  if (s && *s != Space::Sphere)
    throw Error(ErrorCode::SpaceMismatch, std::string(where) + ": sphere map required");
  if (f.is_parametric())
    throw std::invalid_argument(std::string(where) + ": bind the parameter first");
}

}  // namespace

// ---------------------------------------------------------------------------
// Fixed points.
// ---------------------------------------------------------------------------

namespace {

// Fixed points read off the expression tree when the map is an explicit
// conjugate of a nontrivial rotation.  Conjugating warps can be ill
// conditioned enough (shear condition numbers beyond 1e5) that no landscape
// descent on |f(x) - x| is reliable, while the algebraic answer is exact.
std::optional<std::pair<Vec3, Vec3>> symbolic_fixed_pair(
    const std::shared_ptr<const MapExpr::Node>& n) {
  switch (n->kind) {
    case MapKind::SphereRotation: {
      double a = n->a - kTau * std::round(n->a / kTau);
      if (std::fabs(a) < 1e-15) return std::nullopt;
      Vec3 u = normalized(n->vec);
      return std::make_pair(u, u * -1.0);
    }
    case MapKind::Inverse:
      return symbolic_fixed_pair(n->f);
    case MapKind::Power:
      if (n->k == 0) return std::nullopt;
      return symbolic_fixed_pair(n->f);
    case MapKind::Conjugation: {
      auto inner = symbolic_fixed_pair(n->f);
      if (!inner) return std::nullopt;
      MapExpr h = wrap_node(n->g);
      return std::make_pair(h.eval_sphere(inner->first), h.eval_sphere(inner->second));
    }
    default:
      return std::nullopt;
  }
}

// Rotation number read off the expression tree for explicit rotation
// conjugates.  Longitude-step averaging assumes each step moves less than a
// half turn, which strongly sheared conjugates violate; the algebraic value
// is exact and free of that restriction.  Conjugation preserves the rotation
// number (and flips its sign under a reversing conjugator), inversion
// negates it, powers multiply it.
std::optional<double> symbolic_rotation_turns(const std::shared_ptr<const MapExpr::Node>& n) {
  switch (n->kind) {
    case MapKind::SphereRotation:
      return n->a / kTau;
    case MapKind::Inverse: {
      auto r = symbolic_rotation_turns(n->f);
      if (!r) return std::nullopt;
      return -*r;
    }
    case MapKind::Power: {
      auto r = symbolic_rotation_turns(n->f);
      if (!r) return std::nullopt;
      return double(n->k) * *r;
    }
    case MapKind::Conjugation: {
      auto r = symbolic_rotation_turns(n->f);
      if (!r) return std::nullopt;
      return wrap_node(n->g).orientation() < 0 ? -*r : *r;
    }
    default:
      return std::nullopt;
  }
}

// Compass descent with deterministic restart kicks.  Strongly sheared
// conjugates surround each displacement zero with ring shaped valley minima
// that trap a plain pattern search; hopping a few ring spacings and
// re-descending walks the minimum inward ring by ring.
template <class F>
Vec3 descend_with_kicks(const F& fn, const Vec3& seed) {
  Vec3 c = compass_extremize(fn, seed, 0.05, false, 1e-8, 12000);
  double dc = fn(c);
  if (dc > 5e-2) return c;
  static const double kick_radius[6] = {0.03, 0.01, 0.003, 0.02, 0.006, 0.04};
  int stale = 0;
  for (int round = 0; round < 18 && dc > 1e-7 && stale < 7; ++round) {
    double rad = kick_radius[round % 6];
    Vec3 e1 = any_orthogonal(c);
    Vec3 e2 = cross(c, e1);
    Vec3 best = c;
    double best_v = dc;
    for (const Vec2& d : {Vec2{1, 0}, Vec2{-1, 0}, Vec2{0, 1}, Vec2{0, -1}, Vec2{1, 1},
                          Vec2{-1, -1}, Vec2{1, -1}, Vec2{-1, 1}}) {
      double s = rad / norm(d);
      Vec3 q = normalized(c + e1 * (s * d.x) + e2 * (s * d.y));
      Vec3 q2 = compass_extremize(fn, q, rad * 0.5, 1e-8, 3000);
      double v = fn(q2);
      if (v < best_v) {
        best = q2;
        best_v = v;
      }
    }
    if (best_v < dc) {
      c = best;
      dc = best_v;
      stale = 0;
    } else {
      ++stale;
    }
  }
  return compass_extremize(fn, c, 1e-4, false, 1e-9, 12000);
}

std::pair<Vec3, Vec3> fixed_point_pair_vec(const MapExpr& f) {
  require_sphere_map(f, "fixed_point_pair");
  if (f.orientation() < 0)
    throw std::invalid_argument("fixed_point_pair: orientation-preserving map required");

  std::vector<Vec3> scan = fibonacci_lattice(96);
  std::vector<double> disp(scan.size(), 0.0);
  parallel_for(scan.size(), [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) disp[i] = chord(f.eval_sphere(scan[i]), scan[i]);
  });
  double d_max = *std::max_element(disp.begin(), disp.end());
  if (d_max <= 1e-9)
    throw std::invalid_argument("fixed_point_pair: map is the identity on the sphere");

  if (auto sym = symbolic_fixed_pair(f.node_ptr())) {
    auto [pa, pb] = *sym;
    if (chord(f.eval_sphere(pa), pa) <= 1e-9 && chord(f.eval_sphere(pb), pb) <= 1e-9 &&
        chord(pa, pb) > 1e-6) {
      bool swap = pb.z > pa.z + 1e-12 ||
                  (std::fabs(pb.z - pa.z) <= 1e-12 &&
                   (pb.x > pa.x + 1e-12 || (std::fabs(pb.x - pa.x) <= 1e-12 && pb.y > pa.y)));
      if (swap) std::swap(pa, pb);
      return {pa, pb};
    }
  }

  // Up to 12 well separated displacement basins, smallest displacement first.
  std::vector<size_t> order(scan.size());
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return disp[i] < disp[j]; });
  std::vector<Vec3> seeds;
  for (size_t idx : order) {
    if (seeds.size() >= 12) break;
    bool taken = false;
    for (const Vec3& s : seeds)
      if (chord(s, scan[idx]) < 0.35) taken = true;
    if (!taken) seeds.push_back(scan[idx]);
  }

  auto displacement = [&](const Vec3& x) { return chord(f.eval_sphere(x), x); };
  std::vector<Vec3> zeros;
  for (const Vec3& seed : seeds) {
    Vec3 c = descend_with_kicks(displacement, seed);
    if (displacement(c) > 1e-2) continue;  // basin bottoms out away from zero
    bool dup = false;
    for (const Vec3& z : zeros)
      if (chord(z, c) < 1e-5) dup = true;
    if (dup) continue;
    Vec3 e1 = any_orthogonal(c);
    Vec3 e2 = cross(c, e1);
    // The map in gnomonic coordinates at c, with the denominator clamped so
    // the chart image stays continuous even if a point leaves the hemisphere.
    auto chart_map = [&](const Vec2& w) -> Vec2 {
      Vec3 y = normalized(c + e1 * w.x + e2 * w.y);
      Vec3 z = f.eval_sphere(y);
      double bz = std::max(dot(z, c), 0.05);
      return {dot(z, e1) / bz, dot(z, e2) / bz};
    };
    // Newton refinement of the chart displacement. Strongly sheared
    // conjugates twist the displacement direction through full turns across
    // bands of chart width well below the compass accuracy, so the winding
    // certificate is only reliable on a box inside the linear regime of the
    // refined zero.
    auto chart_disp = [&](const Vec2& w) { return chart_map(w) - w; };
    Vec2 w{0.0, 0.0};
    double resid = norm(chart_disp(w));
    double sigma_lb = 1.0;
    for (int it = 0; it < 24 && resid > 1e-12; ++it) {
      const double h = 1e-7;
      Vec2 d0 = chart_disp(w);
      Vec2 jx = (chart_disp({w.x + h, w.y}) - chart_disp({w.x - h, w.y})) * (0.5 / h);
      Vec2 jy = (chart_disp({w.x, w.y + h}) - chart_disp({w.x, w.y - h})) * (0.5 / h);
      double det = jx.x * jy.y - jy.x * jx.y;
      double fro = std::sqrt(jx.x * jx.x + jx.y * jx.y + jy.x * jy.x + jy.y * jy.y);
      if (std::fabs(det) < 1e-14 * std::max(1.0, fro * fro)) break;
      sigma_lb = std::fabs(det) / std::max(fro, 1e-300);
      Vec2 step{-(jy.y * d0.x - jy.x * d0.y) / det, -(jx.x * d0.y - jx.y * d0.x) / det};
      double len = norm(step);
      if (len > 5e-3) step = step * (5e-3 / len);
      bool moved = false;
      for (int damp = 0; damp < 6 && !moved; ++damp, step = step * 0.5) {
        Vec2 trial = w + step;
        double rt = norm(chart_disp(trial));
        if (rt < resid) {
          w = trial;
          resid = rt;
          moved = true;
        }
      }
      if (!moved) break;
    }
    double box = 1e-2;
    if (resid <= 1e-10)
      box = std::min(1e-4, std::max(1e-6, 1e3 * resid / std::max(sigma_lb, 1e-9)));
    try {
      FixedPointResult r = find_fixed_point_field(chart_map, {w.x - box, w.y - box},
                                                  {w.x + box, w.y + box}, 1e-11);
      Vec3 y = normalized(c + e1 * r.point.x + e2 * r.point.y);
      for (const Vec3& z : zeros)
        if (chord(z, y) < 1e-6) dup = true;
      if (!dup) zeros.push_back(y);
    } catch (const Error& err) {
      // A seed whose box holds no zero or defies winding certification is
      // rejected; the final count check reports genuine failures.
      if (err.code() == ErrorCode::NoInteriorFixedPoint ||
          err.code() == ErrorCode::AmbiguousFixedPoints)
        continue;
      throw Error(ErrorCode::FixedPointCountMismatch,
                  std::string("displacement zero could not be certified: ") + err.what());
    }
  }
  if (zeros.size() != 2)
    throw Error(ErrorCode::FixedPointCountMismatch,
                "certified " + std::to_string(zeros.size()) + " displacement zeros, expected 2");
  Vec3 a = zeros[0], b = zeros[1];
  bool swap = b.z > a.z + 1e-12 ||
              (std::fabs(b.z - a.z) <= 1e-12 &&
               (b.x > a.x + 1e-12 || (std::fabs(b.x - a.x) <= 1e-12 && b.y > a.y)));
  if (swap) std::swap(a, b);
  return {a, b};
}

}  // namespace

std::pair<SurfacePoint, SurfacePoint> fixed_point_pair(const MapExpr& f) {
  auto [a, b] = fixed_point_pair_vec(f);
  return {SurfacePoint::sphere(a), SurfacePoint::sphere(b)};
}

// ---------------------------------------------------------------------------
// Linearization.
// ---------------------------------------------------------------------------

namespace {

struct LinImpl {
  int M = 0, L = 0;
  std::vector<std::vector<Vec3>> rings;  // poles-normalized frame; rings[0]=N, rings[M]=S
  std::vector<std::vector<Vec2>> polys;  // north-chart images of rings 1..M-1
  PoleTransport transport;

  Vec3 forward_model(double phi, double lambda) const {
    double u = std::clamp(phi / kPi, 0.0, 1.0) * double(M);
    int i = std::min(int(u), M - 1);
    double wr = u - double(i);
    double v = frac(lambda / kTau) * double(L);
    int j = std::min(int(v), L - 1);
    double wj = v - double(j);
    int j1 = (j + 1) % L;
    Vec3 lo = rings[size_t(i)][size_t(j)] * (1.0 - wj) + rings[size_t(i)][size_t(j1)] * wj;
    Vec3 hi =
        rings[size_t(i) + 1][size_t(j)] * (1.0 - wj) + rings[size_t(i) + 1][size_t(j1)] * wj;
    return normalized(lo * (1.0 - wr) + hi * wr);
  }

  // (polar angle, longitude) of a point in the poles-normalized frame.
  Vec2 inverse_model(const Vec3& y) const {
    if (chord(y, kNorth) < 1e-12) return {0.0, 0.0};
    if (chord(y, kSouth) < 1e-12) return {kPi, 0.0};
    Vec2 w = chart_north(y);
    auto north_side = [&](int i) { return polygon_winding(polys[size_t(i - 1)], w) != 0; };
    int lo, hi;
    if (north_side(1)) {
      lo = 0;
      hi = 1;
    } else if (!north_side(M - 1)) {
      lo = M - 1;
      hi = M;
    } else {
      lo = 1;
      hi = M - 1;  // north_side(lo) false, north_side(hi) true
      while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (north_side(mid))
          hi = mid;
        else
          lo = mid;
      }
    }
    double d_in = lo == 0 ? chord(y, kNorth) : polyline_distance3(rings[size_t(lo)], y);
    double d_out = hi == M ? chord(y, kSouth) : polyline_distance3(rings[size_t(hi)], y);
    double t = d_in + d_out > 0.0 ? d_in / (d_in + d_out) : 0.0;
    double phi = kPi * (double(lo) + t) / double(M);
    int ring_for_lambda = std::clamp(hi, 1, M - 1);
    int seg = 0;
    double sfrac = 0.0;
    polyline_distance3(rings[size_t(ring_for_lambda)], y, &seg, &sfrac);
    double lambda = kTau * (double(seg) + sfrac) / double(L);
    return {phi, lambda};
  }
};

SphereLinearization exact_rotation_path(const MapExpr& f, const Vec3& a, const Vec3& b) {
  SphereLinearization out;
  Vec3 u = a;
  Vec3 v = any_orthogonal(u);
  Vec3 w = f.eval_sphere(v);
  double alpha = std::atan2(dot(u, cross(v, w)), dot(v, w));
  double sup = 0.0;
  for (const Vec3& x : fibonacci_lattice(16))
    sup = std::max(sup, chord(f.eval_sphere(x), rotate_about(u, alpha, x)));
  if (sup > 1e-10) return out;  // caller falls through to the table construction

  out.exact_rotation = true;
  out.rho = frac(alpha / kTau);
  out.fix_a = a;
  out.fix_b = b;
  for (int n = 1; n <= 4096; ++n)
    if (std::fabs(circle_diff(double(n) * out.rho, 0.0)) <= 1e-9) {
      out.finite = true;
      out.order = n;
      out.numerator = int(((std::lround(double(n) * out.rho) % n) + n) % n);
      break;
    }
  Vec3 e1 = v, e2 = cross(u, v), e3 = u;
  out.from_model = [e1, e2, e3](const Vec3& p) {
    return normalized(e1 * p.x + e2 * p.y + e3 * p.z);
  };
  out.to_model = [e1, e2, e3](const Vec3& y) {
    return normalized(Vec3{dot(y, e1), dot(y, e2), dot(y, e3)});
  };
  double defect = 0.0;
  for (int s = 0; s < 24; ++s)
    for (int j = 0; j < 24; ++j) {
      double phi = kPi * (double(s) + 0.5) / 24.0;
      double lam = kTau * (double(j) + 0.37) / 24.0;
      Vec3 p = sph_point(phi, lam);
      Vec3 got = out.to_model(f.eval_sphere(out.from_model(p)));
      Vec3 want = sph_point(phi, lam + kTau * out.rho);
      defect = std::max(defect, chord(got, want));
    }
  out.defect = defect;
  return out;
}

DiskAction make_chart_family(const std::shared_ptr<const SphereFn>& fp,
                             const std::shared_ptr<const SnapTable>& snap, bool north) {
  auto fam = [fp, snap, north](double t, const Vec2& w) -> Vec2 {
    Vec3 y = north ? unchart_north(w) : unchart_south(w);
    int n = snap->at(t);
    for (int k = 0; k < n; ++k) y = (*fp)(y);
    return north ? chart_north(y) : chart_south(y);
  };
  DiskAction a = DiskAction::family(fam, {0.0, 0.0});
  double rho = snap->rho;
  a.set_orbit_fn([fp, rho, north](const Vec2& w, int S) {
    Vec3 y = north ? unchart_north(w) : unchart_south(w);
    std::vector<Vec3> orb = snapped_orbit(*fp, rho, y, S, std::max(4000, 24 * S));
    std::vector<Vec2> out(orb.size());
    for (size_t i = 0; i < orb.size(); ++i)
      out[i] = north ? chart_north(orb[i]) : chart_south(orb[i]);
    return out;
  });
  return a;
}

DiskAction make_chart_cyclic(const std::shared_ptr<const SphereFn>& sigma, int order, bool north) {
  auto step = [sigma, north](const Vec2& w) -> Vec2 {
    Vec3 y = north ? unchart_north(w) : unchart_south(w);
    y = (*sigma)(y);
    return north ? chart_north(y) : chart_south(y);
  };
  return DiskAction::cyclic(step, order, {0.0, 0.0});
}

}  // namespace

SphereLinearization linearize_sphere_map(const MapExpr& f, int resolution) {
  require_sphere_map(f, "linearize_sphere_map");
  if (f.orientation() < 0)
    throw std::invalid_argument("linearize_sphere_map: orientation-preserving map required");
  if (resolution < 64 || resolution > 4096)
    throw std::invalid_argument("linearize_sphere_map: resolution out of range [64, 4096]");

  auto [a, b] = fixed_point_pair_vec(f);

  if (chord(a, -b) <= 1e-9) {
    SphereLinearization fast = exact_rotation_path(f, a, b);
    if (fast.exact_rotation) return fast;
  }

  auto impl = std::make_shared<LinImpl>();
  impl->transport = make_transport(a, b);
  MapExpr fcopy = f;
  PoleTransport T = impl->transport;
  auto fp = std::make_shared<const SphereFn>(
      [fcopy, T](const Vec3& y) { return T.apply(fcopy.eval_sphere(T.apply_inverse(y))); });

  // A reference point whose orbit keeps clear of both poles.
  Vec3 x_mid = kNorth;
  double best_score = -1.0;
  for (const Vec3& cand : fibonacci_lattice(12)) {
    double score = std::numeric_limits<double>::infinity();
    Vec3 z = cand;
    for (int k = 0; k < 64 && score > best_score; ++k) {
      score = std::min(score, std::min(chord(z, kNorth), chord(z, kSouth)));
      z = (*fp)(z);
    }
    if (score > best_score) {
      best_score = score;
      x_mid = cand;
    }
  }

  // Finite order detection by first return.
  int order = 0;
  {
    Vec3 z = x_mid;
    for (int k = 1; k <= 160; ++k) {
      z = (*fp)(z);
      if (chord(z, x_mid) <= 1e-6) {
        order = k;
        break;
      }
    }
    if (order > 0) {
      double sup = 0.0;
      for (const Vec3& x : fibonacci_lattice(12)) {
        Vec3 y = x;
        for (int k = 0; k < order; ++k) y = (*fp)(y);
        sup = std::max(sup, chord(y, x));
      }
      if (sup > 1e-6) order = 0;
    }
  }

  SphereLinearization out;
  out.fix_a = a;
  out.fix_b = b;

  int numerator = 0;
  std::shared_ptr<const SnapTable> snap;
  std::shared_ptr<const SphereFn> sigma;
  std::optional<double> rho_sym = symbolic_rotation_turns(f.node_ptr());
  if (order > 0) {
    double crude =
        rho_sym ? frac(*rho_sym) : weighted_rotation(*fp, x_mid, std::max(2048, 16 * order));
    numerator = int(((std::lround(crude * order) % order) + order) % order);
    if (std::fabs(circle_diff(crude, double(numerator) / double(order))) > 0.25 / double(order))
      throw Error(ErrorCode::ClosureSamplingFailure,
                  "rotation number inconsistent with the detected period");
    long g = std::gcd(long(numerator), long(order));
    if (g > 1) {
      order = int(order / g);
      numerator = int(numerator / g);
    }
    out.finite = true;
    out.order = order;
    out.numerator = numerator;
    out.rho = double(numerator) / double(order);
    long m_inv = mod_inverse(numerator, order);
    sigma = std::make_shared<const SphereFn>([fp, m_inv](const Vec3& y) {
      Vec3 z = y;
      for (long k = 0; k < m_inv; ++k) z = (*fp)(z);
      return z;
    });
  } else {
    out.rho = rho_sym ? frac(*rho_sym) : frac(weighted_rotation(*fp, x_mid, 8192));
    SnapTable st = build_snap(out.rho, 1024, 2500);
    if (st.max_err > 1.0 / 256.0)
      throw Error(ErrorCode::ClosureSamplingFailure,
                  "iterates do not equidistribute: snapping error " + std::to_string(st.max_err));
    snap = std::make_shared<const SnapTable>(std::move(st));
  }

  int M = std::clamp(resolution / 2, 32, 1024) & ~1;
  int L = std::clamp(resolution, 64, 2048);
  if (out.finite) L = ((L + out.order - 1) / out.order) * out.order;
  impl->M = M;
  impl->L = L;

  // One transversal arc per hemisphere, built in the matching chart.
  DiskAction act_n = out.finite ? make_chart_cyclic(sigma, out.order, true)
                                : make_chart_family(fp, snap, true);
  DiskAction act_s = out.finite ? make_chart_cyclic(sigma, out.order, false)
                                : make_chart_family(fp, snap, false);
  Vec2 wmid_n = chart_north(x_mid);
  Vec2 wmid_s = chart_south(x_mid);
  double gap_n = std::max(norm(wmid_n) * 1.8 / double(M), 2e-4);
  double gap_s = std::max(norm(wmid_s) * 1.8 / double(M), 2e-4);
  TransversalArc arc_n = transversal_arc(act_n, wmid_n, default_chain_schedule(16), gap_n);
  TransversalArc arc_s = transversal_arc(act_s, wmid_s, default_chain_schedule(16), gap_s);

  impl->rings.assign(size_t(M) + 1, {});
  impl->rings[0].assign(size_t(L), kNorth);
  impl->rings[size_t(M)].assign(size_t(L), kSouth);
  int half = M / 2;
  double rho = out.rho;
  parallel_for(size_t(M - 1), [&](size_t lo, size_t hi) {
    for (size_t ii = lo; ii < hi; ++ii) {
      int i = int(ii) + 1;
      bool north = i <= half;
      double r = north ? double(i) / double(half) : double(M - i) / double(half);
      Vec2 w = north ? arc_n.sample(r) : arc_s.sample(r);
      Vec3 X = north ? unchart_north(w) : unchart_south(w);
      if (!out.finite) {
        impl->rings[size_t(i)] = snapped_orbit(*fp, rho, X, L, std::max(6000, 24 * L));
      } else {
        int n = out.order, per = L / n;
        std::vector<Vec3> ring(size_t(L), X);
        Vec2 wx = north ? chart_north(X) : chart_south(X);
        Vec3 sX = (*sigma)(X);
        Vec2 wsx = north ? chart_north(sX) : chart_south(sX);
        for (int m = 0; m < per; ++m) {
          Vec2 wm = lerp2(wx, wsx, double(m) / double(per));
          ring[size_t(m)] = north ? unchart_north(wm) : unchart_south(wm);
        }
        for (int k = 1; k < n; ++k)
          for (int m = 0; m < per; ++m)
            ring[size_t(k * per + m)] = (*sigma)(ring[size_t((k - 1) * per + m)]);
        impl->rings[size_t(i)] = std::move(ring);
      }
    }
  });

  impl->polys.assign(size_t(M - 1), {});
  parallel_for(size_t(M - 1), [&](size_t lo, size_t hi) {
    for (size_t ii = lo; ii < hi; ++ii) {
      const auto& ring = impl->rings[ii + 1];
      std::vector<Vec2> poly(ring.size());
      for (size_t j = 0; j < ring.size(); ++j) poly[j] = chart_north(ring[j]);
      impl->polys[ii] = std::move(poly);
    }
  });

  // Conjugation defect against the model rotation, sampled off-node.
  {
    const int Sd = 50, Ld = 96;
    std::vector<double> rowmax(size_t(Sd), 0.0);
    parallel_for(size_t(Sd), [&](size_t lo, size_t hi) {
      for (size_t s = lo; s < hi; ++s) {
        double phi = s == 0 ? 0.02 * kPi
                            : (s == 1 ? 0.98 * kPi : kPi * (double(s) - 1.5) / double(Sd - 2));
        double worst = 0.0;
        for (int j = 0; j < Ld; ++j) {
          double lam = kTau * (double(j) + 0.37) / double(Ld);
          Vec3 y = impl->forward_model(phi, lam);
          Vec3 z = (*fp)(y);
          Vec2 pl = impl->inverse_model(z);
          Vec3 got = sph_point(pl.x, pl.y);
          Vec3 want = sph_point(phi, lam + kTau * rho);
          worst = std::max(worst, chord(got, want));
        }
        rowmax[s] = worst;
      }
    });
    for (double v : rowmax) out.defect = std::max(out.defect, v);
  }

  out.rows = M + 1;
  out.cols = L;
  out.table.assign(size_t(M) + 1, {});
  for (int i = 0; i <= M; ++i) {
    out.table[size_t(i)].resize(size_t(L));
    for (int j = 0; j < L; ++j)
      out.table[size_t(i)][size_t(j)] = T.apply_inverse(impl->rings[size_t(i)][size_t(j)]);
  }
  out.from_model = [impl](const Vec3& p) {
    double phi = std::acos(std::clamp(p.z, -1.0, 1.0));
    double lam = std::atan2(p.y, p.x);
    return impl->transport.apply_inverse(impl->forward_model(phi, lam));
  };
  out.to_model = [impl](const Vec3& y) {
    Vec2 pl = impl->inverse_model(impl->transport.apply(y));
    return sph_point(pl.x, pl.y);
  };
  return out;
}

// ---------------------------------------------------------------------------
// Invariant disks.
// ---------------------------------------------------------------------------

JordanCurve invariant_disk(const GroupSpec& spec, const SurfacePoint& x0, double epsilon,
                           int raster_resolution, CubeMap* mask_out) {
  if (spec.space() != Space::Sphere)
    throw Error(ErrorCode::SpaceMismatch, "invariant_disk: sphere group required");
  require_space(x0, Space::Sphere, "invariant_disk");
  if (epsilon <= 0.0) throw std::invalid_argument("invariant_disk: epsilon must be positive");
  Vec3 c0 = x0.xyz();

  for (const MapExpr& g : spec.generators)
    if (chord(g.eval_sphere(c0), c0) > 1e-9)
      throw std::invalid_argument("invariant_disk: x0 is not fixed by a generator");
  for (const FamilyTemplate& fam : spec.families)
    for (double t : {0.37, 0.7, 0.918})
      if (chord(fam.at(t).eval_sphere(c0), c0) > 1e-9)
        throw std::invalid_argument("invariant_disk: x0 is not fixed by a family element");

  CubeMap cm(raster_resolution);
  double px = cm.pixel_radius();

  // Seed radius planning.  The rasterized union of family images of the seed
  // ball is family-invariant by construction; every image contains x0, so the
  // union is a disk whose outer radius is about (local stretch) * eta.  The
  // stretch is measured at x0 itself: a bound taken over the whole epsilon cap
  // would be dominated by regions the seed orbit never visits.
  std::vector<MapExpr> probe_family = sample_group_elements(spec, 96);
  auto family_stretch_at = [&](double radius) {
    Vec3 e1 = any_orthogonal(c0);
    Vec3 e2 = cross(c0, e1);
    std::vector<Vec3> probes;
    for (int k = 0; k < 8; ++k) {
      double a = kTau * (static_cast<double>(k) / 8.0);
      probes.push_back(normalized(c0 + (e1 * std::cos(a) + e2 * std::sin(a)) * radius));
    }
    std::vector<double> worst(probe_family.size(), 1.0);
    parallel_for(probe_family.size(), [&](size_t lo, size_t hi) {
      for (size_t i = lo; i < hi; ++i) {
        Vec3 gx = probe_family[i].eval_sphere(c0);
        for (const Vec3& q : probes)
          worst[i] =
              std::max(worst[i], chord(probe_family[i].eval_sphere(q), gx) / chord(q, c0));
      }
    });
    double s = 1.0;
    for (double v : worst) s = std::max(s, v);
    return s;
  };
  double stretch = family_stretch_at(std::max(1e-4, px / 4.0));
  double eta = 0.8 * epsilon / (1.35 * stretch);
  // Secant stretch over the seed sphere can exceed the pointwise value; shrink
  // until the two agree.
  for (int pass = 0; pass < 3; ++pass) {
    double wider = family_stretch_at(std::min(eta, 0.5));
    if (wider <= 1.35 * stretch) break;
    stretch = wider;
    eta = 0.8 * epsilon / (1.35 * stretch);
  }
  if (eta < 4.0 * px)
    throw Error(ErrorCode::ResolutionTooCoarse,
                "seed radius " + std::to_string(eta) + " below 4 pixels");
  // Measured outer reach of the seed ball under the family.
  double delta = eta;
  {
    Vec3 e1 = any_orthogonal(c0);
    Vec3 e2 = cross(c0, e1);
    std::vector<Vec3> probes;
    for (int k = 0; k < 16; ++k) {
      double a = kTau * (static_cast<double>(k) / 16.0);
      probes.push_back(normalized(c0 + (e1 * std::cos(a) + e2 * std::sin(a)) * eta));
    }
    std::vector<double> far(probe_family.size(), eta);
    parallel_for(probe_family.size(), [&](size_t lo, size_t hi) {
      for (size_t i = lo; i < hi; ++i)
        for (const Vec3& q : probes)
          far[i] = std::max(far[i], chord(probe_family[i].eval_sphere(q), c0));
    });
    for (double v : far) delta = std::max(delta, v);
  }

  // Enough samples that consecutive images of the seed ball overlap and the
  // rim of the union is scalloped below pixel scale even at its far tips.
  int m_fam = int(std::clamp(std::max(std::ceil(2.3 / std::sqrt(eta * px)),
                                      std::ceil(2.5 * kTau * delta / px)),
                             160.0, 4096.0));
  std::vector<MapExpr> elements = sample_group_elements(spec, m_fam);
  std::vector<MapExpr> inverses;
  inverses.reserve(elements.size());
  for (const MapExpr& g : elements) inverses.push_back(MapExpr::inverse(g));

  // Pull back pixel centers: a pixel belongs to some group image of the seed
  // disk exactly when an inverse element carries it into the seed ball.
  double reach = std::min(epsilon - px, 1.15 * delta + 3.0 * px);
  std::vector<size_t> candidates;
  for (size_t p = 0; p < cm.size(); ++p)
    if (chord(cm.center(p), c0) <= reach) candidates.push_back(p);
  std::vector<uint8_t> marked(candidates.size(), 0);
  parallel_for(candidates.size(), [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      Vec3 c = cm.center(candidates[i]);
      for (const MapExpr& ginv : inverses)
        if (chord(ginv.eval_sphere(c), c0) <= eta) {
          marked[i] = 1;
          break;
        }
    }
  });
  for (size_t i = 0; i < candidates.size(); ++i)
    if (marked[i]) cm.at(candidates[i]) = 1;

  // Patch pinholes left by pullback sampling without growing the region.
  for (int round = 0; round < 2; ++round) {
    std::vector<size_t> to_mark;
    for (size_t p : candidates) {
      if (cm.at(p) != 0) continue;
      int hits = 0;
      for (size_t nb : cm.neighbors4(p))
        if (cm.at(nb) == 1) ++hits;
      if (hits >= 3) to_mark.push_back(p);
    }
    for (size_t p : to_mark) cm.at(p) = 1;
  }

  size_t anti = cm.locate(-c0);
  if (cm.at(anti) != 0)
    throw Error(ErrorCode::ResolutionTooCoarse, "antipode landed inside the rasterized union");
  cm.flood_fill(anti, 2);
  if (cm.at(cm.locate(c0)) != 1)
    throw Error(ErrorCode::ResolutionTooCoarse, "seed center pixel missing from the union");

  std::vector<size_t> cycle = cm.trace_boundary(2);
  if (mask_out) *mask_out = cm;

  JordanCurve curve;
  curve.points.reserve(cycle.size());
  for (size_t p : cycle) curve.points.push_back(cm.center(p));
  curve.points = smooth_closed_curve(curve.points, 2);

  // Polish each vertex onto the level set {min_i |g_i^-1(x) - x0| = eta}.
  // The minimum runs over a sampled subgroup, so the level set is carried to
  // itself by every sampled element; the polished curve is invariant up to
  // the family sampling gap instead of the pixel size.
  {
    auto inside_union = [&](const Vec3& q) {
      for (const MapExpr& ginv : inverses)
        if (chord(ginv.eval_sphere(q), c0) <= eta) return true;
      return false;
    };
    double geo_cap = 2.0 * std::asin(std::clamp(epsilon / 2.0, 0.0, 1.0));
    parallel_for(curve.points.size(), [&](size_t lo, size_t hi) {
      for (size_t i = lo; i < hi; ++i) {
        Vec3 v = curve.points[i];
        Vec3 u = v - c0 * dot(v, c0);
        double un = norm(u);
        if (un < 1e-12) continue;
        u = u * (1.0 / un);
        double theta_v = std::atan2(un, dot(v, c0));
        double hi_t = std::min(geo_cap, 1.3 * theta_v + 2.0 * px);
        auto at = [&](double t) { return c0 * std::cos(t) + u * std::sin(t); };
        int grow = 0;
        while (inside_union(at(hi_t)) && grow < 6) {
          if (hi_t >= geo_cap) break;
          hi_t = std::min(geo_cap, hi_t * 1.3);
          ++grow;
        }
        if (inside_union(at(hi_t))) continue;  // clipped; containment checks catch it
        double lo_t = 0.0;
        for (int it = 0; it < 26; ++it) {
          double mid = 0.5 * (lo_t + hi_t);
          (inside_union(at(mid)) ? lo_t : hi_t) = mid;
        }
        curve.points[i] = at(0.5 * (lo_t + hi_t));
      }
    });
    std::vector<Vec3> dedup;
    dedup.reserve(curve.points.size());
    for (const Vec3& p : curve.points)
      if (dedup.empty() || chord(p, dedup.back()) > 1e-9) dedup.push_back(p);
    while (dedup.size() > 2 && chord(dedup.front(), dedup.back()) <= 1e-9) dedup.pop_back();
    if (dedup.size() < 8)
      throw Error(ErrorCode::ResolutionTooCoarse, "polished boundary collapsed");
    curve.points = std::move(dedup);
  }
  curve.witness = c0;
  curve.eta = eta;
  curve.delta = delta;
  curve.resolution = raster_resolution;
  curve.pixel_radius = px;
  return curve;
}

double curve_invariance_defect(const JordanCurve& curve, const MapExpr& g) {
  auto s = g.space();
  if (s && *s != Space::Sphere)
    throw Error(ErrorCode::SpaceMismatch, "curve_invariance_defect: sphere map required");
  std::vector<double> worst(curve.points.size(), 0.0);
  parallel_for(curve.points.size(), [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i)
      worst[i] = polyline_distance3(curve.points, g.eval_sphere(curve.points[i]));
  });
  double d = 0.0;
  for (double v : worst) d = std::max(d, v);
  return d;
}

// ---------------------------------------------------------------------------
// Newman bounds.
// ---------------------------------------------------------------------------

namespace {

double chord_to_norm(double c) { return 2.0 * std::asin(std::clamp(c / 2.0, 0.0, 1.0)) / (kPi / 2.0); }

}  // namespace

NewmanReport newman_check(const MapExpr& f, int p, const SampleGrid& grid) {
  require_sphere_map(f, "newman_check");
  if (p < 2) throw std::invalid_argument("newman_check: period must be at least 2");
  if (grid.space != Space::Sphere)
    throw Error(ErrorCode::SpaceMismatch, "newman_check: sphere grid required");

  size_t n = grid.points.size();
  std::vector<std::vector<double>> partial(size_t(p) + 1);
  for (auto& v : partial) v.assign(n, 0.0);
  parallel_for(n, [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      Vec3 x = grid.points[i].xyz();
      Vec3 z = x;
      for (int r = 1; r <= p; ++r) {
        z = f.eval_sphere(z);
        partial[size_t(r)][i] = chord(z, x);
      }
    }
  });
  double residual = *std::max_element(partial[size_t(p)].begin(), partial[size_t(p)].end());
  if (residual > 1e-6)
    throw Error(ErrorCode::NotPeriodic, "residual " + std::to_string(residual) + " after " +
                                            std::to_string(p) + " iterates");

  // Refine each supremum with a local pattern search from the best grid seeds.
  double h0 = 2.0 * std::sqrt(4.0 * kPi / double(n));
  NewmanReport rep;
  rep.period = p;
  for (int r = 1; r < p; ++r) {
    auto displacement = [&](const Vec3& x) {
      Vec3 z = x;
      for (int k = 0; k < r; ++k) z = f.eval_sphere(z);
      return chord(z, x);
    };
    std::vector<std::pair<double, size_t>> ranked(n);
    for (size_t i = 0; i < n; ++i) ranked[i] = {partial[size_t(r)][i], i};
    std::partial_sort(ranked.begin(), ranked.begin() + std::min<size_t>(8, n), ranked.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    double best = 0.0;
    for (size_t s = 0; s < std::min<size_t>(8, n); ++s) {
      Vec3 seed = grid.points[ranked[s].second].xyz();
      Vec3 arg = compass_extremize(displacement, seed, h0, true);
      best = std::max(best, displacement(arg));
    }
    double norm_d = chord_to_norm(best);
    if (r == 1) {
      rep.d_id_chord = best;
      rep.d_id_norm = norm_d;
    }
    if (norm_d > rep.max_iterate_norm) {
      rep.max_iterate_norm = norm_d;
      rep.max_iterate_chord = best;
      rep.argmax_iterate = r;
    }
  }
  rep.bound_two_over_p_ok = rep.d_id_norm > 2.0 / double(p);
  rep.bound_unit_ok = rep.max_iterate_norm > 1.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Involutions.
// ---------------------------------------------------------------------------

const char* involution_class_name(InvolutionClass c) {
  return c == InvolutionClass::Reflection ? "reflection" : "antipodal_type";
}

InvolutionClass classify_involution(const MapExpr& s) {
  require_sphere_map(s, "classify_involution");
  if (s.orientation() > 0)
    throw std::invalid_argument("classify_involution: orientation-reversing map required");

  SampleGrid grid = make_grid(Space::Sphere, 32);
  double inv_defect = 0.0;
  for (const SurfacePoint& q : grid.points) {
    Vec3 x = q.xyz();
    inv_defect = std::max(inv_defect, chord(s.eval_sphere(s.eval_sphere(x)), x));
    if (inv_defect > 1e-6) break;
  }
  if (inv_defect > 1e-6)
    throw Error(ErrorCode::NotPeriodic, "map is not an involution on the grid");

  std::vector<Vec3> scan = fibonacci_lattice(100);
  std::vector<double> disp(scan.size(), 0.0);
  parallel_for(scan.size(), [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) disp[i] = chord(s.eval_sphere(scan[i]), scan[i]);
  });
  std::vector<size_t> order(scan.size());
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return disp[i] < disp[j]; });

  auto displacement = [&](const Vec3& x) { return chord(s.eval_sphere(x), x); };
  double h0 = 2.0 * std::sqrt(4.0 * kPi / double(scan.size()));
  double d_min = std::numeric_limits<double>::infinity();
  std::vector<Vec3> seeds;
  for (size_t idx : order) {
    if (seeds.size() >= 8) break;
    bool near = false;
    for (const Vec3& t : seeds)
      if (chord(t, scan[idx]) < 0.1) near = true;
    if (near) continue;
    seeds.push_back(scan[idx]);
    Vec3 arg = compass_extremize(displacement, scan[idx], h0, false);
    d_min = std::min(d_min, displacement(arg));
  }

  if (d_min <= 1e-6) return InvolutionClass::Reflection;
  if (d_min >= 1e-2) return InvolutionClass::AntipodalType;
  throw Error(ErrorCode::Inconclusive,
              "minimum displacement " + std::to_string(d_min) + " between thresholds");
}

}  // namespace kerek
