#include "kerek/disk_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "kerek/error.hpp"
#include "kerek/parallel.hpp"

namespace kerek {

namespace {

Vec2 lerp(const Vec2& a, const Vec2& b, double s) {
  return {a.x * (1.0 - s) + b.x * s, a.y * (1.0 - s) + b.y * s};
}

Vec2 rotate2(const Vec2& v, double radians) {
  double c = std::cos(radians), s = std::sin(radians);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }

// Distance from p to a closed polyline, and the (segment, fraction) argmin.
double polyline_distance(const std::vector<Vec2>& poly, const Vec2& p, int* seg = nullptr,
                         double* frac_out = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    Vec2 d = b - a;
    double len2 = dot(d, d);
    double s = len2 > 0.0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
    double v = dist(lerp(a, b, s), p);
    if (v < best) {
      best = v;
      if (seg) *seg = int(i);
      if (frac_out) *frac_out = s;
    }
  }
  return best;
}

bool proper_crossing(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2) {
  double d1 = cross(a2 - a1, b1 - a1);
  double d2 = cross(a2 - a1, b2 - a1);
  double d3 = cross(b2 - b1, a1 - b1);
  double d4 = cross(b2 - b1, a2 - b1);
  return (d1 > 0.0) != (d2 > 0.0) && d1 != 0.0 && d2 != 0.0 && (d3 > 0.0) != (d4 > 0.0) &&
         d3 != 0.0 && d4 != 0.0;
}

// Strict nesting: every stride-th vertex of `inner` lies strictly inside the
// polygon `outer` and the polylines do not cross.
bool strictly_nested(const std::vector<Vec2>& inner, const std::vector<Vec2>& outer) {
  size_t stride = std::max<size_t>(1, inner.size() / 24);
  for (size_t i = 0; i < inner.size(); i += stride)
    if (polygon_winding(outer, inner[i]) == 0) return false;
  return polygon_crossings(inner, outer) == 0;
}

double polygon_area_abs(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    s += a.x * b.y - a.y * b.x;
  }
  return 0.5 * std::fabs(s);
}

// Enclosure order for orbit polygons.  Leaves of the closure foliation can
// pinch arbitrarily close together in distorted charts, which defeats any
// pointwise test at fixed sampling accuracy; the enclosed area integrates the
// gap over the whole curve and is strictly monotone under nesting.  Honest
// leaves both encircle the common fixed point and are disjoint, so the area
// order is the enclosure order; a false accept on degenerate input only
// misguides the chain builder, whose output is checked by the downstream gap
// and defect measurements.
bool nested_in_order(const std::vector<Vec2>& inner, const std::vector<Vec2>& outer,
                     const Vec2& center) {
  if (polygon_winding(inner, center) == 0 || polygon_winding(outer, center) == 0)
    return strictly_nested(inner, outer);
  return polygon_area_abs(inner) < polygon_area_abs(outer);
}

}  // namespace

// ---------------------------------------------------------------------------
// Winding-number bisection.
// ---------------------------------------------------------------------------

namespace {

struct WindingScan {
  const std::function<Vec2(const Vec2&)>* f;
  bool degenerate = false;  // hit a displacement too small to orient

  Vec2 disp(const Vec2& p) const { return (*f)(p) - p; }

  double edge_angle(const Vec2& a, const Vec2& b, const Vec2& da, const Vec2& db, int depth) {
    if (norm(da) < 1e-13 || norm(db) < 1e-13) {
      degenerate = true;
      return 0.0;
    }
    double ang = std::atan2(cross(da, db), dot(da, db));
    if (depth >= 44) return ang;
    // Accept a step only when the field values are close in value space, not
    // merely aligned in angle: endpoint alignment alone can hide a full turn
    // of a strongly sheared field inside the sub-edge.
    if (std::fabs(ang) < 0.9 && norm(db - da) <= 0.5 * std::min(norm(da), norm(db))) return ang;
    Vec2 m = lerp(a, b, 0.5);
    Vec2 dm = disp(m);
    return edge_angle(a, m, da, dm, depth + 1) + edge_angle(m, b, dm, db, depth + 1);
  }

  // Winding of the displacement field along the rectangle boundary; sets
  // `degenerate` instead of guessing when the field vanishes on the contour.
  int box_winding(const Vec2& lo, const Vec2& hi) {
    degenerate = false;
    Vec2 c[4] = {lo, {hi.x, lo.y}, hi, {lo.x, hi.y}};
    Vec2 d[4] = {disp(c[0]), disp(c[1]), disp(c[2]), disp(c[3])};
    double total = 0.0;
    for (int e = 0; e < 4; ++e) total += edge_angle(c[e], c[(e + 1) % 4], d[e], d[(e + 1) % 4], 0);
    if (degenerate) return 0;
    double turns = total / kTau;
    long k = std::lround(turns);
    if (std::fabs(turns - double(k)) > 0.25) degenerate = true;
    return int(k);
  }
};

bool cell_nearly_fixed(const std::function<Vec2(const Vec2&)>& f, const Vec2& lo, const Vec2& hi,
                       double tol) {
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      Vec2 p{lo.x + (hi.x - lo.x) * double(i) / 4.0, lo.y + (hi.y - lo.y) * double(j) / 4.0};
      if (norm(f(p) - p) > tol) return false;
    }
  return true;
}

}  // namespace

FixedPointResult find_fixed_point_field(const std::function<Vec2(const Vec2&)>& f, Vec2 lo,
                                        Vec2 hi, double cell_tol) {
  WindingScan scan{&f};
  if (cell_nearly_fixed(f, lo, hi, 1e-9))
    throw Error(ErrorCode::AmbiguousFixedPoints, "displacement below 1e-9 on the whole domain");

  int w = scan.box_winding(lo, hi);
  if (scan.degenerate)
    throw Error(ErrorCode::AmbiguousFixedPoints, "displacement field vanishes on the domain contour");
  if (w == 0)
    throw Error(ErrorCode::NoInteriorFixedPoint, "displacement winding is zero on the domain");

  FixedPointResult result;
  result.root_winding = w;
  static constexpr double kJitter[5] = {0.5, 0.5 + 1.0 / 64, 0.5 - 1.0 / 64, 0.5 + 1.0 / 16,
                                        0.5 - 1.0 / 16};
  while (std::hypot(hi.x - lo.x, hi.y - lo.y) > cell_tol) {
    // Tiny displacements are expected close to a genuine zero, so the
    // flat-field test only applies while the cell is still coarse.
    if (std::hypot(hi.x - lo.x, hi.y - lo.y) > 1e-6 && cell_nearly_fixed(f, lo, hi, 1e-9))
      throw Error(ErrorCode::AmbiguousFixedPoints, "displacement below 1e-9 on a cell");
    bool advanced = false;
    for (double j : kJitter) {
      double mx = lo.x + (hi.x - lo.x) * j;
      double my = lo.y + (hi.y - lo.y) * j;
      Vec2 clo[4] = {lo, {mx, lo.y}, {mx, my}, {lo.x, my}};
      Vec2 chi[4] = {{mx, my}, {hi.x, my}, hi, {mx, hi.y}};
      int found = -1;
      bool any_degenerate = false;
      int nonzero = 0;
      for (int c = 0; c < 4; ++c) {
        int wc = scan.box_winding(clo[c], chi[c]);
        if (scan.degenerate) {
          any_degenerate = true;
          continue;
        }
        if (wc != 0) {
          ++nonzero;
          if (found < 0) found = c;
        }
      }
      if (found >= 0 && !any_degenerate) {
        if (nonzero > 1) result.sibling_violation = true;
        lo = clo[found];
        hi = chi[found];
        ++result.levels;
        advanced = true;
        break;
      }
    }
    if (!advanced)
      throw Error(ErrorCode::AmbiguousFixedPoints,
                  "winding could not be certified while splitting a cell");
  }
  result.point = {(lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0};
  return result;
}

SurfacePoint find_fixed_point(const MapExpr& f) {
  auto s = f.space();
  if (s && *s != Space::Disk) throw Error(ErrorCode::SpaceMismatch, "find_fixed_point: disk map required");
  if (f.is_parametric()) throw std::invalid_argument("find_fixed_point: bind the parameter first");
  if (f.orientation() < 0)
    throw std::invalid_argument("find_fixed_point: orientation-preserving map required");
  auto eval = [&f](const Vec2& p) { return f.eval_plane(p); };
  double pad = 1.0 + 1e-6;
  FixedPointResult r = find_fixed_point_field(eval, {-pad, -pad}, {pad, pad});
  return SurfacePoint::disk(r.point.x, r.point.y);
}

// ---------------------------------------------------------------------------
// DiskAction.
// ---------------------------------------------------------------------------

DiskAction DiskAction::family(FamilyFn psi, const Vec2& center) {
  DiskAction a;
  a.order_ = 0;
  a.family_ = std::move(psi);
  a.center_ = center;
  return a;
}

DiskAction DiskAction::cyclic(MapFn step, int order, const Vec2& center) {
  if (order < 2) throw std::invalid_argument("DiskAction::cyclic: order must be >= 2");
  DiskAction a;
  a.order_ = order;
  a.step_ = std::move(step);
  a.center_ = center;
  return a;
}

DiskAction DiskAction::from_spec(const GroupSpec& spec) {
  if (spec.space() != Space::Disk)
    throw Error(ErrorCode::SpaceMismatch, "DiskAction: disk group required");

  if (!spec.families.empty()) {
    if (spec.families.size() > 1 || !spec.generators.empty())
      throw std::invalid_argument("DiskAction: a single circle family is supported");
    const FamilyTemplate fam = spec.families.front();
    MapExpr probe = fam.at(0.6180339887498949);
    Vec2 center = find_fixed_point_field([&probe](const Vec2& p) { return probe.eval_plane(p); },
                                         {-1.0 - 1e-6, -1.0 - 1e-6}, {1.0 + 1e-6, 1.0 + 1e-6})
                      .point;
    return family(
        [fam](double t, const Vec2& p) { return fam.at(frac(t)).eval_plane(p); }, center);
  }

  std::vector<MapExpr> closure = enumerate_closure(spec.generators, Space::Disk, spec.order_bound);
  int n = int(closure.size());
  if (n < 2) throw std::invalid_argument("DiskAction: group is trivial");
  for (const MapExpr& e : closure)
    if (e.orientation() < 0)
      throw std::invalid_argument("DiskAction: orientation-preserving group required");

  // Fixed point of a non-identity representative.
  const MapExpr* rep = nullptr;
  for (const MapExpr& e : closure) {
    if (norm(e.eval_plane({0.37, 0.11}) - Vec2{0.37, 0.11}) > 1e-9 ||
        norm(e.eval_plane({-0.2, 0.53}) - Vec2{-0.2, 0.53}) > 1e-9) {
      rep = &e;
      break;
    }
  }
  if (!rep) throw std::invalid_argument("DiskAction: group is numerically trivial");
  Vec2 center = find_fixed_point_field([rep](const Vec2& p) { return rep->eval_plane(p); },
                                       {-1.0 - 1e-6, -1.0 - 1e-6}, {1.0 + 1e-6, 1.0 + 1e-6})
                    .point;

  // Minimal positive angular step about the fixed point: the element whose
  // probe image sits first counterclockwise from the probe point.
  Vec2 q = center + Vec2{0.5 * (1.0 - norm(center)), 0.0};
  double base = std::atan2(q.y - center.y, q.x - center.x);
  double best = 2.0;
  const MapExpr* step = nullptr;
  for (const MapExpr& e : closure) {
    Vec2 img = e.eval_plane(q);
    double a = frac((std::atan2(img.y - center.y, img.x - center.x) - base) / kTau);
    if (a > 1e-7 && a < best) {
      best = a;
      step = &e;
    }
  }
  if (!step) throw std::invalid_argument("DiskAction: could not order the group cyclically");
  MapExpr sigma = *step;
  return cyclic([sigma](const Vec2& p) { return sigma.eval_plane(p); }, n, center);
}

Vec2 DiskAction::apply(double t, const Vec2& p) const {
  if (order_ == 0) return family_(frac(t), p);
  long j = std::lround(frac(t) * double(order_)) % order_;
  Vec2 out = p;
  for (long k = 0; k < j; ++k) out = step_(out);
  return out;
}

std::vector<Vec2> DiskAction::orbit_points(const Vec2& x, int samples) const {
  if (orbit_fn_) return orbit_fn_(x, samples);
  std::vector<Vec2> pts;
  if (order_ == 0) {
    if (samples < 3) throw std::invalid_argument("orbit_points: need at least 3 samples");
    pts.resize(size_t(samples));
    for (int j = 0; j < samples; ++j) pts[size_t(j)] = family_(double(j) / double(samples), x);
  } else {
    pts.reserve(size_t(order_));
    Vec2 p = x;
    for (int j = 0; j < order_; ++j) {
      pts.push_back(p);
      p = step_(p);
    }
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Orbit curves.
// ---------------------------------------------------------------------------

double OrbitCurve::max_edge() const {
  double m = 0.0;
  for (size_t i = 0; i < points.size(); ++i)
    m = std::max(m, dist(points[i], points[(i + 1) % points.size()]));
  return m;
}

double OrbitCurve::diameter() const {
  double m = 0.0;
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j) m = std::max(m, dist(points[i], points[j]));
  return m;
}

double OrbitCurve::order_radius() const {
  double m = 0.0;
  for (const Vec2& p : points) m = std::max(m, dist(p, center));
  return m;
}

OrbitCurve orbit_curve(const DiskAction& action, const Vec2& x, int samples) {
  OrbitCurve c;
  c.points = action.orbit_points(x, samples);
  c.base = x;
  c.center = action.center();
  c.discrete = !action.continuous();
  if (c.diameter() < 1e-9)
    throw Error(ErrorCode::DegenerateOrbit, "orbit polyline diameter below 1e-9");
  return c;
}

OrbitCurve orbit_curve(const GroupSpec& spec, const SurfacePoint& x, int samples) {
  auto [u, v] = x.uv();
  return orbit_curve(DiskAction::from_spec(spec), Vec2{u, v}, samples);
}

int polygon_winding(const std::vector<Vec2>& poly, const Vec2& p) {
  int w = 0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if (a.y <= p.y) {
      if (b.y > p.y && cross(b - a, p - a) > 0.0) ++w;
    } else {
      if (b.y <= p.y && cross(b - a, p - a) < 0.0) --w;
    }
  }
  return w;
}

int polygon_crossings(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  int count = 0;
  size_t n = a.size(), m = b.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j)
      if (proper_crossing(a[i], a[(i + 1) % n], b[j], b[(j + 1) % m])) ++count;
  return count;
}

bool polyline_simple(const std::vector<Vec2>& poly) {
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      if (proper_crossing(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  return true;
}

double hausdorff_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double h = 0.0;
  for (const Vec2& p : a) h = std::max(h, polyline_distance(b, p));
  for (const Vec2& p : b) h = std::max(h, polyline_distance(a, p));
  return h;
}

const char* enclosure_name(Enclosure e) {
  switch (e) {
    case Enclosure::Inside: return "inside";
    case Enclosure::Outside: return "outside";
    case Enclosure::Same: return "same";
  }
  return "?";
}

Enclosure enclosure_compare(const OrbitCurve& a, const OrbitCurve& b) {
  if (a.discrete || b.discrete) {
    // Finite orbits are point sets: same orbit means same vertices.
    double h = 0.0;
    for (const Vec2& p : a.points) {
      double m = std::numeric_limits<double>::infinity();
      for (const Vec2& q : b.points) m = std::min(m, dist(p, q));
      h = std::max(h, m);
    }
    if (h <= 1e-6 && a.points.size() == b.points.size()) return Enclosure::Same;
  } else {
    double cell = 2.0 * std::max(a.max_edge(), b.max_edge());
    if (hausdorff_distance(a.points, b.points) <= cell) return Enclosure::Same;
  }
  if (polygon_crossings(a.points, b.points) > 0)
    throw Error(ErrorCode::CrossingOrbits, "orbit polylines cross transversally");
  bool a_in_b = polygon_winding(b.points, a.base) != 0;
  bool b_in_a = polygon_winding(a.points, b.base) != 0;
  if (a_in_b && !b_in_a) return Enclosure::Inside;
  if (b_in_a && !a_in_b) return Enclosure::Outside;
  throw Error(ErrorCode::CrossingOrbits, "enclosure relation is inconsistent");
}

// ---------------------------------------------------------------------------
// Monotone chains.
// ---------------------------------------------------------------------------

namespace {

constexpr int kChainOrbitSamples = 96;

double chain_diameter(const std::vector<Vec2>& pts) {
  if (pts.size() <= 2048) {
    double m = 0.0;
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j) m = std::max(m, dist(pts[i], pts[j]));
    return m;
  }
  Vec2 c = lerp(pts.front(), pts.back(), 0.5);
  double r = 0.0;
  for (const Vec2& p : pts) r = std::max(r, dist(p, c));
  return 2.0 * r;  // upper estimate
}

double polygon_perimeter(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) s += dist(poly[i], poly[(i + 1) % poly.size()]);
  return s;
}

std::vector<Vec2> chain_points(const DiskAction& action, const Vec2& x, const Vec2& y, double mu,
                               int depth);

// Continuous family: walk the segment from x to an orbit representative of y
// and unwind the family phase along the way; the group invariance of the
// enclosure order makes the path monotone whenever the base segment is.
std::vector<Vec2> chain_continuous(const DiskAction& action, const Vec2& x, const Vec2& y,
                                   double mu, int depth) {
  std::vector<Vec2> oy = action.orbit_points(y, kChainOrbitSamples);
  std::vector<int> candidates(oy.size());
  for (size_t i = 0; i < oy.size(); ++i) candidates[i] = int(i);
  std::sort(candidates.begin(), candidates.end(),
            [&](int i, int j) { return dist(x, oy[size_t(i)]) < dist(x, oy[size_t(j)]); });

  double journey = dist(x, y);
  double perimeter = polygon_perimeter(oy);
  int tried = 0;
  for (int ci : candidates) {
    if (++tried > 12) break;
    Vec2 cand = oy[size_t(ci)];
    double tj = double(ci) / double(oy.size());
    double tau = tj <= 0.5 ? -tj : 1.0 - tj;

    // The base segment must cross the orbit foliation monotonically.
    const int kChecks = 12;
    bool monotone = true;
    std::vector<Vec2> prev = action.orbit_points(x, kChainOrbitSamples);
    for (int k = 1; k <= kChecks + 1 && monotone; ++k) {
      Vec2 s = lerp(x, cand, double(k) / double(kChecks + 1));
      std::vector<Vec2> cur =
          k == kChecks + 1 ? oy : action.orbit_points(s, kChainOrbitSamples);
      if (!nested_in_order(prev, cur, action.center())) monotone = false;
      prev = std::move(cur);
    }
    if (!monotone) continue;

    long m = std::lround(std::ceil((dist(x, cand) + std::fabs(tau) * perimeter) / (0.45 * mu)));
    m = std::clamp(m, 8L, 1L << 22);
    for (int doubling = 0; doubling <= 12; ++doubling, m *= 2) {
      std::vector<Vec2> pts(size_t(m) + 1);
      parallel_for(size_t(m) + 1, [&](size_t b, size_t e) {
        for (size_t i = b; i < e; ++i) {
          double s = double(i) / double(m);
          pts[i] = i == 0 ? x : action.apply(frac(tau * s), lerp(x, cand, s));
        }
      });
      pts.back() = y;  // Psi_{-tj}(cand) == y exactly as a group element
      double step = 0.0;
      for (size_t i = 0; i + 1 < pts.size(); ++i) step = std::max(step, dist(pts[i], pts[i + 1]));
      if (step < 0.98 * mu) {
        if (chain_diameter(pts) <= 4.0 * journey + mu) return pts;
        break;  // candidate wanders too far; try the next one
      }
    }
  }

  // Split through an intermediate orbit and recurse.
  if (depth < 6) {
    for (double s : {0.5, 0.35, 0.65}) {
      Vec2 w = lerp(x, y, s);
      std::vector<Vec2> ow = action.orbit_points(w, kChainOrbitSamples);
      std::vector<Vec2> ox = action.orbit_points(x, kChainOrbitSamples);
      if (!nested_in_order(ox, ow, action.center()) || !nested_in_order(ow, oy, action.center()))
        continue;
      std::vector<Vec2> h1 = chain_points(action, x, w, mu, depth + 1);
      std::vector<Vec2> h2 = chain_points(action, w, y, mu, depth + 1);
      h1.insert(h1.end(), h2.begin() + 1, h2.end());
      if (chain_diameter(h1) <= 4.0 * journey + mu) return h1;
    }
  }
  if (std::getenv("KEREK_DBG_CHAIN")) {
    FILE* dbg = std::fopen("/tmp/chain_fail.txt", "w");
    if (dbg) {
      std::fprintf(dbg, "x %.17g %.17g\ny %.17g %.17g\nmu %.17g depth %d\n", x.x, x.y, y.x, y.y,
                   mu, depth);
      auto dump = [&](const char* tag, const std::vector<Vec2>& poly) {
        std::fprintf(dbg, "%s %zu\n", tag, poly.size());
        for (const Vec2& p : poly) std::fprintf(dbg, "%.17g %.17g\n", p.x, p.y);
      };
      dump("oy", oy);
      dump("ox", action.orbit_points(x, kChainOrbitSamples));
      for (int k = 1; k <= 12; ++k) {
        Vec2 s = lerp(x, oy[size_t(candidates[0])], double(k) / 13.0);
        dump("mid", action.orbit_points(s, kChainOrbitSamples));
      }
      std::fclose(dbg);
    }
  }
  throw Error(ErrorCode::RefinementStall, "no monotone chain found at spacing " +
                                              std::to_string(mu));
}

// Finite cyclic group: greedy walk toward y through strictly growing orbits.
std::vector<Vec2> chain_finite(const DiskAction& action, const Vec2& x, const Vec2& y, double mu,
                               int depth) {
  std::vector<Vec2> oy = action.orbit_points(y, 0);
  double journey = dist(x, y);
  std::vector<Vec2> pts{x};
  std::vector<Vec2> op = action.orbit_points(x, 0);
  Vec2 p = x;
  int no_progress = 0;
  size_t guard = size_t(24.0 * (journey + 1.0) / mu) + 64;
  bool stalled = false;

  while (pts.size() < guard) {
    if (dist(p, y) < 0.98 * mu && nested_in_order(op, oy, action.center())) {
      pts.push_back(y);
      if (chain_diameter(pts) <= 4.0 * journey + mu) return pts;
      stalled = true;
      break;
    }
    Vec2 dir = (y - p) * (1.0 / dist(p, y));
    bool accepted = false;
    double h = 0.45 * mu;
    for (int shrink = 0; shrink < 6 && !accepted; ++shrink, h *= 0.5) {
      double best_score = std::numeric_limits<double>::infinity();
      Vec2 best_q{0.0, 0.0};
      std::vector<Vec2> best_orbit;
      for (double deg : {0.0, 20.0, -20.0, 40.0, -40.0, 60.0, -60.0, 80.0, -80.0}) {
        Vec2 q = p + rotate2(dir, deg * kPi / 180.0) * h;
        std::vector<Vec2> oq = action.orbit_points(q, 0);
        if (!nested_in_order(op, oq, action.center())) continue;
        if (!nested_in_order(oq, oy, action.center())) continue;
        double score = dist(q, y);
        if (score < best_score) {
          best_score = score;
          best_q = q;
          best_orbit = std::move(oq);
        }
      }
      if (best_score < std::numeric_limits<double>::infinity()) {
        no_progress = best_score < dist(p, y) - 0.05 * h ? 0 : no_progress + 1;
        if (no_progress > 4) break;
        p = best_q;
        op = std::move(best_orbit);
        pts.push_back(p);
        accepted = true;
      }
    }
    if (!accepted) {
      stalled = true;
      break;
    }
  }

  if ((stalled || pts.size() >= guard) && depth < 6) {
    std::vector<Vec2> ox = action.orbit_points(x, 0);
    for (double s : {0.5, 0.35, 0.65}) {
      Vec2 w = lerp(x, y, s);
      std::vector<Vec2> ow = action.orbit_points(w, 0);
      if (!nested_in_order(ox, ow, action.center()) || !nested_in_order(ow, oy, action.center()))
        continue;
      std::vector<Vec2> h1 = chain_points(action, x, w, mu, depth + 1);
      std::vector<Vec2> h2 = chain_points(action, w, y, mu, depth + 1);
      h1.insert(h1.end(), h2.begin() + 1, h2.end());
      if (chain_diameter(h1) <= 4.0 * journey + mu) return h1;
    }
  }
  if (pts.size() >= 2 && dist(pts.back(), y) == 0.0) return pts;  // bound check failed upstream
  throw Error(ErrorCode::RefinementStall,
              "chain stalled at gap " + std::to_string(dist(p, y)) + " (mu " +
                  std::to_string(mu) + ")");
}

std::vector<Vec2> chain_points(const DiskAction& action, const Vec2& x, const Vec2& y, double mu,
                               int depth) {
  return action.continuous() ? chain_continuous(action, x, y, mu, depth)
                             : chain_finite(action, x, y, mu, depth);
}

}  // namespace

MonotoneChain monotone_chain(const DiskAction& action, const Vec2& x, const Vec2& y, double mu) {
  if (mu <= 0.0) throw std::invalid_argument("monotone_chain: mu must be positive");
  OrbitCurve ox = orbit_curve(action, x, kChainOrbitSamples);
  OrbitCurve oy = orbit_curve(action, y, kChainOrbitSamples);
  if (enclosure_compare(ox, oy) != Enclosure::Inside)
    throw std::invalid_argument("monotone_chain: orbit of x must lie strictly inside orbit of y");
  MonotoneChain chain;
  chain.points = chain_points(action, x, y, mu, 0);
  chain.mu = mu;
  chain.diameter = chain_diameter(chain.points);
  return chain;
}

MonotoneChain monotone_chain(const GroupSpec& spec, const SurfacePoint& x, const SurfacePoint& y,
                             double mu) {
  auto [xu, xv] = x.uv();
  auto [yu, yv] = y.uv();
  return monotone_chain(DiskAction::from_spec(spec), Vec2{xu, xv}, Vec2{yu, yv}, mu);
}

// ---------------------------------------------------------------------------
// Transversal arcs.
// ---------------------------------------------------------------------------

std::vector<ChainStage> default_chain_schedule(int stages) {
  if (stages < 1) throw std::invalid_argument("default_chain_schedule: need at least one stage");
  std::vector<ChainStage> s(size_t(stages), ChainStage{0.0, 0.0});
  for (int n = 0; n < stages; ++n)
    s[size_t(n)] = {std::pow(2.0, -n - 2), std::pow(2.0, -n - 4)};
  return s;
}

Vec2 TransversalArc::sample(double rr) const {
  rr = std::clamp(rr, 0.0, 1.0);
  size_t lo = 0, hi = r.size() - 1;
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    if (r[mid] <= rr)
      lo = mid;
    else
      hi = mid;
  }
  double w = (rr - r[lo]) / (r[hi] - r[lo]);
  return lerp(points[lo], points[hi], std::clamp(w, 0.0, 1.0));
}

double TransversalArc::max_gap() const {
  double g = 0.0;
  for (size_t i = 0; i + 1 < points.size(); ++i) g = std::max(g, dist(points[i], points[i + 1]));
  return g;
}

TransversalArc transversal_arc(const DiskAction& action, const Vec2& outer,
                               const std::vector<ChainStage>& schedule, double target_gap) {
  if (target_gap <= 0.0) throw std::invalid_argument("transversal_arc: target gap must be positive");
  Vec2 x0 = action.center();
  double journey = dist(outer, x0);
  if (journey < 1e-9) throw std::invalid_argument("transversal_arc: outer point is the fixed point");

  double d0 = std::min(0.9 * target_gap, 1e-3 * journey);
  Vec2 x_near = x0 + (outer - x0) * (d0 / journey);

  std::vector<Vec2> pts = chain_points(action, x_near, outer, schedule.front().mu, 0);

  size_t stage = 1;
  double delta = schedule.front().delta, mu = schedule.front().mu;
  for (int round = 0; round < 30; ++round) {
    double maxgap = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) maxgap = std::max(maxgap, dist(pts[i], pts[i + 1]));
    if (maxgap <= target_gap) break;
    if (round == 29)
      throw Error(ErrorCode::RefinementStall, "transversal gap " + std::to_string(maxgap) +
                                                  " above target " + std::to_string(target_gap));
    if (stage < schedule.size()) {
      delta = schedule[stage].delta;
      mu = schedule[stage].mu;
      ++stage;
    } else {
      delta /= 2.0;
      mu /= 2.0;
    }
    double trigger = std::max(delta, target_gap);
    std::vector<Vec2> next{pts.front()};
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      const Vec2& a = pts[i];
      const Vec2& b = pts[i + 1];
      if (dist(a, b) > trigger) {
        std::vector<Vec2> sub = chain_points(action, a, b, std::min(mu, trigger), 0);
        next.insert(next.end(), sub.begin() + 1, sub.end());
      } else {
        next.push_back(b);
      }
    }
    pts = std::move(next);
  }

  // Deduplicate and prepend the fixed point itself.
  std::vector<Vec2> clean{x0};
  for (const Vec2& p : pts)
    if (dist(p, clean.back()) > 1e-13) clean.push_back(p);

  TransversalArc arc;
  arc.points = std::move(clean);
  arc.center = x0;
  arc.r.resize(arc.points.size());
  std::vector<double> omega(arc.points.size(), 0.0);
  parallel_for(arc.points.size(), [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) {
      if (i == 0) continue;
      double m = 0.0;
      for (const Vec2& v : action.orbit_points(arc.points[i], kChainOrbitSamples))
        m = std::max(m, dist(v, x0));
      omega[i] = m;
    }
  });
  double total = omega.back();
  arc.r[0] = 0.0;
  for (size_t i = 1; i < arc.points.size(); ++i)
    arc.r[i] = std::max(arc.r[i - 1] + 1e-12, std::min(omega[i] / total, 1.0));
  arc.r.back() = 1.0;
  for (size_t i = arc.points.size() - 1; i >= 1; --i)
    if (arc.r[i - 1] >= arc.r[i]) arc.r[i - 1] = arc.r[i] - 1e-12;
  return arc;
}

TransversalArc transversal_arc(const GroupSpec& spec, const SurfacePoint& outer,
                               double target_gap) {
  auto [u, v] = outer.uv();
  return transversal_arc(DiskAction::from_spec(spec), Vec2{u, v}, default_chain_schedule(12),
                         target_gap);
}

int crossing_count(const TransversalArc& arc, const OrbitCurve& curve) {
  int transitions = 0;
  bool inside = polygon_winding(curve.points, arc.points.front()) != 0;
  for (size_t i = 1; i < arc.points.size(); ++i) {
    bool now = polygon_winding(curve.points, arc.points[i]) != 0;
    if (now != inside) {
      ++transitions;
      inside = now;
    }
  }
  return transitions;
}

// ---------------------------------------------------------------------------
// Linearization.
// ---------------------------------------------------------------------------

Vec2 DiskLinearization::forward(double r, double theta) const {
  r = std::clamp(r, 0.0, 1.0);
  double u = r * double(radial_cells);
  int i = std::min(int(u), radial_cells - 1);
  double wr = u - double(i);
  double v = frac(theta) * double(angular_cells);
  int j = std::min(int(v), angular_cells - 1);
  double wj = v - double(j);
  int j1 = (j + 1) % angular_cells;
  Vec2 lo = lerp(rings[size_t(i)][size_t(j)], rings[size_t(i)][size_t(j1)], wj);
  Vec2 hi = lerp(rings[size_t(i) + 1][size_t(j)], rings[size_t(i) + 1][size_t(j1)], wj);
  return lerp(lo, hi, wr);
}

Vec2 DiskLinearization::forward_pt(const Vec2& model) const {
  double r = norm(model - Vec2{0.0, 0.0});
  double theta = r > 0.0 ? std::atan2(model.y, model.x) / kTau : 0.0;
  return forward(r, theta);
}

Vec2 DiskLinearization::inverse_polar(const Vec2& p) const {
  double d_center = dist(p, center);
  if (d_center < 1e-14) return {0.0, 0.0};

  auto inside = [&](int i) { return polygon_winding(rings[size_t(i)], p) != 0; };
  auto ring_theta = [&](int i) {
    int seg = 0;
    double w = 0.0;
    polyline_distance(rings[size_t(i)], p, &seg, &w);
    return frac((double(seg) + w) / double(angular_cells));
  };

  if (!inside(radial_cells)) {
    double d_out = polyline_distance(rings[size_t(radial_cells)], p);
    double cell = 0.0;
    const auto& outer_ring = rings[size_t(radial_cells)];
    for (size_t j = 0; j < outer_ring.size(); ++j)
      cell = std::max(cell, dist(outer_ring[j], outer_ring[(j + 1) % outer_ring.size()]));
    if (d_out <= 2.0 * cell + 1e-12) return {1.0, ring_theta(radial_cells)};
    throw Error(ErrorCode::InversionFailure, "point lies outside the outermost ring");
  }

  int lo = 0, hi = radial_cells;  // ring 0 is the center: p is "outside" it
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (inside(mid))
      hi = mid;
    else
      lo = mid;
  }
  double d_in = lo == 0 ? d_center : polyline_distance(rings[size_t(lo)], p);
  double d_out = polyline_distance(rings[size_t(hi)], p);
  double w = d_in + d_out > 0.0 ? d_in / (d_in + d_out) : 0.0;
  return {(double(lo) + w) / double(radial_cells), ring_theta(hi)};
}

Vec2 DiskLinearization::inverse_pt(const Vec2& p) const {
  Vec2 rt = inverse_polar(p);
  return {rt.x * std::cos(kTau * rt.y), rt.x * std::sin(kTau * rt.y)};
}

DiskLinearization linearize_disk_action(const DiskAction& action, const Vec2& outer,
                                        int radial_cells, int angular_cells,
                                        const std::vector<DefectElement>& defect_set) {
  if (radial_cells < 8 || angular_cells < 8)
    throw std::invalid_argument("linearize_disk_action: grid too small");
  if (!action.continuous()) {
    int n = action.order();
    angular_cells = ((angular_cells + n - 1) / n) * n;
  }

  DiskLinearization lin;
  lin.radial_cells = radial_cells;
  lin.angular_cells = angular_cells;
  lin.center = action.center();

  double journey = dist(outer, lin.center);
  double gap = std::max(journey / (2.0 * double(radial_cells)), 1e-5);
  lin.arc = transversal_arc(action, outer, default_chain_schedule(20), gap);

  lin.rings.assign(size_t(radial_cells) + 1, {});
  lin.rings[0].assign(size_t(angular_cells), lin.center);
  parallel_for(size_t(radial_cells), [&](size_t b, size_t e) {
    for (size_t ii = b; ii < e; ++ii) {
      int i = int(ii) + 1;
      Vec2 xr = lin.arc.sample(double(i) / double(radial_cells));
      if (action.continuous()) {
        lin.rings[size_t(i)] = action.orbit_points(xr, angular_cells);
      } else {
        int n = action.order();
        int per = angular_cells / n;
        std::vector<Vec2> ring(size_t(angular_cells), Vec2{0.0, 0.0});
        Vec2 sx = action.apply(1.0 / double(n), xr);
        for (int m = 0; m < per; ++m)
          ring[size_t(m)] = lerp(xr, sx, double(m) / double(per));
        for (int k = 1; k < n; ++k)
          for (int m = 0; m < per; ++m)
            ring[size_t(k * per + m)] =
                action.apply(1.0 / double(n), ring[size_t((k - 1) * per + m)]);
        lin.rings[size_t(i)] = std::move(ring);
      }
    }
  });

  // Conjugation defect against the supplied test elements.
  const int kR = 48, kTh = 64;
  std::vector<double> rowmax(size_t(kR), 0.0);
  for (const auto& [g, t_model] : defect_set) {
    parallel_for(size_t(kR), [&](size_t b, size_t e) {
      for (size_t s = b; s < e; ++s) {
        double r = double(s + 1) / double(kR);
        double worst = rowmax[s];
        for (int j = 0; j < kTh; ++j) {
          double theta = (double(j) + 0.31) / double(kTh);
          Vec2 a = lin.forward(r, theta);
          Vec2 bimg = g(a);
          Vec2 rt = lin.inverse_polar(bimg);
          double tt = frac(theta + t_model);
          Vec2 got{rt.x * std::cos(kTau * rt.y), rt.x * std::sin(kTau * rt.y)};
          Vec2 want{r * std::cos(kTau * tt), r * std::sin(kTau * tt)};
          worst = std::max(worst, dist(got, want));
        }
        rowmax[s] = worst;
      }
    });
  }
  for (double v : rowmax) lin.defect = std::max(lin.defect, v);
  return lin;
}

DiskLinearization linearize_disk_action(const GroupSpec& spec, int radial_cells, int angular_cells,
                                        int defect_samples) {
  if (!spec.families.empty()) validate_group_spec(spec);
  DiskAction action = DiskAction::from_spec(spec);
  std::vector<DefectElement> defect_set;
  if (action.continuous()) {
    const FamilyTemplate fam = spec.families.front();
    for (int e = 0; e < defect_samples; ++e) {
      double t = double(e) / double(defect_samples);
      MapExpr el = fam.at(t);
      defect_set.emplace_back([el](const Vec2& p) { return el.eval_plane(p); }, t);
    }
  } else {
    int n = action.order();
    for (int k = 1; k < n; ++k)
      defect_set.emplace_back(
          [&action, k](const Vec2& p) { return action.apply(double(k) / double(action.order()), p); },
          double(k) / double(n));
  }
  return linearize_disk_action(action, Vec2{1.0, 0.0}, radial_cells, angular_cells, defect_set);
}

// ---------------------------------------------------------------------------
// Boundary rigidity.
// ---------------------------------------------------------------------------

BoundaryRigidityReport check_boundary_rigidity(const MapExpr& f, const SampleGrid& grid) {
  auto s = f.space();
  if (s && *s != Space::Disk)
    throw Error(ErrorCode::SpaceMismatch, "check_boundary_rigidity: disk map required");
  if (grid.space != Space::Disk)
    throw Error(ErrorCode::SpaceMismatch, "check_boundary_rigidity: disk grid required");

  BoundaryRigidityReport rep;
  int m = std::max(64, grid.resolution * 4);
  for (int k = 0; k < m; ++k) {
    double a = kTau * double(k) / double(m);
    Vec2 p{std::cos(a), std::sin(a)};
    rep.boundary_defect = std::max(rep.boundary_defect, dist(f.eval_plane(p), p));
  }
  std::vector<double> worst(grid.points.size(), 0.0);
  parallel_for(grid.points.size(), [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) {
      auto [u, v] = grid.points[i].uv();
      Vec2 p{u, v};
      worst[i] = dist(f.eval_plane(p), p);
    }
  });
  for (double v : worst) rep.interior_defect = std::max(rep.interior_defect, v);
  return rep;
}

}  // namespace kerek
