#include "kerek/lift.hpp"

#include <cmath>

namespace kerek {

Lift lift_circle_map(const MapExpr& f, int table_size) {
  if (table_size < 1024)
    throw std::invalid_argument("lift_circle_map: table size must be >= 1024");
  auto s = f.space();
  if (s && *s != Space::Circle)
    throw Error(ErrorCode::SpaceMismatch, "lift_circle_map: not a circle map");
  if (f.is_parametric())
    throw std::invalid_argument("lift_circle_map: unbound family parameter");
  if (f.orientation() == -1)
    throw Error(ErrorCode::UnwrapFailure,
                "orientation-reversing map has no degree-1 lift");

  const int n = table_size;
  Lift lift;
  lift.map_ = f;
  lift.raw_.resize(size_t(n));
  lift.offset_.resize(size_t(n) + 1);
  for (int i = 0; i < n; ++i) lift.raw_[i] = f.eval_circle(double(i) / double(n));

  lift.offset_[0] = 0;
  double prev = lift.raw_[0];
  for (int i = 1; i <= n; ++i) {
    double raw = (i == n) ? lift.raw_[0] : lift.raw_[i];
    double d = raw - prev;
    int hop = int(std::lround(d));
    double step = d - double(hop);
    if (!(std::fabs(step) < 0.5 - 1e-15))
      throw Error(ErrorCode::UnwrapFailure, "consecutive lift samples differ by >= 1/2");
    if (step < -1e-9)
      throw Error(ErrorCode::UnwrapFailure, "lift table is not monotone");
    lift.offset_[i] = lift.offset_[i - 1] - hop;
    if (std::abs(lift.offset_[i] - lift.offset_[i - 1]) > 1)
      throw Error(ErrorCode::UnwrapFailure, "lift table undersampled");
    prev = raw;
  }
  if (lift.offset_[n] != 1)
    throw Error(ErrorCode::UnwrapFailure, "map does not have degree 1");
  return lift;
}

double Lift::operator()(double x) const {
  const int n = int(raw_.size());
  double base = std::floor(x);
  double u = x - base;
  if (u >= 1.0) {  // floor underflow for x just below an integer
    u = 0.0;
    base += 1.0;
  }
  double raw = map_.eval_circle(u);
  int cell = std::min(int(u * n), n - 1);
  int off = offset_[cell];
  if (offset_[cell + 1] != off) {
    // The lift crosses an integer inside this cell; the raw value tells on
    // which side of the crossing u lies.
    double lo = (cell + 1 == n) ? raw_[0] : raw_[cell + 1];
    double hi = raw_[cell];
    if (raw < 0.5 * (lo + hi)) off = offset_[cell + 1];
  }
  return raw + double(off) + base;
}

double cocycle_value(const Lift& lift, double x) { return lift.cocycle(x); }

double check_cocycle_relation(const Lift& f, const Lift& g, const SampleGrid& grid) {
  if (grid.space != Space::Circle)
    throw Error(ErrorCode::SpaceMismatch, "check_cocycle_relation: circle grid required");
  double worst = 0;
  for (const auto& p : grid.points) {
    double x = p.angle();
    double gx_lift = g(x);
    double composed_phi = f(gx_lift) - x;          // phi of the composed lift
    double split_phi = f.cocycle(frac(gx_lift)) +  // phi_f at the circle point g(x)
                       g.cocycle(x);
    worst = std::max(worst, std::fabs(composed_phi - split_phi));
  }
  return worst;
}

}  // namespace kerek
