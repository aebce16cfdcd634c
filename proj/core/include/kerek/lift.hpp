#pragma once

#include <vector>

#include "kerek/grid.hpp"
#include "kerek/map_expr.hpp"

namespace kerek {

// Degree-1 lift of an orientation-preserving circle map.  The lift is exact
// up to map-evaluation precision: values come from evaluating the map itself;
// the sampled table only pins down the integer unwrap offsets.
// Invariants: lift(x + 1) = lift(x) + 1 exactly, lift is nondecreasing, and
// consecutive table samples differ by less than 1/2.
class Lift {
public:
  double operator()(double x) const;
  // phi(x) = lift(x) - x; descends to a function on the circle.
  double cocycle(double x) const { return (*this)(x) - x; }

  const MapExpr& map() const { return map_; }
  int table_size() const { return int(raw_.size()); }
  // Lift value at table point i / table_size(), i in [0, table_size()].
  double table_lift(int i) const {
    return (i == int(raw_.size()) ? raw_[0] : raw_[size_t(i)]) + double(offset_[size_t(i)]);
  }

  friend Lift lift_circle_map(const MapExpr& f, int table_size);

private:
  Lift() = default;
  MapExpr map_;
  std::vector<double> raw_;  // map images of i/N, in [0, 1)
  std::vector<int> offset_;  // offset_[i] + raw_[i] is the lift at i/N; offset_[N] = 1
};

// Builds the lift table.  Throws UnwrapFailure for orientation-reversing
// input or when the table cannot be unwrapped consistently (degree != 1 or
// undersampled).
Lift lift_circle_map(const MapExpr& f, int table_size = 2048);

double cocycle_value(const Lift& lift, double x);

// max over the grid of |phi_{fg}(x) - phi_f(g x) - phi_g(x)| where fg is the
// composition of the two lifts.  Zero up to roundoff for valid lifts.
double check_cocycle_relation(const Lift& f, const Lift& g, const SampleGrid& grid);

}  // namespace kerek
