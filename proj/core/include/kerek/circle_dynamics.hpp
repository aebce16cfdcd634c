#pragma once

#include "kerek/group_spec.hpp"
#include "kerek/lift.hpp"

namespace kerek {

struct RotationEstimate {
  double value;  // turns, in [0, 1)
  double error;  // spread across starting points plus truncation
};

// Cesaro limit of (lift^n(x) - x) / n over several starting points.
RotationEstimate rotation_number_birkhoff(const Lift& lift, long iterations = 100000,
                                          int starts = 8);

// Group-invariant probability measure on the circle, kept as a sampled CDF.
// Built by averaging the pushforwards of the uniform measure over the group
// (full enumeration for finite groups, parameter quadrature for families).
class InvariantMeasure {
public:
  double cdf(double x) const;          // piecewise linear, cdf(0)=0, cdf(1)=1
  double cdf_inverse(double y) const;  // bisection + linear interpolation
  int resolution() const { return int(cdf_.size()) - 1; }
  // max over sampled g, x of the wrapped defect |F(gx) - F(g0) - F(x)| mod 1.
  double invariance_defect() const { return defect_; }
  const std::vector<double>& table() const { return cdf_; }

  friend InvariantMeasure invariant_measure(const GroupSpec& group, int resolution,
                                            int family_samples);

private:
  std::vector<double> cdf_;
  double defect_ = 0;
};

InvariantMeasure invariant_measure(const GroupSpec& group, int resolution = 4096,
                                   int family_samples = 256);

// Rotation number as the integral of the lift cocycle against the measure
// (trapezoidal Riemann-Stieltjes sum over the CDF table).
RotationEstimate rotation_number_integral(const Lift& lift, const InvariantMeasure& mu);

struct MorphismCheck {
  double max_defect;  // max over pairs of |rho(fg) - rho(f) - rho(g)| mod 1
  int pairs;
};

// Samples pairs from the group (seeded, deterministic) and checks that the
// rotation number is additive under composition.
MorphismCheck check_morphism(const GroupSpec& group, int pairs = 32, long iterations = 20000,
                             unsigned long long seed = 1);

struct GeneratorLinearization {
  MapExpr generator;
  double rotation;  // measured rotation number, turns
  double defect;    // sup distance between h g h^-1 and the rotation
};

struct CircleLinearization {
  InvariantMeasure conjugator;  // h = the invariant CDF
  std::vector<GeneratorLinearization> generators;
  double max_defect;
};

// Conjugates the group to rotations through the invariant CDF.  Throws
// NonInjectiveMeasure when the CDF has a flat run wider than 1e-6.
CircleLinearization linearize_circle_group(const GroupSpec& group, int resolution = 4096,
                                           long rho_iterations = 20000);

}  // namespace kerek
