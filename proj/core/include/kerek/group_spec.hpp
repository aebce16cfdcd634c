#pragma once

#include <string>
#include <vector>

#include "kerek/geometry.hpp"
#include "kerek/map_expr.hpp"

namespace kerek {

// One-parameter subgroup template t in [0,1) -> Psi_t.  The skeleton is a map
// expression with parametric rotation slots; Psi_{s+t} = Psi_s o Psi_t must
// hold up to the validation tolerance.
class FamilyTemplate {
public:
  explicit FamilyTemplate(MapExpr skeleton);
  MapExpr at(double t) const { return skeleton_.bind_parameter(t); }
  const MapExpr& skeleton() const { return skeleton_; }
  std::optional<Space> space() const { return skeleton_.space(); }

private:
  MapExpr skeleton_;
};

// A compact transformation group presented by generators: any number of
// one-parameter families plus a finite list of extra generators.  The two
// spec shapes are the special cases {1 family, no extras} and
// {no families, extras only}.
struct GroupSpec {
  std::vector<FamilyTemplate> families;
  std::vector<MapExpr> generators;
  int order_bound = 120;

  Space space() const;
  bool finite() const { return families.empty(); }
};

// Structural and dynamical validation:
//  - all parts act on one space,
//  - each family satisfies Psi_0 = Id and the interchange law
//    Psi_s o Psi_t = Psi_{s+t} on a 16 x 16 parameter grid (tol 1e-6),
//  - families are faithful: Psi_{1/k} != Id for k = 2..8.
// Throws DegenerateFamily on violation.
void validate_group_spec(const GroupSpec& spec);

// Closure of the finite generators under composition, deduplicated by sup
// distance <= tol on a coarse grid.  Throws ClosureOverflow when the closure
// exceeds the order bound (or the hard cap of 120).
std::vector<MapExpr> enumerate_closure(const std::vector<MapExpr>& generators, Space space,
                                       int order_bound, double tol = 1e-6);

// Dense sample of the group: every finite-closure element composed with an
// equispaced sample of each family (family_samples points per family).  The
// total is capped at 8192 elements by thinning the family sampling.
std::vector<MapExpr> sample_group_elements(const GroupSpec& spec, int family_samples);

// Flat key-value text form.  Keys: space, family, generator, order_bound,
// include (inlines another file, path relative to the including file).
GroupSpec parse_group_spec(const std::string& text, const std::string& base_dir = ".");
GroupSpec read_group_spec(const std::string& path);
std::string print_group_spec(const GroupSpec& spec);

}  // namespace kerek
