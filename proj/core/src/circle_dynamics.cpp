#include "kerek/circle_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kerek/parallel.hpp"

namespace kerek {

RotationEstimate rotation_number_birkhoff(const Lift& lift, long iterations, int starts) {
  if (iterations < 1 || starts < 1)
    throw std::invalid_argument("rotation_number_birkhoff: bad parameters");
  std::vector<double> est(static_cast<size_t>(starts), 0.0);
  parallel_for(size_t(starts), [&](size_t b, size_t e) {
    for (size_t j = b; j < e; ++j) {
      double x0 = double(j) / double(starts);
      double y = x0;
      for (long i = 0; i < iterations; ++i) y = lift(y);
      est[j] = (y - x0) / double(iterations);
    }
  });
  double lo = est[0], hi = est[0], sum = 0;
  for (double v : est) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  return {frac(sum / double(starts)), (hi - lo) + 1.0 / double(iterations)};
}

namespace {

void require_circle_group(const GroupSpec& group, const char* where) {
  if (group.space() != Space::Circle)
    throw Error(ErrorCode::SpaceMismatch, std::string(where) + ": circle group required");
  if (group.families.size() > 1)
    throw std::invalid_argument(std::string(where) + ": at most one circle family supported");
}

// Group elements to average over / test against, as plain expressions.
std::vector<MapExpr> haar_sample(const GroupSpec& group, int family_samples) {
  std::vector<MapExpr> finite_part{MapExpr::identity()};
  if (!group.generators.empty())
    finite_part = enumerate_closure(group.generators, Space::Circle, group.order_bound);
  if (group.families.empty()) return finite_part;

  int m = family_samples;
  while (m > 64 && m * int(finite_part.size()) > 2048) m /= 2;
  std::vector<MapExpr> out;
  out.reserve(size_t(m) * finite_part.size());
  const FamilyTemplate& fam = group.families.front();
  for (int j = 0; j < m; ++j) {
    MapExpr psi = fam.at(double(j) / double(m));
    for (const MapExpr& e : finite_part)
      out.push_back(group.generators.empty() ? psi : MapExpr::compose(psi, e));
  }
  return out;
}

}  // namespace

double InvariantMeasure::cdf(double x) const {
  const int r = resolution();
  double u = std::clamp(x, 0.0, 1.0) * double(r);
  int i = std::min(int(u), r - 1);
  double w = u - double(i);
  return cdf_[size_t(i)] * (1.0 - w) + cdf_[size_t(i) + 1] * w;
}

double InvariantMeasure::cdf_inverse(double y) const {
  const int r = resolution();
  y = std::clamp(y, 0.0, 1.0);
  int lo = 0, hi = r;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (cdf_[size_t(mid)] <= y)
      lo = mid;
    else
      hi = mid;
  }
  double f0 = cdf_[size_t(lo)], f1 = cdf_[size_t(hi)];
  double w = f1 > f0 ? (y - f0) / (f1 - f0) : 0.0;
  return (double(lo) + w) / double(r);
}

InvariantMeasure invariant_measure(const GroupSpec& group, int resolution, int family_samples) {
  require_circle_group(group, "invariant_measure");
  if (resolution < 64) throw std::invalid_argument("invariant_measure: resolution too small");
  if (family_samples < 256 && !group.families.empty())
    throw std::invalid_argument("invariant_measure: need >= 256 family samples");

  std::vector<MapExpr> contributors = haar_sample(group, family_samples);
  const int r = resolution;
  const int table = std::max(1024, r);

  std::vector<double> acc(size_t(r) + 1, 0.0);
  std::vector<double> local(size_t(r) + 1, 0.0);
  for (const MapExpr& g : contributors) {
    // Pushforward CDF of the uniform measure under g is
    //   F_g(x) = lift(g^-1)(x) - lift(g^-1)(0).
    Lift inv = lift_circle_map(MapExpr::inverse(g), table);
    if (table == r) {
      double base = inv.table_lift(0);
      for (int i = 0; i <= r; ++i) local[size_t(i)] = inv.table_lift(i) - base;
    } else {
      double base = inv(0.0);
      for (int i = 0; i <= r; ++i) local[size_t(i)] = inv(double(i) / double(r)) - base;
    }
    for (int i = 0; i <= r; ++i) acc[size_t(i)] += local[size_t(i)];
  }

  InvariantMeasure mu;
  mu.cdf_.resize(size_t(r) + 1);
  double count = double(contributors.size());
  for (int i = 0; i <= r; ++i) mu.cdf_[size_t(i)] = acc[size_t(i)] / count;
  mu.cdf_.front() = 0.0;
  mu.cdf_.back() = 1.0;
  for (int i = 1; i <= r; ++i)
    mu.cdf_[size_t(i)] = std::max(mu.cdf_[size_t(i)], mu.cdf_[size_t(i) - 1]);

  // Invariance defect against a sample of the group.
  std::vector<MapExpr> testers;
  if (group.families.empty()) {
    testers = contributors;
  } else {
    for (int j = 0; j < 16; ++j) testers.push_back(group.families.front().at(double(j) / 16.0));
    for (const MapExpr& g : group.generators) testers.push_back(g);
  }
  double defect = 0;
  for (const MapExpr& g : testers) {
    double fg0 = mu.cdf(g.eval_circle(0.0));
    for (int i = 0; i < 512; ++i) {
      double x = double(i) / 512.0;
      double lhs = mu.cdf(g.eval_circle(x)) - fg0;
      double d = std::fabs(circle_diff(lhs, mu.cdf(x)));
      defect = std::max(defect, d);
    }
  }
  mu.defect_ = defect;
  return mu;
}

RotationEstimate rotation_number_integral(const Lift& lift, const InvariantMeasure& mu) {
  const int r = mu.resolution();
  const auto& table = mu.table();
  double sum = 0;
  double phi_prev = lift.cocycle(0.0);
  for (int i = 0; i < r; ++i) {
    double phi_next = lift.cocycle(double(i + 1) / double(r));
    sum += 0.5 * (phi_prev + phi_next) * (table[size_t(i) + 1] - table[size_t(i)]);
    phi_prev = phi_next;
  }
  return {frac(sum), std::max(1.0 / double(r), mu.invariance_defect())};
}

MorphismCheck check_morphism(const GroupSpec& group, int pairs, long iterations,
                             unsigned long long seed) {
  require_circle_group(group, "check_morphism");
  if (pairs < 1) throw std::invalid_argument("check_morphism: need at least one pair");

  std::vector<MapExpr> finite_part;
  if (group.families.empty())
    finite_part = enumerate_closure(group.generators, Space::Circle, group.order_bound);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&]() {
    if (!group.families.empty()) return group.families.front().at(unit(rng));
    std::uniform_int_distribution<size_t> pick(0, finite_part.size() - 1);
    return finite_part[pick(rng)];
  };

  auto rho = [&](const MapExpr& f) {
    return rotation_number_birkhoff(lift_circle_map(f), iterations).value;
  };

  double worst = 0;
  for (int p = 0; p < pairs; ++p) {
    MapExpr f = draw(), g = draw();
    double rf = rho(f), rg = rho(g), rfg = rho(MapExpr::compose(f, g));
    worst = std::max(worst, std::fabs(circle_diff(rfg, rf + rg)));
  }
  return {worst, pairs};
}

CircleLinearization linearize_circle_group(const GroupSpec& group, int resolution,
                                           long rho_iterations) {
  require_circle_group(group, "linearize_circle_group");
  InvariantMeasure mu = invariant_measure(group, resolution);

  // Injectivity: a flat CDF run wider than 1e-6 collapses an arc.
  const auto& table = mu.table();
  const int r = mu.resolution();
  int run_start = 0;
  for (int i = 1; i <= r; ++i) {
    if (table[size_t(i)] > table[size_t(run_start)] + 1e-15) {
      run_start = i;
    } else if ((double(i) - double(run_start)) / double(r) > 1e-6) {
      throw Error(ErrorCode::NonInjectiveMeasure, "invariant CDF has a flat run");
    }
  }

  std::vector<MapExpr> gens;
  int order = 0;
  if (group.families.empty()) {
    gens = group.generators;
    order = int(enumerate_closure(group.generators, Space::Circle, group.order_bound).size());
  } else {
    gens.push_back(group.families.front().at(0.5));
    gens.push_back(group.families.front().at(0.6180339887498949));
    for (const MapExpr& g : group.generators) gens.push_back(g);
  }

  CircleLinearization out{std::move(mu), {}, 0.0};
  for (const MapExpr& g : gens) {
    double rho = rotation_number_birkhoff(lift_circle_map(g), rho_iterations).value;
    if (order > 0) {  // finite group: snap to the exact rational
      double snapped = std::round(rho * order) / double(order);
      if (std::fabs(circle_diff(rho, snapped)) < 1e-3) rho = frac(snapped);
    }
    double defect = 0;
    for (int i = 0; i < resolution; ++i) {
      double x = double(i) / double(resolution);
      double lhs = out.conjugator.cdf(g.eval_circle(x));
      double rhs = out.conjugator.cdf(x) + rho;
      defect = std::max(defect, std::fabs(circle_diff(lhs, rhs)));
    }
    out.generators.push_back({g, rho, defect});
    out.max_defect = std::max(out.max_defect, defect);
  }
  return out;
}

}  // namespace kerek
