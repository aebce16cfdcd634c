#include "kerek/group_spec.hpp"

#include <fstream>
#include <sstream>

#include "kerek/expr_io.hpp"

namespace kerek {

FamilyTemplate::FamilyTemplate(MapExpr skeleton) : skeleton_(std::move(skeleton)) {
  if (!skeleton_.is_parametric())
    throw std::invalid_argument("FamilyTemplate: skeleton has no parameter slot");
}

Space GroupSpec::space() const {
  std::optional<Space> s;
  auto merge = [&](std::optional<Space> t, const char* what) {
    if (!t) return;
    if (s && *s != *t)
      throw Error(ErrorCode::SpaceMismatch,
                  std::string("group spec mixes spaces (") + what + ")");
    s = t;
  };
  for (const auto& fam : families) merge(fam.space(), "family");
  for (const auto& g : generators) merge(g.space(), "generator");
  if (!s) throw std::invalid_argument("group spec: space cannot be inferred");
  return *s;
}

namespace {

SampleGrid dedup_grid(Space s) {
  switch (s) {
    case Space::Circle: return make_grid(s, 64);
    case Space::Disk: return make_grid(s, 6);
    case Space::Sphere: return make_grid(s, 8);
  }
  throw std::logic_error("dedup_grid: unreachable");
}

}  // namespace

void validate_group_spec(const GroupSpec& spec) {
  if (spec.families.empty() && spec.generators.empty())
    throw std::invalid_argument("group spec: empty");
  Space s = spec.space();
  SampleGrid grid = dedup_grid(s);
  Metric metric = Metric::intrinsic(s);
  MapExpr id = MapExpr::identity();

  for (const auto& fam : spec.families) {
    if (sup_distance(fam.at(0.0), id, grid, metric) > 1e-6)
      throw Error(ErrorCode::DegenerateFamily, "family: Psi_0 is not the identity");
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) {
        double a = double(i) / 16.0, b = double(j) / 16.0;
        MapExpr lhs = MapExpr::compose(fam.at(a), fam.at(b));
        MapExpr rhs = fam.at(frac(a + b));
        if (sup_distance(lhs, rhs, grid, metric) > 1e-6)
          throw Error(ErrorCode::DegenerateFamily,
                      "family: parameter addition law fails at (" + format_double(a) + ", " +
                          format_double(b) + ")");
      }
    }
    for (int k = 2; k <= 8; ++k) {
      if (sup_distance(fam.at(1.0 / double(k)), id, grid, metric) <= 1e-6)
        throw Error(ErrorCode::DegenerateFamily,
                    "family: not faithful (Psi_{1/" + std::to_string(k) + "} = Id)");
    }
  }
}

std::vector<MapExpr> enumerate_closure(const std::vector<MapExpr>& generators, Space space,
                                       int order_bound, double tol) {
  if (order_bound < 1 || order_bound > 120)
    throw std::invalid_argument("enumerate_closure: order bound must be in [1, 120]");

  SampleGrid grid = dedup_grid(space);
  Metric metric = Metric::intrinsic(space);
  const auto& pts = grid.points;

  auto same = [&](const std::vector<SurfacePoint>& a, const std::vector<SurfacePoint>& b) {
    double worst = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      worst = std::max(worst, metric(a[i], b[i]));
      if (worst > tol) return false;
    }
    return true;
  };

  std::vector<MapExpr> elems{MapExpr::identity()};
  std::vector<std::vector<SurfacePoint>> sigs{std::vector<SurfacePoint>(pts.begin(), pts.end())};
  for (size_t head = 0; head < elems.size(); ++head) {
    for (const MapExpr& gen : generators) {
      MapExpr cand = MapExpr::compose(gen, elems[head]);
      // The candidate signature is gen applied to the cached images, which is
      // bit-identical to evaluating the composed expression.
      std::vector<SurfacePoint> sig;
      sig.reserve(pts.size());
      for (const auto& p : sigs[head]) sig.push_back(evaluate(gen, p));
      bool known = false;
      for (const auto& existing : sigs) {
        if (same(existing, sig)) {
          known = true;
          break;
        }
      }
      if (known) continue;
      elems.push_back(cand);
      sigs.push_back(std::move(sig));
      if (int(elems.size()) > order_bound)
        throw Error(ErrorCode::ClosureOverflow,
                    "closure exceeds the order bound " + std::to_string(order_bound));
    }
  }
  return elems;
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void parse_spec_into(const std::string& text, const std::string& base_dir, GroupSpec& out,
                     int depth) {
  if (depth > 8) throw std::invalid_argument("group spec: include depth exceeded");
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t colon = t.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("group spec: malformed line '" + t + "'");
    std::string key = trim(t.substr(0, colon));
    std::string value = trim(t.substr(colon + 1));
    if (key == "space") {
      if (value != "circle" && value != "disk" && value != "sphere")
        throw std::invalid_argument("group spec: unknown space '" + value + "'");
      // informative only; the parts determine the space
    } else if (key == "family") {
      out.families.emplace_back(parse_map_expr(value));
    } else if (key == "generator") {
      out.generators.push_back(parse_map_expr(value));
    } else if (key == "order_bound") {
      out.order_bound = std::stoi(value);
    } else if (key == "include") {
      std::string path = value;
      if (!path.empty() && path[0] != '/') path = base_dir + "/" + path;
      std::ifstream f(path);
      if (!f) throw std::invalid_argument("group spec: cannot open include '" + path + "'");
      std::stringstream buf;
      buf << f.rdbuf();
      std::string dir = path.substr(0, path.find_last_of('/') == std::string::npos
                                           ? 0
                                           : path.find_last_of('/'));
      parse_spec_into(buf.str(), dir.empty() ? "." : dir, out, depth + 1);
    } else {
      throw std::invalid_argument("group spec: unknown key '" + key + "'");
    }
  }
}

}  // namespace

GroupSpec parse_group_spec(const std::string& text, const std::string& base_dir) {
  GroupSpec spec;
  parse_spec_into(text, base_dir, spec, 0);
  if (spec.families.empty() && spec.generators.empty())
    throw std::invalid_argument("group spec: no families or generators");
  return spec;
}

GroupSpec read_group_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("read_group_spec: cannot open '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  size_t slash = path.find_last_of('/');
  std::string dir = slash == std::string::npos ? "." : path.substr(0, slash);
  return parse_group_spec(buf.str(), dir);
}

std::vector<MapExpr> sample_group_elements(const GroupSpec& spec, int family_samples) {
  if (family_samples < 1) throw std::invalid_argument("sample_group_elements: samples must be >= 1");
  std::vector<MapExpr> finite = spec.generators.empty()
                                    ? std::vector<MapExpr>{MapExpr::identity()}
                                    : enumerate_closure(spec.generators, spec.space(),
                                                        spec.order_bound);
  long m = family_samples;
  auto total = [&]() {
    long t = long(finite.size());
    for (size_t k = 0; k < spec.families.size(); ++k) t *= m;
    return t;
  };
  while (total() > 8192 && m > 2) m = (m + 1) / 2;

  std::vector<MapExpr> out = std::move(finite);
  for (const FamilyTemplate& fam : spec.families) {
    std::vector<MapExpr> next;
    next.reserve(out.size() * size_t(m));
    for (long j = 0; j < m; ++j) {
      MapExpr psi = fam.at(double(j) / double(m));
      for (const MapExpr& e : out)
        next.push_back(j == 0 ? e : MapExpr::compose(psi, e));
    }
    out = std::move(next);
  }
  return out;
}

std::string print_group_spec(const GroupSpec& spec) {
  std::string out = "space: " + std::string(space_name(spec.space())) + "\n";
  for (const auto& fam : spec.families) out += "family: " + print_map_expr(fam.skeleton()) + "\n";
  for (const auto& g : spec.generators) out += "generator: " + print_map_expr(g) + "\n";
  out += "order_bound: " + std::to_string(spec.order_bound) + "\n";
  return out;
}

}  // namespace kerek
