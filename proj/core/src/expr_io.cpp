#include "kerek/expr_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <vector>

namespace kerek {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

struct Token {
  enum Kind { LParen, RParen, Atom } kind;
  std::string text;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(') {
      out.push_back({Token::LParen, "("});
      ++i;
    } else if (c == ')') {
      out.push_back({Token::RParen, ")"});
      ++i;
    } else {
      size_t j = i;
      while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' &&
             s[j] != ')')
        ++j;
      out.push_back({Token::Atom, std::string(s.substr(i, j - i))});
      i = j;
    }
  }
  return out;
}

[[noreturn]] void bad(const std::string& why) {
  throw std::invalid_argument("parse_map_expr: " + why);
}

class Parser {
public:
  explicit Parser(std::string_view s) : toks_(tokenize(s)) {}

  MapExpr parse() {
    MapExpr e = expr();
    if (pos_ != toks_.size()) bad("trailing input");
    return e;
  }

private:
  const Token& peek() {
    if (pos_ >= toks_.size()) bad("unexpected end of input");
    return toks_[pos_];
  }
  Token next() {
    Token t = peek();
    ++pos_;
    return t;
  }
  void expect(Token::Kind k, const char* what) {
    if (next().kind != k) bad(std::string("expected ") + what);
  }
  std::string atom() {
    Token t = next();
    if (t.kind != Token::Atom) bad("expected an atom");
    return t.text;
  }

  double number() {
    std::string a = atom();
    double v = 0;
    auto res = std::from_chars(a.data(), a.data() + a.size(), v);
    if (res.ec != std::errc() || res.ptr != a.data() + a.size())
      bad("bad number '" + a + "'");
    return v;
  }

  long integer() {
    std::string a = atom();
    long v = 0;
    auto res = std::from_chars(a.data(), a.data() + a.size(), v);
    if (res.ec != std::errc() || res.ptr != a.data() + a.size())
      bad("bad integer '" + a + "'");
    return v;
  }

  // A rotation amount: a number, or a parameter slot t / -t / <int>t.
  struct Amount {
    bool parametric = false;
    double value = 0;
    int multiplier = 0;
  };

  Amount amount() {
    std::string a = atom();
    if (!a.empty() && a.back() == 't') {
      std::string head = a.substr(0, a.size() - 1);
      int m = 1;
      if (head == "-") {
        m = -1;
      } else if (!head.empty()) {
        int v = 0;
        auto res = std::from_chars(head.data(), head.data() + head.size(), v);
        if (res.ec != std::errc() || res.ptr != head.data() + head.size() || v == 0)
          bad("bad parameter slot '" + a + "'");
        m = v;
      }
      return {true, 0.0, m};
    }
    double v = 0;
    auto res = std::from_chars(a.data(), a.data() + a.size(), v);
    if (res.ec != std::errc() || res.ptr != a.data() + a.size())
      bad("bad amount '" + a + "'");
    return {false, v, 0};
  }

  Vec3 vec3() {
    expect(Token::LParen, "(");
    double x = number(), y = number(), z = number();
    expect(Token::RParen, ")");
    return {x, y, z};
  }

  MapExpr expr() {
    expect(Token::LParen, "(");
    std::string op = atom();
    MapExpr out = MapExpr::identity();
    if (op == "id") {
      out = MapExpr::identity();
    } else if (op == "rotC") {
      Amount a = amount();
      out = a.parametric ? MapExpr::parametric_circle_rotation(a.multiplier)
                         : MapExpr::circle_rotation(a.value);
    } else if (op == "warpC") {
      std::vector<double> c;
      while (peek().kind == Token::Atom) c.push_back(number());
      if (c.empty()) bad("warpC needs at least one coefficient");
      out = MapExpr::circle_warp(std::move(c));
    } else if (op == "rotD") {
      Amount a = amount();
      out = a.parametric ? MapExpr::parametric_disk_rotation(a.multiplier)
                         : MapExpr::disk_rotation(a.value);
    } else if (op == "radial") {
      out = MapExpr::radial_warp(number());
    } else if (op == "shear") {
      double c = number();
      double m = peek().kind == Token::Atom ? number() : 1.0;
      out = MapExpr::angular_shear(c, m);
    } else if (op == "rotS") {
      Vec3 axis = vec3();
      Amount a = amount();
      out = a.parametric ? MapExpr::parametric_sphere_rotation(axis, a.multiplier)
                         : MapExpr::sphere_rotation(axis, a.value);
    } else if (op == "reflS") {
      out = MapExpr::sphere_reflection(vec3());
    } else if (op == "antipodal") {
      out = MapExpr::antipodal();
    } else if (op == "stereo") {
      out = MapExpr::stereographic(expr());
    } else if (op == "conj") {
      MapExpr g = expr();
      MapExpr f = expr();
      out = MapExpr::conjugation(g, f);
    } else if (op == "comp") {
      MapExpr f = expr();
      MapExpr g = expr();
      out = MapExpr::compose(f, g);
    } else if (op == "inv") {
      out = MapExpr::inverse(expr());
    } else if (op == "pow") {
      MapExpr f = expr();
      out = MapExpr::power(f, integer());
    } else {
      bad("unknown operator '" + op + "'");
    }
    expect(Token::RParen, ")");
    return out;
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

std::string amount_text(double value, int param_multiplier) {
  if (param_multiplier == 0) return format_double(value);
  if (param_multiplier == 1) return "t";
  if (param_multiplier == -1) return "-t";
  return std::to_string(param_multiplier) + "t";
}

std::string vec3_text(const Vec3& v) {
  return "(" + format_double(v.x) + " " + format_double(v.y) + " " + format_double(v.z) + ")";
}

std::string print_node(const MapExpr::Node& n) {
  using K = MapKind;
  switch (n.kind) {
    case K::Identity: return "(id)";
    case K::CircleRotation: return "(rotC " + amount_text(n.a, n.param_multiplier) + ")";
    case K::CircleWarp: {
      std::string s = "(warpC";
      for (double c : n.coeffs) s += " " + format_double(c);
      return s + ")";
    }
    case K::DiskRotation: return "(rotD " + amount_text(n.a, n.param_multiplier) + ")";
    case K::RadialWarp: return "(radial " + format_double(n.a) + ")";
    case K::AngularShear:
      return "(shear " + format_double(n.a) + " " + format_double(n.b) + ")";
    case K::SphereRotation:
      return "(rotS " + vec3_text(n.vec) + " " + amount_text(n.a, n.param_multiplier) + ")";
    case K::SphereReflection: return "(reflS " + vec3_text(n.vec) + ")";
    case K::Antipodal: return "(antipodal)";
    case K::Stereographic: return "(stereo " + print_node(*n.f) + ")";
    case K::Conjugation: return "(conj " + print_node(*n.g) + " " + print_node(*n.f) + ")";
    case K::Compose: return "(comp " + print_node(*n.f) + " " + print_node(*n.g) + ")";
    case K::Inverse: return "(inv " + print_node(*n.f) + ")";
    case K::Power: return "(pow " + print_node(*n.f) + " " + std::to_string(n.k) + ")";
  }
  throw std::logic_error("print_map_expr: unreachable");
}

}  // namespace

MapExpr parse_map_expr(std::string_view text) { return Parser(text).parse(); }

std::string print_map_expr(const MapExpr& m) { return print_node(m.node()); }

}  // namespace kerek
