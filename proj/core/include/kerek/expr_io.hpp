#pragma once

#include <string>
#include <string_view>

#include "kerek/map_expr.hpp"

namespace kerek {

// Prefix text form of map expressions, e.g.
//   (conj (stereo (radial 1.5)) (rotS (0 0 1) 0.7853981633974483))
//
// Operators: id, rotC, warpC, rotD, radial, shear, rotS, reflS, antipodal,
// stereo, conj, comp, inv, pow.  Angles for rotC/rotD/shear are in turns,
// rotS angles in radians.  A rotation amount may be a parameter slot written
// t, -t or <int>t; such expressions must be bound before evaluation.
//
// Numbers are printed with shortest round-trip formatting, so parse(print(e))
// reproduces e bit-exactly.
MapExpr parse_map_expr(std::string_view text);
std::string print_map_expr(const MapExpr& m);

// Shortest round-trip decimal form of a double (std::to_chars).
std::string format_double(double v);

}  // namespace kerek
