#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "kerek/geometry.hpp"

namespace kerek {

// Cube-map raster over the unit sphere: six gnomonic faces, `resolution`
// pixels per side, one byte per pixel.  Face frames are right-handed with
// respect to the outward normal, so the counterclockwise neighbour order is
// consistent across seams when viewed from outside the sphere.
class CubeMap {
public:
  explicit CubeMap(int resolution);

  int resolution() const { return res_; }
  size_t size() const { return data_.size(); }
  uint8_t& at(size_t idx) { return data_[idx]; }
  uint8_t at(size_t idx) const { return data_[idx]; }
  const std::vector<uint8_t>& data() const { return data_; }
  void fill(uint8_t v);

  size_t index(int face, int i, int j) const;
  Vec3 center(size_t idx) const;
  size_t locate(const Vec3& dir) const;

  // Geodesic radius of the largest pixel (center to farthest corner).
  double pixel_radius() const;

  // Edge / full neighbourhoods; seam crossings resolved by reprojecting the
  // out-of-face direction.  The 8-neighbourhood is in counterclockwise order.
  std::array<size_t, 4> neighbors4(size_t idx) const;
  std::array<size_t, 8> neighbors8(size_t idx) const;

  // Marks every pixel with value 0 reachable from seed (4-connectivity) with
  // `mark`; returns the number of pixels marked.
  size_t flood_fill(size_t seed, uint8_t mark);

  // Pixel-center cycle around the set {value != barrier_value}... see .cpp:
  // traces the boundary of the region of pixels whose value differs from
  // `outside`, starting next to `outside_seed`.  Throws ResolutionTooCoarse
  // when the trace degenerates.
  std::vector<size_t> trace_boundary(uint8_t outside) const;

private:
  int res_;
  std::vector<uint8_t> data_;
};

// Two rounds of closed-polyline smoothing (1-2-1 weights) with renormalization
// to the unit sphere.
std::vector<Vec3> smooth_closed_curve(const std::vector<Vec3>& pts, int rounds = 2);

}  // namespace kerek
