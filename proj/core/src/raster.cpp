#include "kerek/raster.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "kerek/error.hpp"

namespace kerek {

namespace {

struct Face {
  Vec3 normal, eu, ev;
};

// e_u x e_v == outward normal on every face.
constexpr Face kFaces[6] = {
    {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}},  {{-1, 0, 0}, {0, 0, 1}, {0, 1, 0}},
    {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}},  {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}},
    {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}},  {{0, 0, -1}, {0, 1, 0}, {1, 0, 0}},
};

}  // namespace

CubeMap::CubeMap(int resolution) : res_(resolution) {
  if (resolution < 8) throw std::invalid_argument("CubeMap: resolution must be at least 8");
  data_.assign(size_t(6) * size_t(res_) * size_t(res_), 0);
}

void CubeMap::fill(uint8_t v) { std::fill(data_.begin(), data_.end(), v); }

size_t CubeMap::index(int face, int i, int j) const {
  return (size_t(face) * size_t(res_) + size_t(j)) * size_t(res_) + size_t(i);
}

Vec3 CubeMap::center(size_t idx) const {
  size_t per = size_t(res_) * size_t(res_);
  int face = int(idx / per);
  size_t rem = idx % per;
  int j = int(rem / size_t(res_));
  int i = int(rem % size_t(res_));
  double u = 2.0 * (double(i) + 0.5) / double(res_) - 1.0;
  double v = 2.0 * (double(j) + 0.5) / double(res_) - 1.0;
  const Face& f = kFaces[face];
  return normalized(f.normal + f.eu * u + f.ev * v);
}

size_t CubeMap::locate(const Vec3& dir) const {
  double ax = std::fabs(dir.x), ay = std::fabs(dir.y), az = std::fabs(dir.z);
  int face;
  if (ax >= ay && ax >= az)
    face = dir.x >= 0 ? 0 : 1;
  else if (ay >= ax && ay >= az)
    face = dir.y >= 0 ? 2 : 3;
  else
    face = dir.z >= 0 ? 4 : 5;
  const Face& f = kFaces[face];
  double w = dot(dir, f.normal);
  double u = dot(dir, f.eu) / w;
  double v = dot(dir, f.ev) / w;
  int i = std::clamp(int((u + 1.0) / 2.0 * double(res_)), 0, res_ - 1);
  int j = std::clamp(int((v + 1.0) / 2.0 * double(res_)), 0, res_ - 1);
  return index(face, i, j);
}

double CubeMap::pixel_radius() const {
  // Largest pixel sits at a face center where the gnomonic metric has unit
  // scale; corner pixels are compressed.  Measure its half-diagonal directly.
  int mid = res_ / 2;
  Vec3 c = center(index(0, mid, mid));
  const Face& f = kFaces[0];
  double u = -1.0 + 2.0 * double(mid + 1) / double(res_);
  Vec3 corner = normalized(f.normal + f.eu * u + f.ev * u);
  return std::acos(std::clamp(dot(c, corner), -1.0, 1.0));
}

std::array<size_t, 4> CubeMap::neighbors4(size_t idx) const {
  std::array<size_t, 8> all = neighbors8(idx);
  return {all[0], all[2], all[4], all[6]};
}

std::array<size_t, 8> CubeMap::neighbors8(size_t idx) const {
  size_t per = size_t(res_) * size_t(res_);
  int face = int(idx / per);
  size_t rem = idx % per;
  int j = int(rem / size_t(res_));
  int i = int(rem % size_t(res_));
  static constexpr int kOff[8][2] = {{1, 0},  {1, 1},   {0, 1},  {-1, 1},
                                     {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
  std::array<size_t, 8> out{};
  const Face& f = kFaces[face];
  for (int k = 0; k < 8; ++k) {
    int ii = i + kOff[k][0];
    int jj = j + kOff[k][1];
    if (ii >= 0 && ii < res_ && jj >= 0 && jj < res_) {
      out[size_t(k)] = index(face, ii, jj);
    } else {
      double u = 2.0 * (double(ii) + 0.5) / double(res_) - 1.0;
      double v = 2.0 * (double(jj) + 0.5) / double(res_) - 1.0;
      out[size_t(k)] = locate(normalized(f.normal + f.eu * u + f.ev * v));
    }
  }
  return out;
}

size_t CubeMap::flood_fill(size_t seed, uint8_t mark) {
  if (data_[seed] != 0) return 0;
  size_t count = 0;
  std::vector<size_t> stack{seed};
  data_[seed] = mark;
  while (!stack.empty()) {
    size_t p = stack.back();
    stack.pop_back();
    ++count;
    for (size_t n : neighbors4(p))
      if (data_[n] == 0) {
        data_[n] = mark;
        stack.push_back(n);
      }
  }
  return count;
}

std::vector<size_t> CubeMap::trace_boundary(uint8_t outside) const {
  // Find a region pixel with an outside edge-neighbour.
  size_t start = size(), start_back = size();
  for (size_t p = 0; p < size() && start == size(); ++p) {
    if (data_[p] == outside) continue;
    for (size_t n : neighbors4(p))
      if (data_[n] == outside) {
        start = p;
        start_back = n;
        break;
      }
  }
  if (start == size())
    throw Error(ErrorCode::ResolutionTooCoarse, "no boundary between region and outside");

  // The walk is a deterministic map on (pixel, backtrack) states, so it is
  // eventually periodic; the period is the boundary circuit.  Stopping only
  // on return to the start state can spin forever when the start lies on a
  // lead-in tail, so detect any repeated state and cut the cycle there.
  std::vector<size_t> cycle;
  std::unordered_map<uint64_t, size_t> seen;
  size_t cur = start, back = start_back;
  size_t cap = size() / 2 + 64;
  while (true) {
    uint64_t key = uint64_t(cur) * uint64_t(size()) + uint64_t(back);
    auto [it, fresh] = seen.emplace(key, cycle.size());
    if (!fresh) {
      cycle.erase(cycle.begin(), cycle.begin() + long(it->second));
      break;
    }
    cycle.push_back(cur);
    if (cycle.size() > cap)
      throw Error(ErrorCode::ResolutionTooCoarse, "boundary trace exceeded the length cap");
    std::array<size_t, 8> nb = neighbors8(cur);
    int from = -1;
    for (int k = 0; k < 8; ++k)
      if (nb[size_t(k)] == back) {
        from = k;
        break;
      }
    if (from < 0)
      throw Error(ErrorCode::ResolutionTooCoarse, "boundary trace lost its backtrack pixel");
    size_t next = size(), next_back = back;
    for (int s = 1; s <= 8; ++s) {
      int k = (from + s) % 8;
      size_t cand = nb[size_t(k)];
      if (cand == cur) continue;
      if (data_[cand] != outside) {
        next = cand;
        break;
      }
      next_back = cand;
    }
    if (next == size())
      throw Error(ErrorCode::ResolutionTooCoarse, "isolated pixel on the boundary trace");
    cur = next;
    back = next_back;
  }
  if (cycle.empty())
    throw Error(ErrorCode::ResolutionTooCoarse, "boundary trace produced no cycle");
  return cycle;
}

std::vector<Vec3> smooth_closed_curve(const std::vector<Vec3>& pts, int rounds) {
  std::vector<Vec3> cur = pts;
  for (int r = 0; r < rounds; ++r) {
    std::vector<Vec3> next(cur.size());
    size_t n = cur.size();
    for (size_t i = 0; i < n; ++i) {
      Vec3 v = cur[(i + n - 1) % n] * 0.25 + cur[i] * 0.5 + cur[(i + 1) % n] * 0.25;
      next[i] = normalized(v);
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace kerek
