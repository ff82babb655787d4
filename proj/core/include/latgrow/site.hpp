#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace latgrow {

/// Highest lattice dimension supported at desk scale.
inline constexpr int kMaxDim = 4;

/// A point of Z^d. Coordinates beyond the active dimension stay zero, so
/// equality and hashing are dimension-agnostic.
struct Site {
  std::array<int32_t, kMaxDim> c{};

  Site() = default;
  Site(int32_t x) : c{x, 0, 0, 0} {}
  Site(int32_t x, int32_t y) : c{x, y, 0, 0} {}
  Site(int32_t x, int32_t y, int32_t z) : c{x, y, z, 0} {}
  Site(int32_t x, int32_t y, int32_t z, int32_t w) : c{x, y, z, w} {}

  int32_t operator[](int axis) const { return c[static_cast<size_t>(axis)]; }
  int32_t& operator[](int axis) { return c[static_cast<size_t>(axis)]; }

  friend bool operator==(const Site&, const Site&) = default;
  friend auto operator<=>(const Site&, const Site&) = default;

  bool is_origin() const { return c == std::array<int32_t, kMaxDim>{}; }

  std::string to_string(int d) const {
    std::string s = "(";
    for (int i = 0; i < d; ++i) {
      if (i) s += ',';
      s += std::to_string(c[static_cast<size_t>(i)]);
    }
    return s + ")";
  }
};

inline uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

struct SiteHash {
  size_t operator()(const Site& s) const {
    uint64_t a = (static_cast<uint64_t>(static_cast<uint32_t>(s.c[0])) << 32) |
                 static_cast<uint32_t>(s.c[1]);
    uint64_t b = (static_cast<uint64_t>(static_cast<uint32_t>(s.c[2])) << 32) |
                 static_cast<uint32_t>(s.c[3]);
    return static_cast<size_t>(mix64(a ^ mix64(b + 0x9E3779B97F4A7C15ull)));
  }
};

// Direction encoding: dir = 2*axis + (0 for -e_axis, 1 for +e_axis).
// Enumerating dir = 0..2d-1 yields the canonical neighbor order
// (axis ascending, minus before plus).
inline int dir_axis(int dir) { return dir >> 1; }
inline int dir_sign(int dir) { return (dir & 1) ? +1 : -1; }
inline int dir_opposite(int dir) { return dir ^ 1; }

inline Site neighbor(const Site& z, int dir) {
  Site n = z;
  n[dir_axis(dir)] += dir_sign(dir);
  return n;
}

/// The 2d sites at l1-distance one from z, canonical order.
inline std::vector<Site> neighbors(const Site& z, int d) {
  std::vector<Site> out;
  out.reserve(static_cast<size_t>(2 * d));
  for (int dir = 0; dir < 2 * d; ++dir) out.push_back(neighbor(z, dir));
  return out;
}

inline int64_t l1_norm(const Site& z, int d) {
  int64_t s = 0;
  for (int i = 0; i < d; ++i) s += std::abs(static_cast<int64_t>(z[i]));
  return s;
}

inline int64_t l1_dist(const Site& a, const Site& b, int d) {
  int64_t s = 0;
  for (int i = 0; i < d; ++i)
    s += std::abs(static_cast<int64_t>(a[i]) - static_cast<int64_t>(b[i]));
  return s;
}

inline int64_t l2_sq(const Site& z, int d) {
  int64_t s = 0;
  for (int i = 0; i < d; ++i) s += static_cast<int64_t>(z[i]) * z[i];
  return s;
}

/// An edge of Z^d in canonical form: `lo` is the endpoint with the smaller
/// coordinate along `axis` (the endpoints differ only there).
struct Edge {
  Site lo;
  int axis = 0;

  Edge() = default;
  Edge(const Site& lower, int ax) : lo(lower), axis(ax) {}

  /// Canonicalize an endpoint pair; throws unless the pair is at Z^d-distance one.
  static Edge between(const Site& a, const Site& b, int d) {
    int diff_axis = -1;
    for (int i = 0; i < d; ++i) {
      if (a[i] != b[i]) {
        if (diff_axis >= 0 || std::abs(a[i] - b[i]) != 1)
          throw std::invalid_argument("Edge::between: sites not adjacent");
        diff_axis = i;
      }
    }
    if (diff_axis < 0) throw std::invalid_argument("Edge::between: equal sites");
    return (a[diff_axis] < b[diff_axis]) ? Edge(a, diff_axis) : Edge(b, diff_axis);
  }

  /// The edge leaving z in direction dir.
  static Edge incident(const Site& z, int dir) {
    return (dir_sign(dir) > 0) ? Edge(z, dir_axis(dir))
                               : Edge(neighbor(z, dir), dir_axis(dir));
  }

  Site hi() const {
    Site h = lo;
    h[axis] += 1;
    return h;
  }

  friend bool operator==(const Edge&, const Edge&) = default;

  /// Deterministic 64-bit id, the key for lazy Bernoulli reveals and logs.
  uint64_t id() const {
    uint64_t a = (static_cast<uint64_t>(static_cast<uint32_t>(lo.c[0])) << 32) |
                 static_cast<uint32_t>(lo.c[1]);
    uint64_t b = (static_cast<uint64_t>(static_cast<uint32_t>(lo.c[2])) << 32) |
                 static_cast<uint32_t>(lo.c[3]);
    return mix64(a + mix64(b ^ (0x51ED2701u + static_cast<uint64_t>(axis))));
  }
};

struct EdgeHash {
  size_t operator()(const Edge& e) const { return static_cast<size_t>(e.id()); }
};

}  // namespace latgrow
