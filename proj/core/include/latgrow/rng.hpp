#pragma once

#include <cstdint>
#include <string_view>

#include "latgrow/site.hpp"

namespace latgrow {

/// Counter-based splittable pseudorandom stream (splitmix64 core).
///
/// Streams are keyed by (master seed, replica index, sub-stream label), so the
/// main walk, auxiliary probe walks and lazy domain reveals draw from disjoint
/// sequences. Two models fed streams with equal keys consume identical
/// randomness, which is what the shared-stream coupling tests rely on.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(uint64_t key) : key_(key) {}

  static constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static uint64_t label_hash(std::string_view label) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (char ch : label) {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001B3ull;
    }
    return mix64(h);
  }

  static RngStream derive(uint64_t master, uint64_t replica, std::string_view label) {
    uint64_t key = mix64(mix64(master) + 0x1F83D9ABFB41BD6Bull * (replica + 1));
    key = mix64(key ^ label_hash(label));
    return RngStream(key);
  }

  uint64_t key() const { return key_; }
  uint64_t counter() const { return ctr_; }

  uint64_t next() { return mix64(key_ + (++ctr_) * kGamma); }

  /// Uniform in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Unbiased uniform integer in [0, n), n >= 1 (Lemire with rejection).
  uint32_t below(uint32_t n) {
    uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<uint64_t>(m);
    if (lo < n) {
      uint64_t t = (0 - static_cast<uint64_t>(n)) % n;
      while (lo < t) {
        x = next();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint32_t>(m >> 64);
  }

  /// Pure per-id coin: a function of (key, id) only, independent of stream
  /// position. Backs lazy Bernoulli edge reveals.
  static bool coin(uint64_t key, uint64_t id, double p) {
    return static_cast<double>(mix64(key ^ mix64(id + kGamma)) >> 11) * 0x1.0p-53 < p;
  }

 private:
  uint64_t key_ = 0;
  uint64_t ctr_ = 0;
};

/// The standard per-replica bundle of disjoint streams.
struct RngBundle {
  RngStream main;    // the walk's own moves
  RngStream aux;     // policy decisions (POBT coins, ROBT picks, drift sampling)
  RngStream probe;   // auxiliary probe walks (PSRW)
  uint64_t domain_key = 0;  // lazy Bernoulli field decisions

  static RngBundle derive(uint64_t master, uint64_t replica) {
    RngBundle b;
    b.main = RngStream::derive(master, replica, "main");
    b.aux = RngStream::derive(master, replica, "aux");
    b.probe = RngStream::derive(master, replica, "probe");
    b.domain_key = RngStream::derive(master, replica, "domain").key();
    return b;
  }
};

}  // namespace latgrow
