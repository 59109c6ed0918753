#ifndef SHDOA_RNG_HPP
#define SHDOA_RNG_HPP

// Counter-based RNG (Philox4x32-10) so that Monte-Carlo trials are
// reproducible and order-independent: stream (seed, stream_id) at counter i
// always yields the same draw, regardless of thread scheduling.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace shdoa {

struct PhiloxBlock {
  uint32_t v[4];
};

inline PhiloxBlock philox4x32(uint64_t key, uint64_t counter_hi, uint64_t counter_lo) {
  uint32_t c0 = static_cast<uint32_t>(counter_lo);
  uint32_t c1 = static_cast<uint32_t>(counter_lo >> 32);
  uint32_t c2 = static_cast<uint32_t>(counter_hi);
  uint32_t c3 = static_cast<uint32_t>(counter_hi >> 32);
  uint32_t k0 = static_cast<uint32_t>(key);
  uint32_t k1 = static_cast<uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    uint64_t p0 = static_cast<uint64_t>(0xD2511F53u) * c0;
    uint64_t p1 = static_cast<uint64_t>(0xCD9E8D57u) * c2;
    uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
    uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
    uint32_t n0 = hi1 ^ c1 ^ k0;
    uint32_t n1 = lo1;
    uint32_t n2 = hi0 ^ c3 ^ k1;
    uint32_t n3 = lo0;
    c0 = n0; c1 = n1; c2 = n2; c3 = n3;
    k0 += 0x9E3779B9u;
    k1 += 0xBB67AE85u;
  }
  return {{c0, c1, c2, c3}};
}

// Uniform in (0,1): 53 mantissa bits, never exactly 0.
inline double u64_to_unit(uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

class NoiseStream {
public:
  NoiseStream(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

  // i-th standard Gaussian draw of this stream (Box-Muller, cosine branch).
  double gaussian(uint64_t i) const {
    PhiloxBlock b = philox4x32(seed_, stream_, i);
    uint64_t u0 = (static_cast<uint64_t>(b.v[0]) << 32) | b.v[1];
    uint64_t u1 = (static_cast<uint64_t>(b.v[2]) << 32) | b.v[3];
    double r = std::sqrt(-2.0 * std::log(u64_to_unit(u0)));
    return r * std::cos(2.0 * std::numbers::pi * u64_to_unit(u1));
  }

  double uniform(uint64_t i) const {
    PhiloxBlock b = philox4x32(seed_, stream_, i);
    return u64_to_unit((static_cast<uint64_t>(b.v[0]) << 32) | b.v[1]);
  }

private:
  uint64_t seed_;
  uint64_t stream_;
};

// Derive a sub-stream id from structured indices (trial, mic, purpose...).
inline uint64_t stream_id(uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  uint64_t h = a * 0x9E3779B97F4A7C15ull;
  h ^= b + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  h ^= c + 0xBF58476D1CE4E5B9ull + (h << 6) + (h >> 2);
  return h;
}

}  // namespace shdoa

#endif
