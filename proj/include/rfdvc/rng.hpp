#pragma once

#include <cstdint>
#include <random>

namespace rfdvc {

// splitmix64; used for stateless procedural hashing (value noise, sprite
// parameters). Bit-exact on every platform.
inline uint64_t hash64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t hash64(uint64_t a, uint64_t b) { return hash64(a ^ hash64(b)); }
inline uint64_t hash64(uint64_t a, uint64_t b, uint64_t c) {
  return hash64(a ^ hash64(b ^ hash64(c)));
}

// Deterministic RNG. std::mt19937_64 output is pinned by the standard; all
// value mappings are done by hand because std distributions are not.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi] inclusive. Modulo bias is irrelevant at these ranges.
  int64_t next_int(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  bool next_bernoulli(double p) { return next_double() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rfdvc
