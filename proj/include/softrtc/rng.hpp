#pragma once

#include <cstdint>
#include <random>

#include "softrtc/core.hpp"

namespace softrtc {

// Deterministic random stream. All draws are spelled out here rather than
// delegated to std distributions so that two code paths seeded identically
// consume the underlying engine in exactly the same order.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1), 53 mantissa bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller. Consumes exactly two uniforms per call.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    require(lo <= hi, "uniform_int: lo > hi");
    int span = hi - lo + 1;
    int k = static_cast<int>(uniform() * span);
    if (k >= span) k = span - 1;
    return lo + k;
  }

  Mat normal_mat(int rows, int cols) {
    Mat m(rows, cols);
    for (double& v : m.data) v = normal();
    return m;
  }

 private:
  std::mt19937_64 gen_;
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent sub-seed from a master seed and an index path.
// Used to give every (task, delay, episode, ...) cell its own stream so
// results do not depend on scheduling or worker count.
inline uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> path) {
  uint64_t h = splitmix64(master);
  for (uint64_t p : path) h = splitmix64(h ^ splitmix64(p));
  return h;
}

}  // namespace softrtc
