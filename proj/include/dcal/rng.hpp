#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace dcal {

// SplitMix64 run in counter mode: the i-th draw is a pure function of
// (key, i), so streams are reproducible bit-for-bit across platforms and
// independent substreams can be derived by hashing (seed, stream) pairs.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed) ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  static std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix(mix(seed) ^ mix(a + 0x9e3779b97f4a7c15ULL) ^ mix(b + 0xd1b54a32d192ed03ULL));
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  // Uniform on (0,1): never returns an exact endpoint.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via the inverse CDF (deterministic, one draw per variate).
  double normal();

  // N(0, sd^2) winsorized at +-cap.
  double clipped_normal(double sd, double cap) {
    return std::clamp(sd * normal(), -cap, cap);
  }

  int uniform_int(int n) {  // 0..n-1
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

  // Seeded Fisher-Yates permutation of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(idx[i], idx[uniform_int(i + 1)]);
    return idx;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dcal
