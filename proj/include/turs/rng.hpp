#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace turs {

/// xoshiro256** with explicit integer/real derivation so that streams are
/// reproducible across platforms and standard libraries (std::shuffle and
/// std::*_distribution are implementation-defined and therefore avoided).
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    // splitmix64 state expansion, the recommended seeding for xoshiro.
    uint64_t x = seed;
    for (auto& s : state_) s = splitmix64(x);
  }

  uint64_t next_u64() {
    uint64_t result = rotl(state_[1] * 5, 7) * 9;
    uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform integer in [0, n), unbiased via rejection.
  uint64_t uniform_below(uint64_t n) {
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  /// Uniform real in [0, 1) with 53 bits.
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform_below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Derives an independent substream from (seed, label[, index]); all
  /// randomness in the library flows from one seed through these labels.
  static Rng derive(uint64_t seed, std::string_view label, uint64_t index = 0) {
    uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    uint64_t x = seed;
    uint64_t mixed = splitmix64(x) ^ h;
    mixed = mixed * 0x9e3779b97f4a7c15ull + index;
    return Rng(mixed);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t state_[4];
};

}  // namespace turs
