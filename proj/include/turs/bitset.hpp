#pragma once

#include <bit>
#include <cstdint>
#include <cstddef>
#include <vector>

namespace turs {

/// Fixed-size bitset over instance indices. All binary operations assume
/// operands of equal size.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(int n_bits) : n_(n_bits), words_((n_bits + 63) / 64, 0) {}

  static Bitset all_ones(int n_bits) {
    Bitset b(n_bits);
    for (auto& w : b.words_) w = ~uint64_t{0};
    b.trim();
    return b;
  }

  int size() const { return n_; }

  void set(int i) { words_[i >> 6] |= uint64_t{1} << (i & 63); }
  void reset(int i) { words_[i >> 6] &= ~(uint64_t{1} << (i & 63)); }
  bool test(int i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

  int64_t count() const {
    int64_t c = 0;
    for (uint64_t w : words_) c += std::popcount(w);
    return c;
  }
  bool any() const {
    for (uint64_t w : words_)
      if (w) return true;
    return false;
  }

  Bitset& operator&=(const Bitset& o) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  Bitset& operator|=(const Bitset& o) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  /// this &= ~o
  Bitset& subtract(const Bitset& o) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    return *this;
  }

  friend Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }
  friend Bitset operator|(Bitset a, const Bitset& b) { return a |= b; }
  friend Bitset and_not(Bitset a, const Bitset& b) { return a.subtract(b); }

  friend bool operator==(const Bitset& a, const Bitset& b) {
    return a.n_ == b.n_ && a.words_ == b.words_;
  }

  /// popcount(a & b) without materializing the intersection.
  static int64_t count_and(const Bitset& a, const Bitset& b) {
    int64_t c = 0;
    for (size_t i = 0; i < a.words_.size(); ++i)
      c += std::popcount(a.words_[i] & b.words_[i]);
    return c;
  }
  /// popcount(a & b & c)
  static int64_t count_and3(const Bitset& a, const Bitset& b, const Bitset& c) {
    int64_t r = 0;
    for (size_t i = 0; i < a.words_.size(); ++i)
      r += std::popcount(a.words_[i] & b.words_[i] & c.words_[i]);
    return r;
  }
  /// popcount(a & ~b)
  static int64_t count_and_not(const Bitset& a, const Bitset& b) {
    int64_t r = 0;
    for (size_t i = 0; i < a.words_.size(); ++i)
      r += std::popcount(a.words_[i] & ~b.words_[i]);
    return r;
  }
  static bool intersects(const Bitset& a, const Bitset& b) {
    for (size_t i = 0; i < a.words_.size(); ++i)
      if (a.words_[i] & b.words_[i]) return true;
    return false;
  }

  template <typename Fn>
  void for_each_set(Fn&& fn) const {
    for (size_t wi = 0; wi < words_.size(); ++wi) {
      uint64_t w = words_[wi];
      while (w) {
        int bit = std::countr_zero(w);
        fn(static_cast<int>(wi * 64 + bit));
        w &= w - 1;
      }
    }
  }

 private:
  void trim() {
    if (n_ % 64 != 0 && !words_.empty())
      words_.back() &= (uint64_t{1} << (n_ % 64)) - 1;
  }

  int n_ = 0;
  std::vector<uint64_t> words_;
};

}  // namespace turs
