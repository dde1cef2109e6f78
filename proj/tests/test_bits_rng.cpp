#include <doctest.h>

#include <algorithm>
#include <set>

#include "turs/bitset.hpp"
#include "turs/rng.hpp"

using namespace turs;

TEST_CASE("bitset operations agree with a naive reference") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + static_cast<int>(rng.uniform_below(200));
    std::set<int> sa, sb;
    Bitset a(n), b(n);
    for (int i = 0; i < n; ++i) {
      if (rng.bernoulli(0.4)) { a.set(i); sa.insert(i); }
      if (rng.bernoulli(0.4)) { b.set(i); sb.insert(i); }
    }
    CHECK(a.count() == static_cast<int64_t>(sa.size()));

    int64_t and_count = 0, or_count = 0, diff_count = 0;
    for (int i = 0; i < n; ++i) {
      bool ia = sa.count(i) > 0, ib = sb.count(i) > 0;
      and_count += ia && ib;
      or_count += ia || ib;
      diff_count += ia && !ib;
    }
    CHECK(Bitset::count_and(a, b) == and_count);
    CHECK((a | b).count() == or_count);
    CHECK(and_not(a, b).count() == diff_count);
    CHECK(Bitset::count_and_not(a, b) == diff_count);
    CHECK((a & b).count() == and_count);
    CHECK(Bitset::intersects(a, b) == (and_count > 0));

    int64_t visited = 0;
    a.for_each_set([&](int i) {
      CHECK(sa.count(i) == 1);
      ++visited;
    });
    CHECK(visited == a.count());
  }
}

TEST_CASE("all_ones has no stray bits past the end") {
  for (int n : {1, 63, 64, 65, 100, 128}) {
    Bitset b = Bitset::all_ones(n);
    CHECK(b.count() == n);
  }
}

TEST_CASE("rng streams are deterministic and label-separated") {
  Rng a = Rng::derive(7, "folds");
  Rng b = Rng::derive(7, "folds");
  Rng c = Rng::derive(7, "simulation");
  bool identical = true, separated = false;
  for (int i = 0; i < 100; ++i) {
    uint64_t x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
    identical = identical && (x == y);
    separated = separated || (x != z);
  }
  CHECK(identical);
  CHECK(separated);
}

TEST_CASE("uniform_below stays in range and hits every value") {
  Rng rng(3);
  std::set<uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    uint64_t v = rng.uniform_below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("shuffle is a deterministic permutation") {
  std::vector<int> v1{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, v2 = v1, sorted = v1;
  Rng r1(5), r2(5);
  r1.shuffle(v1);
  r2.shuffle(v2);
  CHECK(v1 == v2);
  std::sort(v1.begin(), v1.end());
  CHECK(v1 == sorted);
}
