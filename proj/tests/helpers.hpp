#pragma once

#include <cmath>
#include <vector>

#include "turs/bitset.hpp"
#include "turs/dataset.hpp"
#include "turs/model.hpp"
#include "turs/rng.hpp"

namespace turs::testing {

/// Feature-less dataset for cover-level tests: labels only, one dummy column.
inline Dataset labels_only(const std::vector<int>& labels, int n_classes) {
  Dataset ds;
  ds.n = static_cast<int>(labels.size());
  ds.d = 1;
  ds.n_classes = n_classes;
  ds.labels = labels;
  ds.columns = {std::vector<double>(labels.size(), 0.0)};
  ds.kinds = {ColumnKind::Indicator};
  ds.column_names = {"x0"};
  for (int c = 0; c < n_classes; ++c) ds.class_labels.push_back(std::to_string(c));
  return ds;
}

/// Independent likelihood oracle: per instance, find the covering rules by
/// scanning covers, pick the matching distribution (rule / union-of-covers /
/// else), all computed by direct row scans.
inline double bruteforce_likelihood_bits(const std::vector<Bitset>& covers,
                                         const Dataset& ds) {
  const int n = ds.n;
  const int k = static_cast<int>(covers.size());
  double bits = 0;
  for (int i = 0; i < n; ++i) {
    std::vector<int> in;
    for (int r = 0; r < k; ++r)
      if (covers[r].test(i)) in.push_back(r);
    std::vector<int64_t> counts(ds.n_classes, 0);
    int64_t total = 0;
    if (in.empty()) {
      for (int j = 0; j < n; ++j) {
        bool covered = false;
        for (int r = 0; r < k; ++r)
          if (covers[r].test(j)) covered = true;
        if (!covered) {
          ++counts[ds.labels[j]];
          ++total;
        }
      }
    } else {
      for (int j = 0; j < n; ++j) {
        bool in_union = false;
        for (int r : in)
          if (covers[r].test(j)) in_union = true;
        if (in_union) {
          ++counts[ds.labels[j]];
          ++total;
        }
      }
    }
    double p = static_cast<double>(counts[ds.labels[i]]) / static_cast<double>(total);
    bits += -std::log2(p);
  }
  return bits;
}

/// Brute-force NML probability of the observed labels for a model whose rule
/// covers are pairwise disjoint: enumerate all C^n label assignments, compute
/// the ML likelihood of each under the group partition, and normalize.
inline double bruteforce_nml_probability(const std::vector<Bitset>& covers,
                                         const Dataset& ds) {
  const int n = ds.n;
  const int k = static_cast<int>(covers.size());
  // group id per instance: rule index, or k for the else rule
  std::vector<int> group(n, k);
  for (int r = 0; r < k; ++r)
    covers[r].for_each_set([&](int i) { group[i] = r; });
  std::vector<int64_t> group_size(k + 1, 0);
  for (int g : group) ++group_size[g];

  auto ml_likelihood = [&](const std::vector<int>& labels) {
    double lik = 1.0;
    for (int g = 0; g <= k; ++g) {
      if (group_size[g] == 0) continue;
      std::vector<int64_t> counts(ds.n_classes, 0);
      for (int i = 0; i < n; ++i)
        if (group[i] == g) ++counts[labels[i]];
      for (int c = 0; c < ds.n_classes; ++c)
        if (counts[c] > 0)
          lik *= std::pow(static_cast<double>(counts[c]) / group_size[g], counts[c]);
    }
    return lik;
  };

  double numer = ml_likelihood(ds.labels);
  double denom = 0;
  std::vector<int> assignment(n, 0);
  for (;;) {
    denom += ml_likelihood(assignment);
    int pos = n - 1;
    while (pos >= 0 && assignment[pos] == ds.n_classes - 1) assignment[pos--] = 0;
    if (pos < 0) break;
    ++assignment[pos];
  }
  return numer / denom;
}

inline Bitset bitset_of(const std::vector<int>& indices, int n) {
  Bitset b(n);
  for (int i : indices) b.set(i);
  return b;
}

/// Numeric mixture with a smooth logistic signal; fitted rule sets form
/// staggered threshold rules with similar estimates, so overlaps appear.
inline Dataset overlapping_numeric_dataset(int n, uint64_t seed) {
  Rng rng(seed);
  auto normal = [&rng] {
    double u1 = rng.uniform01(), u2 = rng.uniform01();
    if (u1 < 1e-12) u1 = 1e-12;
    return std::sqrt(-2 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };
  Dataset ds;
  ds.n = n;
  ds.d = 4;
  ds.n_classes = 2;
  ds.kinds.assign(4, ColumnKind::Numeric);
  ds.column_names = {"f0", "f1", "f2", "f3"};
  ds.class_labels = {"0", "1"};
  ds.columns.resize(4);
  for (int i = 0; i < n; ++i) {
    double f[4];
    for (double& v : f) v = normal();
    for (int j = 0; j < 4; ++j) ds.columns[j].push_back(f[j]);
    double logit = 1.5 * f[0] - 2.0 * (f[1] > 0.5 ? 1.0 : 0.0) + f[2] * f[3];
    double p = 1.0 / (1.0 + std::exp(-logit));
    ds.labels.push_back(rng.bernoulli(p) ? 1 : 0);
  }
  return ds;
}

}  // namespace turs::testing
