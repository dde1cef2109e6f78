#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "turs/common.hpp"

namespace turs {

enum class ColumnKind { Numeric, Indicator };

/// Immutable tabular dataset: numeric feature matrix (categoricals one-hot
/// encoded into {0,1} indicator columns) plus dense integer class labels.
/// Safe for concurrent reads once constructed.
struct Dataset {
  int n = 0;          // rows
  int d = 0;          // columns after encoding
  int n_classes = 0;  // C >= 2

  std::vector<std::vector<double>> columns;  // column-major, columns[j][i]
  std::vector<int> labels;                   // labels[i] in [0, n_classes)
  std::vector<ColumnKind> kinds;
  std::vector<std::string> column_names;
  std::vector<std::string> class_labels;  // first-appearance order

  double value(int row, int col) const { return columns[col][row]; }
  std::vector<double> row(int i) const {
    std::vector<double> r(d);
    for (int j = 0; j < d; ++j) r[j] = columns[j][i];
    return r;
  }

  /// Row subset preserving column metadata and the class-index mapping.
  Dataset subset(const std::vector<int>& rows) const;
};

/// Per-column kind hints for load_csv: column name -> numeric|categorical.
struct Schema {
  enum class Hint { Numeric, Categorical };
  std::vector<std::pair<std::string, Hint>> hints;
  std::optional<Hint> lookup(const std::string& name) const;
  static Schema load(const std::string& path);  // "name:kind" lines
};

/// Loads an RFC 4180 CSV with header row. Categorical columns are expanded
/// one column per level, named "orig=level"; the target column is mapped to
/// dense class indices in first-appearance order. Numeric columns whose
/// observed values are all in {0,1} are typed as indicator columns.
///
/// Errors (ErrorKind::Format unless noted): EmptyFile, UnknownTarget,
/// MissingCell, SingleClassTarget; ErrorKind::Io when unreadable.
Dataset load_csv(const std::string& path, const std::string& target,
                 const Schema* schema = nullptr);

/// Same, from already-parsed CSV records (header first).
Dataset dataset_from_records(const std::vector<std::vector<std::string>>& rec,
                             const std::string& target,
                             const Schema* schema = nullptr);

/// Candidate thresholds per column. Indicator columns get empty lists.
struct CutPoints {
  std::vector<std::vector<double>> per_column;  // strictly increasing
};

/// Empirical quantiles (lower nearest-rank, so always observed values) at
/// levels i/(n_cutpoints+1), i = 1..n_cutpoints, deduplicated; values equal
/// to the column min or max are dropped. Constant columns yield empty lists.
CutPoints compute_cutpoints(const Dataset& ds, int n_cutpoints);

struct FoldAssignment {
  std::vector<int> fold;  // per instance, in [0, k)
  int k = 0;
  uint64_t seed = 0;

  std::vector<int> train_indices(int test_fold) const;
  std::vector<int> test_indices(int test_fold) const;
  void write_csv(const std::string& path) const;  // instance_index,fold
};

/// Deterministic stratified k-fold split: per fold and class, counts differ
/// from the exact proportional share by at most one.
/// Errors: ClassTooSmall when some class has fewer than k instances.
FoldAssignment stratified_kfold(const Dataset& ds, int k, uint64_t seed);

}  // namespace turs
