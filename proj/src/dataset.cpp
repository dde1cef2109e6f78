#include "turs/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "turs/csv.hpp"
#include "turs/rng.hpp"

namespace turs {

namespace {

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
  if (b == e) return false;
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc{} && ptr == e && std::isfinite(out);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.n = static_cast<int>(rows.size());
  out.d = d;
  out.n_classes = n_classes;
  out.kinds = kinds;
  out.column_names = column_names;
  out.class_labels = class_labels;
  out.columns.assign(d, {});
  for (int j = 0; j < d; ++j) {
    out.columns[j].reserve(rows.size());
    for (int i : rows) out.columns[j].push_back(columns[j][i]);
  }
  out.labels.reserve(rows.size());
  for (int i : rows) out.labels.push_back(labels[i]);
  return out;
}

std::optional<Schema::Hint> Schema::lookup(const std::string& name) const {
  for (const auto& [n, h] : hints)
    if (n == name) return h;
  return std::nullopt;
}

Schema Schema::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open schema file: " + path);
  Schema s;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto pos = line.find(':');
    require(pos != std::string::npos, ErrorKind::Format,
            "schema: expected name:kind, got '" + line + "'");
    std::string name = trim(line.substr(0, pos));
    std::string kind = trim(line.substr(pos + 1));
    if (kind == "numeric")
      s.hints.emplace_back(name, Hint::Numeric);
    else if (kind == "categorical")
      s.hints.emplace_back(name, Hint::Categorical);
    else
      throw TursError(ErrorKind::Format,
                      "schema: unknown kind '" + kind + "' for " + name);
  }
  return s;
}

Dataset dataset_from_records(const std::vector<std::vector<std::string>>& rec,
                             const std::string& target, const Schema* schema) {
  require(!rec.empty(), ErrorKind::Format, "EmptyFile: no header row");
  const auto& header = rec[0];
  size_t n_rows = rec.size() - 1;
  require(n_rows >= 1, ErrorKind::Format, "EmptyFile: no data rows");

  int target_idx = -1;
  for (size_t j = 0; j < header.size(); ++j)
    if (header[j] == target) target_idx = static_cast<int>(j);
  require(target_idx >= 0, ErrorKind::Format,
          "UnknownTarget: no column named '" + target + "'");

  for (size_t i = 1; i < rec.size(); ++i) {
    require(rec[i].size() == header.size(), ErrorKind::Format,
            "MissingCell: row " + std::to_string(i) + " has " +
                std::to_string(rec[i].size()) + " cells, expected " +
                std::to_string(header.size()));
    for (const auto& cell : rec[i])
      require(!trim(cell).empty(), ErrorKind::Format,
              "MissingCell: empty cell in row " + std::to_string(i));
  }

  Dataset ds;
  ds.n = static_cast<int>(n_rows);

  // Target: dense class indices in first-appearance order.
  std::unordered_map<std::string, int> class_index;
  ds.labels.reserve(n_rows);
  for (size_t i = 1; i < rec.size(); ++i) {
    const std::string& v = rec[i][target_idx];
    auto it = class_index.find(v);
    if (it == class_index.end()) {
      it = class_index.emplace(v, static_cast<int>(ds.class_labels.size())).first;
      ds.class_labels.push_back(v);
    }
    ds.labels.push_back(it->second);
  }
  ds.n_classes = static_cast<int>(ds.class_labels.size());
  require(ds.n_classes >= 2, ErrorKind::Format,
          "SingleClassTarget: target '" + target + "' has " +
              std::to_string(ds.n_classes) + " distinct value(s)");

  for (size_t j = 0; j < header.size(); ++j) {
    if (static_cast<int>(j) == target_idx) continue;
    const std::string& name = header[j];

    std::vector<double> values(n_rows);
    bool all_numeric = true;
    for (size_t i = 1; i <= n_rows; ++i) {
      if (!parse_double(rec[i][j], values[i - 1])) {
        all_numeric = false;
        break;
      }
    }
    bool numeric = all_numeric;
    if (schema) {
      if (auto hint = schema->lookup(name)) {
        numeric = (*hint == Schema::Hint::Numeric);
        require(!numeric || all_numeric, ErrorKind::Format,
                "column '" + name + "' declared numeric but has non-numeric cells");
      }
    }

    if (numeric) {
      bool binary01 = true;
      for (double v : values)
        if (v != 0.0 && v != 1.0) {
          binary01 = false;
          break;
        }
      ds.columns.push_back(std::move(values));
      ds.column_names.push_back(name);
      ds.kinds.push_back(binary01 ? ColumnKind::Indicator : ColumnKind::Numeric);
    } else {
      // One-hot expansion, one {0,1} column per level, level order by first
      // appearance.
      std::vector<std::string> levels;
      std::unordered_map<std::string, int> level_index;
      std::vector<int> row_level(n_rows);
      for (size_t i = 1; i <= n_rows; ++i) {
        const std::string& v = rec[i][j];
        auto it = level_index.find(v);
        if (it == level_index.end()) {
          it = level_index.emplace(v, static_cast<int>(levels.size())).first;
          levels.push_back(v);
        }
        row_level[i - 1] = it->second;
      }
      for (size_t l = 0; l < levels.size(); ++l) {
        std::vector<double> col(n_rows, 0.0);
        for (size_t i = 0; i < n_rows; ++i)
          if (row_level[i] == static_cast<int>(l)) col[i] = 1.0;
        ds.columns.push_back(std::move(col));
        ds.column_names.push_back(name + "=" + levels[l]);
        ds.kinds.push_back(ColumnKind::Indicator);
      }
    }
  }
  ds.d = static_cast<int>(ds.columns.size());
  require(ds.d >= 1, ErrorKind::Format, "dataset has no feature columns");
  return ds;
}

Dataset load_csv(const std::string& path, const std::string& target,
                 const Schema* schema) {
  return dataset_from_records(csv::read_file(path), target, schema);
}

CutPoints compute_cutpoints(const Dataset& ds, int n_cutpoints) {
  require(n_cutpoints >= 1, ErrorKind::InvalidArgument, "n_cutpoints must be >= 1");
  CutPoints cp;
  cp.per_column.resize(ds.d);
  for (int j = 0; j < ds.d; ++j) {
    if (ds.kinds[j] != ColumnKind::Numeric) continue;
    std::vector<double> sorted = ds.columns[j];
    std::sort(sorted.begin(), sorted.end());
    double lo = sorted.front(), hi = sorted.back();
    if (lo == hi) continue;  // constant column
    auto& cuts = cp.per_column[j];
    for (int i = 1; i <= n_cutpoints; ++i) {
      // lower nearest-rank quantile at level i/(n_cutpoints+1)
      double q = static_cast<double>(i) / (n_cutpoints + 1);
      auto rank = static_cast<int64_t>(std::ceil(q * ds.n));
      if (rank < 1) rank = 1;
      if (rank > ds.n) rank = ds.n;
      double v = sorted[rank - 1];
      if (v == lo || v == hi) continue;
      if (cuts.empty() || v > cuts.back()) cuts.push_back(v);
    }
  }
  return cp;
}

std::vector<int> FoldAssignment::train_indices(int test_fold) const {
  std::vector<int> out;
  for (size_t i = 0; i < fold.size(); ++i)
    if (fold[i] != test_fold) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> FoldAssignment::test_indices(int test_fold) const {
  std::vector<int> out;
  for (size_t i = 0; i < fold.size(); ++i)
    if (fold[i] == test_fold) out.push_back(static_cast<int>(i));
  return out;
}

void FoldAssignment::write_csv(const std::string& path) const {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"instance_index", "fold"});
  for (size_t i = 0; i < fold.size(); ++i)
    rows.push_back({std::to_string(i), std::to_string(fold[i])});
  csv::write_file(path, rows);
}

FoldAssignment stratified_kfold(const Dataset& ds, int k, uint64_t seed) {
  require(k >= 2, ErrorKind::InvalidArgument, "k must be >= 2");
  std::vector<std::vector<int>> by_class(ds.n_classes);
  for (int i = 0; i < ds.n; ++i) by_class[ds.labels[i]].push_back(i);
  for (int c = 0; c < ds.n_classes; ++c)
    require(static_cast<int>(by_class[c].size()) >= k, ErrorKind::InvalidArgument,
            "ClassTooSmall: class '" + ds.class_labels[c] + "' has " +
                std::to_string(by_class[c].size()) + " < k instances");

  FoldAssignment fa;
  fa.k = k;
  fa.seed = seed;
  fa.fold.assign(ds.n, -1);
  Rng rng = Rng::derive(seed, "folds");
  for (int c = 0; c < ds.n_classes; ++c) {
    auto& idx = by_class[c];
    rng.shuffle(idx);
    // Round-robin deal from a random start so remainder folds vary by seed.
    int start = static_cast<int>(rng.uniform_below(k));
    for (size_t pos = 0; pos < idx.size(); ++pos)
      fa.fold[idx[pos]] = static_cast<int>((start + pos) % k);
  }
  return fa;
}

}  // namespace turs
