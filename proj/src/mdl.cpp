#include "turs/mdl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <unordered_map>

namespace turs {

namespace {

constexpr double kLn2 = 0.6931471805599453094;

/// ln(i) and ln(i!) tables, grown on demand. Guarded by the table mutex.
struct LogTables {
  std::vector<double> ln;       // ln[i]
  std::vector<double> ln_fact;  // ln(i!)

  void grow(int n) {
    if (static_cast<int>(ln.size()) > n) return;
    size_t old = ln.size();
    if (old == 0) {
      ln = {0.0, 0.0};  // ln(0) unused, ln(1) = 0
      ln_fact = {0.0, 0.0};
      old = 2;
    }
    ln.resize(n + 1);
    ln_fact.resize(n + 1);
    for (size_t i = old; i <= static_cast<size_t>(n); ++i) {
      ln[i] = std::log(static_cast<double>(i));
      ln_fact[i] = ln_fact[i - 1] + ln[i];
    }
  }
};

struct RegretCache {
  std::mutex mu;
  LogTables tables;
  // per class count C, dense ln R(m, C) for m = 0..size-1
  std::unordered_map<int, std::vector<double>> ln_regret;
};

RegretCache& cache() {
  static RegretCache* c = new RegretCache();
  return *c;
}

double logsumexp(const std::vector<double>& v) {
  double mx = *std::max_element(v.begin(), v.end());
  double s = 0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

/// ln R(n, 2) by the exact binomial sum, table-backed.
double ln_regret_binary(int n, const LogTables& t) {
  if (n == 0) return 0.0;
  std::vector<double> terms(n + 1);
  const double ln_n = t.ln[n];
  for (int h = 0; h <= n; ++h) {
    double term = t.ln_fact[n] - t.ln_fact[h] - t.ln_fact[n - h];
    if (h > 0) term += h * (t.ln[h] - ln_n);
    if (n - h > 0) term += (n - h) * (t.ln[n - h] - ln_n);
    terms[h] = term;
  }
  return logsumexp(terms);
}

/// Fills ln R(m, C) for m = 0..n into the cache; caller holds the lock.
void fill_locked(RegretCache& c, int n, int n_classes) {
  c.tables.grow(std::max(n, 1));
  for (int cls = 1; cls <= n_classes; ++cls) {
    auto& vec = c.ln_regret[cls];
    int start = static_cast<int>(vec.size());
    if (start > n) continue;
    vec.resize(n + 1);
    for (int m = start; m <= n; ++m) {
      if (cls == 1 || m == 0) {
        vec[m] = 0.0;
      } else if (cls == 2) {
        vec[m] = ln_regret_binary(m, c.tables);
      } else {
        // R(m, C) = R(m, C-1) + m/(C-2) * R(m, C-2), in log space
        double a = c.ln_regret[cls - 1][m];
        double b = c.tables.ln[m] - std::log(static_cast<double>(cls - 2)) +
                   c.ln_regret[cls - 2][m];
        double mx = std::max(a, b);
        vec[m] = mx + std::log(std::exp(a - mx) + std::exp(b - mx));
      }
    }
  }
}

}  // namespace

namespace regret_table {

double log2_regret(int n, int n_classes) {
  require(n >= 0, ErrorKind::InvalidArgument, "regret: n must be >= 0");
  require(n_classes >= 1, ErrorKind::InvalidArgument, "regret: C must be >= 1");
  if (n == 0 || n_classes == 1) return 0.0;
  auto& c = cache();
  std::lock_guard<std::mutex> lock(c.mu);
  auto it = c.ln_regret.find(n_classes);
  if (it == c.ln_regret.end() || static_cast<int>(it->second.size()) <= n)
    fill_locked(c, n, n_classes);
  return c.ln_regret[n_classes][n] / kLn2;
}

double regret(int n, int n_classes) { return std::exp2(log2_regret(n, n_classes)); }

std::vector<double> dense_log2(int n_max, int n_classes) {
  auto& c = cache();
  std::lock_guard<std::mutex> lock(c.mu);
  auto it = c.ln_regret.find(n_classes);
  if (n_classes > 1 &&
      (it == c.ln_regret.end() || static_cast<int>(it->second.size()) <= n_max))
    fill_locked(c, n_max, n_classes);
  std::vector<double> out(n_max + 1, 0.0);
  if (n_classes > 1) {
    const auto& vec = c.ln_regret[n_classes];
    for (int m = 0; m <= n_max; ++m) out[m] = vec[m] / kLn2;
  }
  return out;
}

}  // namespace regret_table

double regret_bruteforce(int n, int n_classes) {
  require(n >= 0 && n_classes >= 1, ErrorKind::InvalidArgument,
          "regret_bruteforce: bad arguments");
  require(n <= 8 && n_classes <= 3, ErrorKind::InvalidArgument,
          "SizeTooLarge: brute force limited to n <= 8, C <= 3");
  if (n == 0) return 1.0;
  std::vector<int> seq(n, 0);
  double total = 0.0;
  for (;;) {
    std::vector<int> counts(n_classes, 0);
    for (int v : seq) ++counts[v];
    double lik = 1.0;
    for (int c = 0; c < n_classes; ++c)
      if (counts[c] > 0)
        lik *= std::pow(static_cast<double>(counts[c]) / n, counts[c]);
    total += lik;
    int pos = n - 1;
    while (pos >= 0 && seq[pos] == n_classes - 1) seq[pos--] = 0;
    if (pos < 0) break;
    ++seq[pos];
  }
  return total;
}

double rissanen_int_code(int64_t k) {
  require(k >= 1, ErrorKind::InvalidArgument,
          "NonPositiveInteger: Rissanen code needs k >= 1");
  constexpr double kC = 2.865;
  constexpr double kPrecision = 1e-5;
  double bits = kC;
  double term = std::log2(static_cast<double>(k));
  while (term > kPrecision) {
    bits += term;
    term = std::log2(term);
  }
  return bits;
}

double log2_factorial(int64_t n) { return std::lgamma(static_cast<double>(n) + 1) / kLn2; }

double log2_binomial(int64_t n, int64_t k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return log2_factorial(n) - log2_factorial(k) - log2_factorial(n - k);
}

double rule_code_length(const std::vector<LiteralCode>& literals, int n_columns) {
  const auto k = static_cast<int64_t>(literals.size());
  require(k >= 1, ErrorKind::InvalidArgument, "EmptyRule: rule has no literals");
  double bits = std::log2(static_cast<double>(n_columns)) +
                log2_binomial(n_columns, k);
  for (const auto& lit : literals) {
    switch (lit.form) {
      case LiteralForm::Ge:
      case LiteralForm::Lt:
        require(lit.k_value >= 1, ErrorKind::InvalidArgument,
                "ZeroAdmissibleValues: one-sided literal needs K_value >= 1");
        bits += 1 /*form*/ + 1 /*operator*/ + std::log2(static_cast<double>(lit.k_value));
        break;
      case LiteralForm::Interval:
        require(lit.k_value >= 2, ErrorKind::InvalidArgument,
                "ZeroAdmissibleValues: interval literal needs K_value >= 2");
        bits += 1 /*form*/ + log2_binomial(lit.k_value, 2);
        break;
      case LiteralForm::Indicator:
        bits += 1;
        break;
    }
  }
  return bits;
}

double model_code_length(const std::vector<double>& rule_code_lengths) {
  const auto k = static_cast<int64_t>(rule_code_lengths.size());
  double bits = rissanen_int_code(k + 1) - log2_factorial(k);
  for (double l : rule_code_lengths) bits += l;
  return bits;
}

}  // namespace turs
