#pragma once

#include <cstdint>
#include <vector>

#include "turs/common.hpp"

namespace turs {

/// Multinomial NML normalizer ("parametric complexity") R(n, C): the sum over
/// all C^n label sequences of the maximum-likelihood probability of the
/// sequence. Computed exactly: the O(n) binomial sum for C = 2 (log-space,
/// log-sum-exp) and the recurrence R(n, C) = R(n, C-1) + n/(C-2) * R(n, C-2)
/// for larger C. Values are memoized process-wide behind a lock.
namespace regret_table {

double log2_regret(int n, int n_classes);
double regret(int n, int n_classes);  // natural scale, exp2(log2_regret)

/// Dense snapshot of log2 R(m, C) for m = 0..n_max; lock-free to read.
std::vector<double> dense_log2(int n_max, int n_classes);

}  // namespace regret_table

/// Test oracle: enumerates all C^n label sequences directly.
/// Errors: SizeTooLarge for n > 8 or C > 3.
double regret_bruteforce(int n, int n_classes);

/// Rissanen's universal code for integers k >= 1:
/// c + log2 k + log2 log2 k + ..., keeping only positive terms and stopping
/// below precision 1e-5, with c = 2.865.
/// Errors: NonPositiveInteger for k < 1.
double rissanen_int_code(int64_t k);

enum class LiteralForm { Ge, Lt, Interval, Indicator };

struct LiteralCode {
  LiteralForm form;
  int k_value;  // admissible candidate values when the literal was added
};

/// Code length of one rule's condition:
///   log2 K_col                    (number of literals)
/// + log2 C(K_col, k)              (which columns)
/// + per literal: 1 + 1 + log2 K_value   (one-sided numeric: form, operator, value)
///                1 + log2 C(K_value, 2) (interval: form, value pair)
///                1                      (indicator on a one-hot column)
/// Errors: EmptyRule for k = 0; ZeroAdmissibleValues when a K_value cannot
/// encode the literal (< 1, or < 2 for intervals).
double rule_code_length(const std::vector<LiteralCode>& literals, int n_columns);

/// L(M) = rissanen(K + 1) + sum of L(S_i) - log2(K!). K is the number of
/// explicit rules (the else rule is never encoded); shifting the integer code
/// by one keeps the empty model encodable.
double model_code_length(const std::vector<double>& rule_code_lengths);

/// MDL score decomposition, all in bits.
struct ScoreBreakdown {
  double nll_bits = 0;
  double regret_bits = 0;
  double model_bits = 0;
  double total = 0;  // always nll_bits + regret_bits + model_bits
};

double log2_binomial(int64_t n, int64_t k);
double log2_factorial(int64_t n);

}  // namespace turs
