#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "turs/bitset.hpp"
#include "turs/dataset.hpp"
#include "turs/mdl.hpp"
#include "turs/rng.hpp"

namespace turs {

/// One condition on one column. GE(v): x >= v; LT(v): x < v;
/// INTERVAL(lo, hi): lo <= x < hi; INDICATOR(b): x == b on a one-hot column.
struct Literal {
  int column = 0;
  LiteralForm form = LiteralForm::Ge;
  double value = 0;    // threshold / interval low / indicator 0 or 1
  double value2 = 0;   // interval high
  int k_value = 1;     // admissible-value count frozen when the literal was added

  bool matches(double x) const {
    switch (form) {
      case LiteralForm::Ge: return x >= value;
      case LiteralForm::Lt: return x < value;
      case LiteralForm::Interval: return value <= x && x < value2;
      case LiteralForm::Indicator: return x == value;
    }
    return false;
  }
  LiteralCode code() const { return {form, k_value}; }
};

bool literal_matches(const Literal& l, const std::vector<double>& row);

/// Probabilistic rule: a conjunction of literals plus the ML class
/// distribution over its training cover. The cover always uses the rule's
/// full cover, including overlaps, so every rule is self-standing.
struct Rule {
  std::vector<Literal> literals;
  Bitset cover;                      // training rows satisfying all literals
  std::vector<int64_t> class_counts;
  std::vector<double> prob;          // derived: counts / coverage
  int64_t coverage = 0;
  double code_bits = 0;              // L(S); 0 for synthetic (literal-free) rules

  bool matches_row(const std::vector<double>& row) const {
    for (const auto& l : literals)
      if (!l.matches(row[l.column])) return false;
    return true;
  }
};

/// counts[j] / sum(counts); uniform 1/C when the cover is empty.
std::vector<double> ml_estimate(const std::vector<int64_t>& counts);

Bitset rule_cover(const std::vector<Literal>& literals, const Dataset& ds);

struct PredictedDistribution {
  std::vector<double> prob;
  enum class Source { SingleRule, Union, ElseRule } source = Source::ElseRule;
  std::vector<int> rule_indices;  // sorted; empty for the else rule

  std::string provenance() const;  // "rule:i" | "union:i,j" | "else"
};

/// One cell of the signature partition: the set of training instances covered
/// by exactly the rules in `sig` (empty sig = the else rule). `dist` is the
/// distribution used for those instances: the rule's own estimate for
/// singleton signatures, the union estimate for larger ones.
struct SignatureGroup {
  std::vector<int> sig;  // sorted rule indices
  Bitset members;
  std::vector<int64_t> counts;       // labels of members
  std::vector<int64_t> union_counts; // labels over union of covers (|sig| >= 2)
  Bitset union_cover;                // union of covers (|sig| >= 2)
  std::vector<double> dist;
  std::vector<double> neg_log2_dist;
};

/// A fitted rule set: rules, the implicit else rule, and the signature
/// partition of the training data. Immutable after construction; predict and
/// union_estimate are pure and safe to call concurrently.
class RuleSetModel {
 public:
  RuleSetModel() = default;

  /// Empty model (else rule covers everything).
  static RuleSetModel empty(const Dataset& ds);

  /// Model from explicit covers; rules carry no literals and no code length.
  /// Supports scoring arbitrary covers (used heavily by the test oracles).
  static RuleSetModel from_covers(const std::vector<Bitset>& covers,
                                  const Dataset& ds);

  /// Copy of this model with one more rule, signatures and else rule rebuilt.
  RuleSetModel with_rule(Rule rule, const Dataset& ds) const;

  int n_rules() const { return static_cast<int>(rules_.size()); }
  const std::vector<Rule>& rules() const { return rules_; }
  const Bitset& else_cover() const { return else_cover_; }
  const std::vector<int64_t>& else_counts() const { return else_counts_; }
  const std::vector<double>& else_prob() const { return else_prob_; }
  const std::vector<SignatureGroup>& groups() const { return groups_; }
  const Bitset& covered() const { return covered_; }  // union of rule covers
  int n_classes() const { return n_classes_; }
  int n_columns() const { return n_columns_; }
  const std::vector<std::string>& column_names() const { return column_names_; }
  const std::vector<std::string>& class_labels() const { return class_labels_; }

  const ScoreBreakdown& score() const { return score_; }
  void set_score(const ScoreBreakdown& s) { score_ = s; }

  /// ML estimate over the union of the covers of the rules in I, aggregated
  /// from the signature table (so it works on loaded models without the
  /// training data). Errors: EmptyIndexSet.
  std::vector<double> union_estimate(const std::vector<int>& rule_indices) const;

  /// -log2 likelihood of the training labels, summed in ascending instance
  /// order for bit-reproducibility.
  double log_likelihood_bits(const Dataset& ds) const;

  PredictedDistribution predict(const std::vector<double>& row) const;
  /// Overlaps resolved by picking one covering rule uniformly at random.
  PredictedDistribution predict_random_pick(const std::vector<double>& row,
                                            Rng& rng) const;

  std::string to_json() const;
  static RuleSetModel from_json(const std::string& text);

  std::string describe() const;  // pretty-printed rules + score summary

 private:
  void rebuild(const Dataset& ds);
  std::vector<int> covering_rules(const std::vector<double>& row) const;

  int n_classes_ = 0;
  int n_columns_ = 0;
  std::vector<std::string> column_names_;
  std::vector<ColumnKind> column_kinds_;
  std::vector<std::string> class_labels_;

  std::vector<Rule> rules_;
  Bitset else_cover_;
  std::vector<int64_t> else_counts_;
  std::vector<double> else_prob_;
  Bitset covered_;
  std::vector<SignatureGroup> groups_;       // deterministic (lexicographic) order
  std::vector<int> instance_group_;          // training row -> group index
  ScoreBreakdown score_;

  friend class CandidateScorer;
};

/// Canonical MDL score of a model against its training data:
/// nll (likelihood bits) + regret (sum over rules incl. the else rule of
/// log2 R(|S|, C), full covers) + model code length.
ScoreBreakdown total_score(const RuleSetModel& model, const Dataset& ds);

std::string format_rule(const Rule& rule, const std::vector<std::string>& column_names);

}  // namespace turs
