#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "turs/dataset.hpp"
#include "turs/model.hpp"
#include "turs/search.hpp"

namespace turs {

/// Rank-statistic ROC-AUC (probability a random positive outranks a random
/// negative, ties counting one half), Mann-Whitney with midranks.
/// Errors: SingleClass when a class is absent.
double roc_auc_binary(const std::vector<double>& scores,
                      const std::vector<int>& binary_labels);

/// Unweighted mean over classes of the one-vs-rest AUC of each class column.
double macro_ovr_auc(const std::vector<std::vector<double>>& prob_rows,
                     const std::vector<int>& labels, int n_classes);

/// AUC of a fitted model on rows/labels: binary AUC of the class-1
/// probability when C = 2, macro one-vs-rest otherwise.
double model_auc(const RuleSetModel& model,
                 const std::vector<std::vector<double>>& rows,
                 const std::vector<int>& labels);

struct RandomPickResult {
  double auc_mean = 0;     // mean AUC over repetitions of random-pick prediction
  double pct_overlap = 0;  // fraction of rows covered by >= 2 rules
};

RandomPickResult evaluate_random_pick(const RuleSetModel& model,
                                      const std::vector<std::vector<double>>& rows,
                                      const std::vector<int>& labels,
                                      int n_reps, uint64_t seed);

/// Probability-generalizability score g: (1/K) * sum_j |S_j| * mean_c
/// |p_jc - q_jc| with p from training counts and q the ML estimate on the
/// rule's test cover (uniform when the test cover is empty). `normalized`
/// divides by the summed coverage instead of scaling by it.
/// Errors: EmptyModel when the model has no rules.
double generalizability_score(const RuleSetModel& model,
                              const std::vector<std::vector<double>>& test_rows,
                              const std::vector<int>& test_labels,
                              bool normalized = false);

int total_literals(const RuleSetModel& model);

struct FoldMetrics {
  double auc = 0;
  double auc_random_pick = 0;
  double pct_overlap = 0;
  double g_score = 0;
  int n_rules = 0;
  int total_literals = 0;
  double avg_rule_length = 0;
  ScoreBreakdown score;
};

struct MetricsReport {
  std::vector<FoldMetrics> folds;
  FoldMetrics mean;  // score fields averaged componentwise

  std::string to_json() const;
  std::string to_csv() const;   // one row per fold plus a mean row
  std::string to_text() const;  // plain summary for stdout
};

/// Stratified k-fold cross-validation: fit on each training split, evaluate
/// on the held-out fold. Folds may be fitted in parallel; aggregation order
/// is fixed by fold index.
MetricsReport cross_validate(const Dataset& ds, const SearchConfig& cfg, int k,
                             uint64_t seed,
                             FoldAssignment* folds_out = nullptr);

/// Synthetic ground-truth data: 50 binary features, X1 ~ Ber(0.2),
/// Xi ~ Ber(0.5) for i >= 2, Y|X1=1 ~ Ber(0.7), Y|X1=0 ~ Ber(0.95).
Dataset simulate_groundtruth(int n, uint64_t seed);
void write_dataset_csv(const Dataset& ds, const std::string& path);

struct AblationArm {
  // means with standard deviations over repetitions
  double n_rules_mean = 0, n_rules_sd = 0;
  double rule_length_mean = 0, rule_length_sd = 0;
  double auc_mean = 0, auc_sd = 0;
  double mdl_mean = 0, mdl_sd = 0;
  double prob_diff_mean = 0, prob_diff_sd = 0;
  int exact_recoveries = 0;  // runs ending with exactly [x1 == b], one literal
};

struct AblationResult {
  int reps = 0;
  AblationArm with_local_test;
  AblationArm without_local_test;

  std::string to_text() const;  // two-row table, local testing no/yes
  std::string to_csv() const;
};

/// Repeated fits on fresh synthetic train/test draws with the local test on
/// and off. Repetitions run in parallel with deterministic substreams.
AblationResult run_ablation(int reps, int n, uint64_t seed,
                            const SearchConfig& base_cfg);

}  // namespace turs
