#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "turs/dataset.hpp"
#include "turs/model.hpp"

namespace turs {

struct SearchConfig {
  int beam_width = 10;
  int n_cutpoints = 20;
  int k_stop = 3;  // consecutive non-improving growth iterations before stopping
  uint64_t seed = 0;
  bool patience_diversity = true;  // cluster candidates by coverage-shrink ratio
  bool local_test = true;          // MDL local test gate on every growth step
  int max_rules = 0;               // 0 = unlimited
  double score_tolerance = 1e-10;
  // Open choice surfaced as a flag: rank the auxiliary beam by the
  // complementary score at the cross-iteration reduction instead of by r(.).
  bool aux_rank_by_complementary = false;
  // Debug mode: cross-check every incremental candidate score against a full
  // model rebuild and throw if they disagree by more than 1e-9 bits.
  bool full_rebuild_check = false;
  int n_threads = 0;  // 0 = TURS_THREADS env or hardware concurrency

  // Structured per-iteration trace sink (JSONL when driven from the CLI).
  std::function<void(const std::string&)> trace;

  void validate() const;
};

/// Candidate rule under construction, as kept in the beams.
struct BeamEntry {
  std::vector<Literal> literals;
  Bitset cover;
  int64_t coverage = 0;
  int64_t new_coverage = 0;  // instances not covered by the current rule set
  double r_score = 0;        // learning speed
  double big_r_score = 0;    // complementary score
  int cluster = 0;           // coverage-ratio cluster of the last growth step, 1..W
  int cluster_aux = 0;
};

/// Learning speed r(S): decrease of the MDL score per newly covered instance
/// when S is added to `current`. Errors: NoNewCoverage when S covers nothing
/// outside the current rule set.
double learning_speed(const RuleSetModel& current, const Rule& candidate,
                      const Dataset& ds);

/// Complementary score R(S): learning speed of the hypothetical rule S\M
/// whose cover excludes everything already covered, so no overlap penalty.
/// Errors: NoNewCoverage.
double complementary_score(const RuleSetModel& current, const Rule& candidate,
                           const Dataset& ds);

/// One-split MDL comparison: returns true when modelling `parent` as
/// `child` + `leftout` (two leaves plus the split's code length) is cheaper
/// than keeping the single node, each side costed as per-cover NML bits.
/// With `restrict_to`, all three covers are intersected with it first.
/// Errors: CoverMismatch when child and leftout do not partition parent.
bool mdl_local_test(const Bitset& parent_cover, const Bitset& child_cover,
                    const Bitset& leftout_cover, const std::vector<int>& labels,
                    int n_classes, double l_split_bits,
                    const Bitset* restrict_to = nullptr);

/// All one-literal growth results of `base`: fresh one-sided/indicator
/// literals on unused columns and interval refinements of existing one-sided
/// literals. Zero-coverage candidates are dropped; every candidate records
/// the admissible-value count (K_value) for its column at this step.
std::vector<BeamEntry> generate_candidates(const std::vector<Literal>& base,
                                           const Bitset& base_cover,
                                           const Dataset& ds,
                                           const CutPoints& cuts);

/// Grows a single rule by diverse-patience dual-beam search; returns the
/// all-candidates member with the best learning speed, or nullopt when no
/// admissible candidate exists.
std::optional<Rule> learn_single_rule(const RuleSetModel& current,
                                      const Dataset& ds, const CutPoints& cuts,
                                      const SearchConfig& cfg);

/// Iteratively learns a rule set: keeps adding the rule returned by
/// learn_single_rule while the total MDL score strictly decreases.
RuleSetModel fit(const Dataset& ds, const SearchConfig& cfg);

}  // namespace turs
