#include "turs/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include <json.hpp>

#include "turs/threads.hpp"

namespace turs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void count_by_class(const Bitset& cover, const std::vector<Bitset>& class_masks,
                    std::vector<int64_t>& out) {
  const int c = static_cast<int>(class_masks.size());
  int64_t total = 0;
  for (int j = 0; j + 1 < c; ++j) {
    out[j] = Bitset::count_and(cover, class_masks[j]);
    total += out[j];
  }
  out[c - 1] = cover.count() - total;
}

/// -log2 ML likelihood of a label multiset under its own frequencies.
double nll_bits_of_counts(const std::vector<int64_t>& counts) {
  int64_t total = 0;
  for (int64_t c : counts) total += c;
  if (total == 0) return 0.0;
  double bits = 0;
  const double log2_total = std::log2(static_cast<double>(total));
  for (int64_t c : counts)
    if (c > 0) bits += static_cast<double>(c) * (log2_total - std::log2(static_cast<double>(c)));
  return bits;
}

/// Precomputed per-fit lookup state shared by all growth iterations.
struct SearchContext {
  const Dataset* ds = nullptr;
  const CutPoints* cuts = nullptr;
  std::vector<Bitset> class_masks;
  std::vector<std::vector<Bitset>> ge_masks;  // numeric columns: x >= cut
  std::vector<Bitset> one_masks;              // indicator columns: x == 1
  std::vector<double> log2_regret;            // dense, sizes 0..n
  Bitset all_rows;
  double log2_n_columns = 0;
  int n_threads = 1;

  static SearchContext build(const Dataset& ds, const CutPoints& cuts,
                             const SearchConfig& cfg) {
    SearchContext ctx;
    ctx.ds = &ds;
    ctx.cuts = &cuts;
    ctx.all_rows = Bitset::all_ones(ds.n);
    ctx.class_masks.assign(ds.n_classes, Bitset(ds.n));
    for (int i = 0; i < ds.n; ++i) ctx.class_masks[ds.labels[i]].set(i);
    ctx.ge_masks.resize(ds.d);
    ctx.one_masks.resize(ds.d);
    for (int j = 0; j < ds.d; ++j) {
      if (ds.kinds[j] == ColumnKind::Indicator) {
        Bitset m(ds.n);
        for (int i = 0; i < ds.n; ++i)
          if (ds.columns[j][i] == 1.0) m.set(i);
        ctx.one_masks[j] = std::move(m);
      } else {
        const auto& cc = cuts.per_column[j];
        ctx.ge_masks[j].reserve(cc.size());
        for (double v : cc) {
          Bitset m(ds.n);
          for (int i = 0; i < ds.n; ++i)
            if (ds.columns[j][i] >= v) m.set(i);
          ctx.ge_masks[j].push_back(std::move(m));
        }
      }
    }
    ctx.log2_regret = regret_table::dense_log2(ds.n, ds.n_classes);
    ctx.log2_n_columns = std::log2(static_cast<double>(ds.d));
    ctx.n_threads = thread_count(cfg.n_threads);
    return ctx;
  }

  double nml_bits(const std::vector<int64_t>& counts, int64_t size) const {
    return nll_bits_of_counts(counts) + log2_regret[size];
  }
};

/// Incremental MDL-score deltas for adding one candidate rule to a fixed
/// model. Only signature groups intersecting the candidate's cover change.
class DeltaScorer {
 public:
  DeltaScorer(const RuleSetModel& model, const SearchContext& ctx)
      : model_(model), ctx_(ctx), n_classes_(model.n_classes()) {
    const int k = model.n_rules();
    delta_model_const_ = rissanen_int_code(k + 2) - rissanen_int_code(k + 1) -
                         std::log2(static_cast<double>(k + 1));
    else_n_ = 0;
    for (int64_t c : model.else_counts()) else_n_ += c;
    for (const auto& g : model.groups()) {
      if (g.sig.empty())
        group_union_.push_back(nullptr);
      else if (g.sig.size() == 1)
        group_union_.push_back(&model.rules()[g.sig[0]].cover);
      else
        group_union_.push_back(&g.union_cover);
    }
  }

  /// Score change from adding a rule with the given cover and code length.
  double delta_add(const Bitset& cover, int64_t cover_n,
                   const std::vector<int64_t>& cover_counts,
                   double rule_code_bits) const {
    double delta_nll = 0;
    int64_t moved_else = 0;
    std::vector<int64_t> moved(n_classes_);
    std::vector<int64_t> union_counts(n_classes_);
    const auto& groups = model_.groups();
    for (size_t gi = 0; gi < groups.size(); ++gi) {
      const auto& g = groups[gi];
      if (!Bitset::intersects(g.members, cover)) continue;
      int64_t moved_n = 0;
      for (int c = 0; c + 1 < n_classes_; ++c) {
        moved[c] = Bitset::count_and3(g.members, cover, ctx_.class_masks[c]);
        moved_n += moved[c];
      }
      int64_t all_moved = Bitset::count_and(g.members, cover);
      moved[n_classes_ - 1] = all_moved - moved_n;
      moved_n = all_moved;
      if (moved_n == 0) continue;

      double old_bits = 0;
      for (int c = 0; c < n_classes_; ++c)
        if (moved[c] > 0) old_bits += moved[c] * g.neg_log2_dist[c];

      double new_bits = 0;
      if (g.sig.empty()) {
        moved_else = moved_n;
        // moved instances now form the new rule's singleton signature
        const double log2_cover_n = std::log2(static_cast<double>(cover_n));
        for (int c = 0; c < n_classes_; ++c)
          if (moved[c] > 0)
            new_bits += moved[c] * (log2_cover_n -
                                    std::log2(static_cast<double>(cover_counts[c])));
        // the remaining else instances switch to the shrunk else estimate
        std::vector<int64_t> rem(n_classes_);
        int64_t rem_n = 0;
        for (int c = 0; c < n_classes_; ++c) {
          rem[c] = model_.else_counts()[c] - moved[c];
          rem_n += rem[c];
        }
        if (rem_n > 0) {
          const double log2_rem_n = std::log2(static_cast<double>(rem_n));
          double old_rem = 0, new_rem = 0;
          for (int c = 0; c < n_classes_; ++c)
            if (rem[c] > 0) {
              old_rem += rem[c] * g.neg_log2_dist[c];
              new_rem += rem[c] * (log2_rem_n - std::log2(static_cast<double>(rem[c])));
            }
          delta_nll += new_rem - old_rem;
        }
      } else {
        // group J becomes J + {new}; distribution over union(J) | cover
        Bitset u = *group_union_[gi] | cover;
        int64_t u_n = 0;
        for (int c = 0; c + 1 < n_classes_; ++c) {
          union_counts[c] = Bitset::count_and(u, ctx_.class_masks[c]);
          u_n += union_counts[c];
        }
        int64_t u_total = u.count();
        union_counts[n_classes_ - 1] = u_total - u_n;
        const double log2_u = std::log2(static_cast<double>(u_total));
        for (int c = 0; c < n_classes_; ++c)
          if (moved[c] > 0)
            new_bits += moved[c] * (log2_u -
                                    std::log2(static_cast<double>(union_counts[c])));
      }
      delta_nll += new_bits - old_bits;
    }

    double delta_regret = ctx_.log2_regret[cover_n] +
                          ctx_.log2_regret[else_n_ - moved_else] -
                          ctx_.log2_regret[else_n_];
    return delta_nll + delta_regret + delta_model_const_ + rule_code_bits;
  }

  /// Score change from adding the hypothetical rule S\M: same literals, cover
  /// restricted to previously uncovered instances, so no union groups form.
  double delta_add_hypothetical(const std::vector<int64_t>& new_counts,
                                int64_t new_n, double rule_code_bits) const {
    double old_bits = 0;
    std::vector<int64_t> rem(n_classes_);
    int64_t rem_n = 0;
    const auto& else_counts = model_.else_counts();
    const auto& else_neg_log2 = else_group_neg_log2();
    for (int c = 0; c < n_classes_; ++c) {
      rem[c] = else_counts[c] - new_counts[c];
      rem_n += rem[c];
      if (else_counts[c] > 0) old_bits += else_counts[c] * else_neg_log2[c];
    }
    double new_bits = nll_bits_of_counts(rem);
    {
      const double log2_new_n = std::log2(static_cast<double>(new_n));
      for (int c = 0; c < n_classes_; ++c)
        if (new_counts[c] > 0)
          new_bits += new_counts[c] *
                      (log2_new_n - std::log2(static_cast<double>(new_counts[c])));
    }
    double delta_nll = new_bits - old_bits;
    double delta_regret = ctx_.log2_regret[new_n] + ctx_.log2_regret[else_n_ - new_n] -
                          ctx_.log2_regret[else_n_];
    return delta_nll + delta_regret + delta_model_const_ + rule_code_bits;
  }

  int64_t else_n() const { return else_n_; }

 private:
  const std::vector<double>& else_group_neg_log2() const {
    for (const auto& g : model_.groups())
      if (g.sig.empty()) return g.neg_log2_dist;
    throw TursError(ErrorKind::Internal, "model has no else group");
  }

  const RuleSetModel& model_;
  const SearchContext& ctx_;
  int n_classes_;
  double delta_model_const_;
  int64_t else_n_;
  std::vector<const Bitset*> group_union_;
};

/// Candidate as evaluated inside one growth iteration.
struct ScoredCandidate {
  BeamEntry entry;
  Literal last_literal;
  int split_k_value = 1;        // admissible values for the split (L_split)
  bool split_indicator = false;
  bool in_main = false;
  bool in_aux = false;
  double rule_code_bits = 0;
};

/// Deterministic preference order: score, then new coverage, then the most
/// recent literal. Scores within `tol` count as tied.
struct TieBreak {
  double tol;
  static std::tuple<int, int, double, double> literal_key(const Literal& l) {
    return {l.column, static_cast<int>(l.form), l.value, l.value2};
  }
  bool better(double sa, const ScoredCandidate& a, double sb,
              const ScoredCandidate& b) const {
    if (sa > sb + tol) return true;
    if (sb > sa + tol) return false;
    if (a.entry.new_coverage != b.entry.new_coverage)
      return a.entry.new_coverage > b.entry.new_coverage;
    return literal_key(a.last_literal) < literal_key(b.last_literal);
  }
};

int coverage_cluster(int64_t cover, int64_t base_cover, int beam_width) {
  // ratio in [(w-1)/W, w/W) -> cluster w; ratio 1 lands in cluster W
  int64_t w = (cover * beam_width) / base_cover + 1;
  return static_cast<int>(std::min<int64_t>(w, beam_width));
}

double rule_bits_for(const std::vector<Literal>& literals, int n_columns) {
  std::vector<LiteralCode> codes;
  codes.reserve(literals.size());
  for (const auto& l : literals) codes.push_back(l.code());
  return rule_code_length(codes, n_columns);
}

/// Generates all one-literal growth results of `base` using the mask cache.
std::vector<ScoredCandidate> generate_with_context(
    const std::vector<Literal>& base, const Bitset& base_cover,
    const SearchContext& ctx) {
  const Dataset& ds = *ctx.ds;
  std::vector<ScoredCandidate> out;
  std::vector<int> literal_on_column(ds.d, -1);
  for (size_t li = 0; li < base.size(); ++li) literal_on_column[base[li].column] = static_cast<int>(li);

  auto emit = [&](Literal lit, int replace_index, Bitset cover, int split_k,
                  bool split_ind) {
    ScoredCandidate sc;
    sc.entry.literals = base;
    if (replace_index >= 0)
      sc.entry.literals[replace_index] = lit;
    else
      sc.entry.literals.push_back(lit);
    sc.entry.coverage = cover.count();
    sc.entry.cover = std::move(cover);
    sc.last_literal = lit;
    sc.split_k_value = split_k;
    sc.split_indicator = split_ind;
    out.push_back(std::move(sc));
  };

  for (int j = 0; j < ds.d; ++j) {
    int li = literal_on_column[j];
    if (li < 0) {
      if (ds.kinds[j] == ColumnKind::Indicator) {
        Bitset c1 = base_cover & ctx.one_masks[j];
        Bitset c0 = and_not(base_cover, ctx.one_masks[j]);
        if (c1.any())
          emit({j, LiteralForm::Indicator, 1.0, 0, 1}, -1, std::move(c1), 1, true);
        if (c0.any())
          emit({j, LiteralForm::Indicator, 0.0, 0, 1}, -1, std::move(c0), 1, true);
      } else {
        const auto& cc = ctx.cuts->per_column[j];
        std::vector<Bitset> ge_cov(cc.size()), lt_cov(cc.size());
        int k_ge = 0, k_lt = 0;
        for (size_t i = 0; i < cc.size(); ++i) {
          ge_cov[i] = base_cover & ctx.ge_masks[j][i];
          if (ge_cov[i].any()) ++k_ge;
          lt_cov[i] = and_not(base_cover, ctx.ge_masks[j][i]);
          if (lt_cov[i].any()) ++k_lt;
        }
        for (size_t i = 0; i < cc.size(); ++i) {
          if (ge_cov[i].any())
            emit({j, LiteralForm::Ge, cc[i], 0, k_ge}, -1, std::move(ge_cov[i]), k_ge,
                 false);
          if (lt_cov[i].any())
            emit({j, LiteralForm::Lt, cc[i], 0, k_lt}, -1, std::move(lt_cov[i]), k_lt,
                 false);
        }
      }
    } else {
      // refine an existing one-sided literal into an interval
      const Literal& lit = base[li];
      const auto& cc = ctx.cuts->per_column[j];
      if (lit.form == LiteralForm::Ge) {
        std::vector<std::pair<double, Bitset>> refs;
        for (size_t i = 0; i < cc.size(); ++i) {
          if (cc[i] <= lit.value) continue;
          Bitset c = and_not(base_cover, ctx.ge_masks[j][i]);  // x < v2
          if (c.any()) refs.emplace_back(cc[i], std::move(c));
        }
        int k2 = static_cast<int>(refs.size());
        for (auto& [v2, c] : refs)
          emit({j, LiteralForm::Interval, lit.value, v2, k2 + 1}, li, std::move(c),
               k2, false);
      } else if (lit.form == LiteralForm::Lt) {
        std::vector<std::pair<double, Bitset>> refs;
        for (size_t i = 0; i < cc.size(); ++i) {
          if (cc[i] >= lit.value) continue;
          Bitset c = base_cover & ctx.ge_masks[j][i];  // x >= v1
          if (c.any()) refs.emplace_back(cc[i], std::move(c));
        }
        int k2 = static_cast<int>(refs.size());
        for (auto& [v1, c] : refs)
          emit({j, LiteralForm::Interval, v1, lit.value, k2 + 1}, li, std::move(c),
               k2, false);
      }
      // intervals and indicators are terminal for their column
    }
  }
  return out;
}

/// Optimized one-split local test over counts already restricted as needed.
bool local_test_from_counts(const std::vector<int64_t>& parent,
                            const std::vector<int64_t>& child,
                            const std::vector<int64_t>& leftout,
                            const SearchContext& ctx, double l_split) {
  int64_t pn = 0, cn = 0, ln = 0;
  for (int64_t v : parent) pn += v;
  for (int64_t v : child) cn += v;
  for (int64_t v : leftout) ln += v;
  double lhs = ctx.nml_bits(parent, pn);
  double rhs = ctx.nml_bits(child, cn) + ctx.nml_bits(leftout, ln) + l_split;
  return lhs > rhs;
}

struct IterationOutputs {
  std::vector<ScoredCandidate> main_champions;  // per base, per cluster
  std::vector<ScoredCandidate> aux_champions;
};

std::string literals_to_string(const std::vector<Literal>& lits,
                               const std::vector<std::string>& names) {
  Rule r;
  r.literals = lits;
  return format_rule(r, names);
}

/// Canonical (full-rebuild) score with `rule` added; used by the public score
/// functions and the incremental-path cross-check.
double canonical_total_with(const RuleSetModel& model, const Dataset& ds,
                            Rule rule) {
  RuleSetModel next = model.with_rule(std::move(rule), ds);
  return total_score(next, ds).total;
}

Rule finalize_rule(const BeamEntry& entry, const SearchContext& ctx) {
  Rule r;
  r.literals = entry.literals;
  r.cover = entry.cover;
  r.coverage = entry.coverage;
  r.class_counts.assign(ctx.ds->n_classes, 0);
  count_by_class(r.cover, ctx.class_masks, r.class_counts);
  r.prob = ml_estimate(r.class_counts);
  r.code_bits = rule_bits_for(r.literals, ctx.ds->d);
  return r;
}

std::optional<Rule> learn_single_rule_impl(const RuleSetModel& current,
                                           const Dataset& ds,
                                           const SearchContext& ctx,
                                           const SearchConfig& cfg,
                                           int fit_iteration) {
  const int w = cfg.beam_width;
  const int n_classes = ds.n_classes;
  const TieBreak tie{cfg.score_tolerance};
  DeltaScorer scorer(current, ctx);
  const double current_total = current.score().total;

  std::vector<ScoredCandidate> all_candidates;
  // Bases for the next growth iteration: start from the empty rule.
  std::vector<ScoredCandidate> bases(1);
  bases[0].entry.cover = ctx.all_rows;
  bases[0].entry.coverage = ds.n;
  bases[0].entry.new_coverage = scorer.else_n();

  double prev_best_r = kNegInf, prev_best_big_r = kNegInf;
  int fail_streak = 0;

  for (int iteration = 0;; ++iteration) {
    std::vector<IterationOutputs> per_base(bases.size());

    parallel_for(static_cast<int>(bases.size()), ctx.n_threads, [&](int bi) {
      const auto& base = bases[bi];
      const int64_t base_cov = base.entry.coverage;
      const int64_t base_restricted =
          Bitset::count_and_not(base.entry.cover, current.covered());
      std::vector<int64_t> parent_counts(n_classes), child_counts(n_classes),
          leftout_counts(n_classes);
      count_by_class(base.entry.cover, ctx.class_masks, parent_counts);
      std::vector<int64_t> parent_restricted(n_classes);
      Bitset base_rest_cover = and_not(base.entry.cover, current.covered());
      count_by_class(base_rest_cover, ctx.class_masks, parent_restricted);

      auto cands = generate_with_context(base.entry.literals, base.entry.cover, ctx);

      // champions: diversity on -> one per cluster; off -> global top-W
      std::vector<std::optional<ScoredCandidate>> main_by_cluster(w + 1),
          aux_by_cluster(w + 1);
      std::vector<ScoredCandidate> main_pool, aux_pool;

      for (auto& cand : cands) {
        Bitset new_cover = and_not(cand.entry.cover, current.covered());
        cand.entry.new_coverage = new_cover.count();
        if (cand.entry.new_coverage == 0) continue;

        const double l_split =
            ctx.log2_n_columns +
            (cand.split_indicator ? 1.0
                                  : std::log2(static_cast<double>(cand.split_k_value)));

        count_by_class(cand.entry.cover, ctx.class_masks, child_counts);
        bool pass_main = true, pass_aux = true;
        if (cfg.local_test) {
          for (int c = 0; c < n_classes; ++c)
            leftout_counts[c] = parent_counts[c] - child_counts[c];
          pass_main = local_test_from_counts(parent_counts, child_counts,
                                             leftout_counts, ctx, l_split);
        }
        std::vector<int64_t> child_restricted(n_classes);
        count_by_class(new_cover, ctx.class_masks, child_restricted);
        if (base_restricted == 0) {
          pass_aux = false;
        } else if (cfg.local_test) {
          for (int c = 0; c < n_classes; ++c)
            leftout_counts[c] = parent_restricted[c] - child_restricted[c];
          pass_aux = local_test_from_counts(parent_restricted, child_restricted,
                                            leftout_counts, ctx, l_split);
        }
        if (!pass_main && !pass_aux) continue;

        cand.rule_code_bits = rule_bits_for(cand.entry.literals, ds.d);
        double delta = scorer.delta_add(cand.entry.cover, cand.entry.coverage,
                                        child_counts, cand.rule_code_bits);
        cand.entry.r_score = -delta / static_cast<double>(cand.entry.new_coverage);
        cand.entry.big_r_score = kNegInf;
        if (pass_aux) {
          double delta_aux = scorer.delta_add_hypothetical(
              child_restricted, cand.entry.new_coverage, cand.rule_code_bits);
          cand.entry.big_r_score =
              -delta_aux / static_cast<double>(cand.entry.new_coverage);
        }
        if (cfg.full_rebuild_check) {
          Rule probe = finalize_rule(cand.entry, ctx);
          double canonical = canonical_total_with(current, ds, std::move(probe));
          double incremental = current_total + delta;
          if (std::abs(canonical - incremental) > 1e-9)
            throw TursError(ErrorKind::Internal,
                            "incremental score disagrees with full rebuild by " +
                                std::to_string(canonical - incremental) + " bits");
        }

        cand.entry.cluster =
            cfg.patience_diversity ? coverage_cluster(cand.entry.coverage, base_cov, w)
                                   : 1;
        cand.in_main = pass_main;
        if (pass_aux) {
          cand.entry.cluster_aux =
              cfg.patience_diversity
                  ? coverage_cluster(cand.entry.new_coverage, base_restricted, w)
                  : 1;
          cand.in_aux = true;
        }

        if (cand.in_main) {
          if (cfg.patience_diversity) {
            auto& slot = main_by_cluster[cand.entry.cluster];
            if (!slot || tie.better(cand.entry.r_score, cand, slot->entry.r_score, *slot))
              slot = cand;
          } else {
            main_pool.push_back(cand);
          }
        }
        if (cand.in_aux) {
          if (cfg.patience_diversity) {
            auto& slot = aux_by_cluster[cand.entry.cluster_aux];
            if (!slot ||
                tie.better(cand.entry.big_r_score, cand, slot->entry.big_r_score, *slot))
              slot = cand;
          } else {
            aux_pool.push_back(cand);
          }
        }
      }

      auto& out = per_base[bi];
      if (cfg.patience_diversity) {
        for (int cl = 1; cl <= w; ++cl) {
          if (main_by_cluster[cl]) out.main_champions.push_back(std::move(*main_by_cluster[cl]));
          if (aux_by_cluster[cl]) out.aux_champions.push_back(std::move(*aux_by_cluster[cl]));
        }
      } else {
        // top-W by score, selected by repeated extraction to honor the
        // tolerance-based tie-break
        auto take_top = [&](std::vector<ScoredCandidate>& pool, bool by_big_r,
                            std::vector<ScoredCandidate>& dst) {
          std::vector<char> used(pool.size(), 0);
          for (int taken = 0; taken < w && taken < static_cast<int>(pool.size());
               ++taken) {
            int best = -1;
            for (size_t i = 0; i < pool.size(); ++i) {
              if (used[i]) continue;
              double si = by_big_r ? pool[i].entry.big_r_score : pool[i].entry.r_score;
              if (best < 0 ||
                  tie.better(si, pool[i],
                             by_big_r ? pool[best].entry.big_r_score
                                      : pool[best].entry.r_score,
                             pool[best]))
                best = static_cast<int>(i);
            }
            if (best < 0) break;
            used[best] = 1;
            dst.push_back(pool[best]);
          }
        };
        take_top(main_pool, false, out.main_champions);
        take_top(aux_pool, true, out.aux_champions);
      }
    });

    // Deterministic merge in base order.
    std::vector<ScoredCandidate> beam, aux_beam;
    for (auto& pb : per_base) {
      for (auto& c : pb.main_champions) beam.push_back(std::move(c));
      for (auto& c : pb.aux_champions) aux_beam.push_back(std::move(c));
    }

    double best_r = kNegInf, best_big_r = kNegInf;
    for (const auto& c : beam) best_r = std::max(best_r, c.entry.r_score);
    for (const auto& c : aux_beam) best_big_r = std::max(best_big_r, c.entry.big_r_score);

    const bool no_improvement =
        best_r <= prev_best_r + cfg.score_tolerance &&
        best_big_r <= prev_best_big_r + cfg.score_tolerance;
    fail_streak = no_improvement ? fail_streak + 1 : 0;
    const bool stop = fail_streak >= cfg.k_stop || (beam.empty() && aux_beam.empty());

    // Reduce each beam to at most W entries for the next iteration.
    auto reduce = [&](std::vector<ScoredCandidate>& in, bool aux) {
      std::vector<ScoredCandidate> out;
      auto score_of = [&](const ScoredCandidate& c) {
        if (!aux) return c.entry.r_score;
        return cfg.aux_rank_by_complementary ? c.entry.big_r_score : c.entry.r_score;
      };
      if (cfg.patience_diversity) {
        std::vector<int> champion(w + 1, -1);
        for (size_t i = 0; i < in.size(); ++i) {
          int cl = aux ? in[i].entry.cluster_aux : in[i].entry.cluster;
          int& slot = champion[cl];
          if (slot < 0 ||
              tie.better(score_of(in[i]), in[i], score_of(in[slot]), in[slot]))
            slot = static_cast<int>(i);
        }
        for (int cl = 1; cl <= w; ++cl)
          if (champion[cl] >= 0) out.push_back(in[champion[cl]]);
      } else {
        std::vector<char> used(in.size(), 0);
        for (int taken = 0; taken < w && taken < static_cast<int>(in.size()); ++taken) {
          int best = -1;
          for (size_t i = 0; i < in.size(); ++i) {
            if (used[i]) continue;
            if (best < 0 ||
                tie.better(score_of(in[i]), in[i], score_of(in[best]), in[best]))
              best = static_cast<int>(i);
          }
          if (best < 0) break;
          used[best] = 1;
          out.push_back(in[best]);
        }
      }
      return out;
    };

    std::vector<ScoredCandidate> reduced_main, reduced_aux;
    if (!stop) {
      reduced_main = reduce(beam, false);
      reduced_aux = reduce(aux_beam, true);
    }

    if (cfg.trace) {
      nlohmann::ordered_json j;
      j["event"] = "growth_iteration";
      j["rule_index"] = fit_iteration;
      j["iteration"] = iteration;
      j["model_coverage"] = current.covered().count();
      j["model_total_bits"] = current.score().total;
      j["best_r"] = best_r == kNegInf ? nullptr : nlohmann::ordered_json(best_r);
      j["best_R"] = best_big_r == kNegInf ? nullptr : nlohmann::ordered_json(best_big_r);
      j["stopped"] = stop;
      nlohmann::ordered_json beams = nlohmann::ordered_json::array();
      for (const auto& c : reduced_main) {
        nlohmann::ordered_json e;
        e["rule"] = literals_to_string(c.entry.literals, ds.column_names);
        e["r"] = c.entry.r_score;
        e["coverage"] = c.entry.coverage;
        e["cluster"] = c.entry.cluster;
        beams.push_back(e);
      }
      j["beam"] = beams;
      j["aux_beam_size"] = reduced_aux.size();
      cfg.trace(j.dump());
    }

    if (stop) break;

    for (const auto& c : reduced_main) all_candidates.push_back(c);

    // rules_for_next_iter = main beam + auxiliary beam, deduplicated on the
    // condition
    bases.clear();
    std::set<std::vector<std::tuple<int, int, double, double>>> seen;
    auto push_base = [&](const ScoredCandidate& c) {
      std::vector<std::tuple<int, int, double, double>> key;
      key.reserve(c.entry.literals.size());
      for (const auto& l : c.entry.literals) key.push_back(TieBreak::literal_key(l));
      std::sort(key.begin(), key.end());
      if (seen.insert(std::move(key)).second) bases.push_back(c);
    };
    for (const auto& c : reduced_main) push_base(c);
    for (const auto& c : reduced_aux) push_base(c);

    prev_best_r = best_r;
    prev_best_big_r = best_big_r;
  }

  if (all_candidates.empty()) return std::nullopt;
  int best = 0;
  for (size_t i = 1; i < all_candidates.size(); ++i)
    if (tie.better(all_candidates[i].entry.r_score, all_candidates[i],
                   all_candidates[best].entry.r_score, all_candidates[best]))
      best = static_cast<int>(i);
  return finalize_rule(all_candidates[best].entry, ctx);
}

}  // namespace

void SearchConfig::validate() const {
  require(beam_width >= 1, ErrorKind::InvalidArgument, "beam_width must be >= 1");
  require(n_cutpoints >= 1, ErrorKind::InvalidArgument, "n_cutpoints must be >= 1");
  require(k_stop >= 1, ErrorKind::InvalidArgument, "k_stop must be >= 1");
  require(max_rules >= 0, ErrorKind::InvalidArgument, "max_rules must be >= 0");
  require(score_tolerance >= 0, ErrorKind::InvalidArgument,
          "score_tolerance must be >= 0");
}

double learning_speed(const RuleSetModel& current, const Rule& candidate,
                      const Dataset& ds) {
  Rule rule = candidate;
  if (!rule.literals.empty()) rule.cover = rule_cover(rule.literals, ds);
  int64_t new_n = Bitset::count_and_not(rule.cover, current.covered());
  require(new_n > 0, ErrorKind::InvalidArgument,
          "NoNewCoverage: candidate covers no new instance");
  double new_total = canonical_total_with(current, ds, std::move(rule));
  return (current.score().total - new_total) / static_cast<double>(new_n);
}

double complementary_score(const RuleSetModel& current, const Rule& candidate,
                           const Dataset& ds) {
  Rule rule = candidate;
  if (!rule.literals.empty()) rule.cover = rule_cover(rule.literals, ds);
  rule.cover.subtract(current.covered());
  int64_t new_n = rule.cover.count();
  require(new_n > 0, ErrorKind::InvalidArgument,
          "NoNewCoverage: candidate covers no new instance");
  double new_total = canonical_total_with(current, ds, std::move(rule));
  return (current.score().total - new_total) / static_cast<double>(new_n);
}

bool mdl_local_test(const Bitset& parent_cover, const Bitset& child_cover,
                    const Bitset& leftout_cover, const std::vector<int>& labels,
                    int n_classes, double l_split_bits, const Bitset* restrict_to) {
  Bitset parent = parent_cover, child = child_cover, leftout = leftout_cover;
  if (restrict_to) {
    parent &= *restrict_to;
    child &= *restrict_to;
    leftout &= *restrict_to;
  }
  require(!Bitset::intersects(child, leftout), ErrorKind::InvalidArgument,
          "CoverMismatch: child and leftout overlap");
  require((child | leftout) == parent, ErrorKind::InvalidArgument,
          "CoverMismatch: child and leftout do not partition parent");

  auto counts_of = [&](const Bitset& b) {
    std::vector<int64_t> counts(n_classes, 0);
    b.for_each_set([&](int i) { ++counts[labels[i]]; });
    return counts;
  };
  auto nml = [&](const std::vector<int64_t>& counts) {
    int64_t n = 0;
    for (int64_t c : counts) n += c;
    return nll_bits_of_counts(counts) +
           regret_table::log2_regret(static_cast<int>(n), n_classes);
  };
  double lhs = nml(counts_of(parent));
  double rhs = nml(counts_of(child)) + nml(counts_of(leftout)) + l_split_bits;
  return lhs > rhs;
}

std::vector<BeamEntry> generate_candidates(const std::vector<Literal>& base,
                                           const Bitset& base_cover,
                                           const Dataset& ds,
                                           const CutPoints& cuts) {
  SearchConfig cfg;
  cfg.n_threads = 1;
  SearchContext ctx = SearchContext::build(ds, cuts, cfg);
  auto scored = generate_with_context(base, base_cover, ctx);
  std::vector<BeamEntry> out;
  out.reserve(scored.size());
  for (auto& sc : scored) out.push_back(std::move(sc.entry));
  return out;
}

std::optional<Rule> learn_single_rule(const RuleSetModel& current,
                                      const Dataset& ds, const CutPoints& cuts,
                                      const SearchConfig& cfg) {
  cfg.validate();
  SearchContext ctx = SearchContext::build(ds, cuts, cfg);
  return learn_single_rule_impl(current, ds, ctx, cfg, current.n_rules());
}

RuleSetModel fit(const Dataset& ds, const SearchConfig& cfg) {
  cfg.validate();
  CutPoints cuts = compute_cutpoints(ds, cfg.n_cutpoints);
  SearchContext ctx = SearchContext::build(ds, cuts, cfg);

  RuleSetModel model = RuleSetModel::empty(ds);
  model.set_score(total_score(model, ds));

  for (;;) {
    if (cfg.max_rules > 0 && model.n_rules() >= cfg.max_rules) break;
    auto rule = learn_single_rule_impl(model, ds, ctx, cfg, model.n_rules());
    if (!rule) break;
    RuleSetModel next = model.with_rule(std::move(*rule), ds);
    next.set_score(total_score(next, ds));
    if (next.score().total < model.score().total - cfg.score_tolerance) {
      model = std::move(next);
      if (cfg.trace) {
        nlohmann::ordered_json j;
        j["event"] = "rule_added";
        j["n_rules"] = model.n_rules();
        j["rule"] = format_rule(model.rules().back(), ds.column_names);
        j["coverage"] = model.covered().count();
        j["total_bits"] = model.score().total;
        cfg.trace(j.dump());
      }
    } else {
      break;
    }
  }
  return model;
}

}  // namespace turs
