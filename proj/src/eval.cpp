#include "turs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "turs/csv.hpp"
#include "turs/threads.hpp"

namespace turs {

double roc_auc_binary(const std::vector<double>& scores,
                      const std::vector<int>& binary_labels) {
  require(scores.size() == binary_labels.size(), ErrorKind::InvalidArgument,
          "roc_auc: scores/labels size mismatch");
  int64_t n_pos = 0, n_neg = 0;
  for (int y : binary_labels) (y != 0 ? n_pos : n_neg)++;
  require(n_pos > 0 && n_neg > 0, ErrorKind::InvalidArgument,
          "SingleClass: both classes must be present");

  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // rank sum of positives with midranks for ties
  double rank_sum_pos = 0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (size_t t = i; t < j; ++t)
      if (binary_labels[order[t]] != 0) rank_sum_pos += midrank;
    i = j;
  }
  double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double macro_ovr_auc(const std::vector<std::vector<double>>& prob_rows,
                     const std::vector<int>& labels, int n_classes) {
  require(n_classes >= 2, ErrorKind::InvalidArgument, "macro_ovr_auc: C < 2");
  double sum = 0;
  std::vector<double> scores(labels.size());
  std::vector<int> one_vs_rest(labels.size());
  for (int c = 0; c < n_classes; ++c) {
    for (size_t i = 0; i < labels.size(); ++i) {
      scores[i] = prob_rows[i][c];
      one_vs_rest[i] = labels[i] == c ? 1 : 0;
    }
    sum += roc_auc_binary(scores, one_vs_rest);
  }
  return sum / n_classes;
}

double model_auc(const RuleSetModel& model,
                 const std::vector<std::vector<double>>& rows,
                 const std::vector<int>& labels) {
  if (model.n_classes() == 2) {
    std::vector<double> scores(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) scores[i] = model.predict(rows[i]).prob[1];
    std::vector<int> pos(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) pos[i] = labels[i] == 1 ? 1 : 0;
    return roc_auc_binary(scores, pos);
  }
  std::vector<std::vector<double>> probs(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) probs[i] = model.predict(rows[i]).prob;
  return macro_ovr_auc(probs, labels, model.n_classes());
}

RandomPickResult evaluate_random_pick(const RuleSetModel& model,
                                      const std::vector<std::vector<double>>& rows,
                                      const std::vector<int>& labels, int n_reps,
                                      uint64_t seed) {
  require(n_reps >= 1, ErrorKind::InvalidArgument, "n_reps must be >= 1");
  RandomPickResult out;
  int64_t overlapped = 0;
  for (const auto& row : rows) {
    int covering = 0;
    for (const auto& rule : model.rules())
      if (rule.matches_row(row) && ++covering >= 2) break;
    if (covering >= 2) ++overlapped;
  }
  out.pct_overlap = rows.empty() ? 0.0 : static_cast<double>(overlapped) / rows.size();

  double auc_sum = 0;
  std::vector<std::vector<double>> probs(rows.size());
  for (int rep = 0; rep < n_reps; ++rep) {
    Rng rng = Rng::derive(seed, "random-pick", static_cast<uint64_t>(rep));
    for (size_t i = 0; i < rows.size(); ++i)
      probs[i] = model.predict_random_pick(rows[i], rng).prob;
    if (model.n_classes() == 2) {
      std::vector<double> scores(rows.size());
      std::vector<int> pos(labels.size());
      for (size_t i = 0; i < rows.size(); ++i) {
        scores[i] = probs[i][1];
        pos[i] = labels[i] == 1 ? 1 : 0;
      }
      auc_sum += roc_auc_binary(scores, pos);
    } else {
      auc_sum += macro_ovr_auc(probs, labels, model.n_classes());
    }
  }
  out.auc_mean = auc_sum / n_reps;
  return out;
}

namespace {

double rule_prob_diff_sum(const RuleSetModel& model,
                          const std::vector<std::vector<double>>& test_rows,
                          const std::vector<int>& test_labels, bool normalized) {
  const int c = model.n_classes();
  double acc = 0;
  double coverage_sum = 0;
  for (const auto& rule : model.rules()) {
    std::vector<int64_t> counts(c, 0);
    for (size_t i = 0; i < test_rows.size(); ++i)
      if (rule.matches_row(test_rows[i])) ++counts[test_labels[i]];
    std::vector<double> q = ml_estimate(counts);  // uniform when empty
    double diff = 0;
    for (int j = 0; j < c; ++j) diff += std::abs(rule.prob[j] - q[j]);
    diff /= c;
    acc += static_cast<double>(rule.coverage) * diff;
    coverage_sum += static_cast<double>(rule.coverage);
  }
  if (normalized) return coverage_sum > 0 ? acc / coverage_sum : 0.0;
  return acc / model.n_rules();
}

}  // namespace

double generalizability_score(const RuleSetModel& model,
                              const std::vector<std::vector<double>>& test_rows,
                              const std::vector<int>& test_labels,
                              bool normalized) {
  require(model.n_rules() > 0, ErrorKind::InvalidArgument,
          "EmptyModel: generalizability needs at least one rule");
  require(!test_rows.empty(), ErrorKind::InvalidArgument,
          "generalizability: empty test set");
  return rule_prob_diff_sum(model, test_rows, test_labels, normalized);
}

int total_literals(const RuleSetModel& model) {
  int total = 0;
  for (const auto& rule : model.rules())
    total += static_cast<int>(rule.literals.size());
  return total;
}

namespace {

std::vector<std::vector<double>> rows_of(const Dataset& ds) {
  std::vector<std::vector<double>> rows(ds.n);
  for (int i = 0; i < ds.n; ++i) rows[i] = ds.row(i);
  return rows;
}

FoldMetrics mean_of(const std::vector<FoldMetrics>& folds) {
  FoldMetrics m;
  const double k = static_cast<double>(folds.size());
  double rules = 0, lits = 0;
  for (const auto& f : folds) {
    m.auc += f.auc / k;
    m.auc_random_pick += f.auc_random_pick / k;
    m.pct_overlap += f.pct_overlap / k;
    m.g_score += f.g_score / k;
    rules += f.n_rules / k;
    lits += f.total_literals / k;
    m.avg_rule_length += f.avg_rule_length / k;
    m.score.nll_bits += f.score.nll_bits / k;
    m.score.regret_bits += f.score.regret_bits / k;
    m.score.model_bits += f.score.model_bits / k;
    m.score.total += f.score.total / k;
  }
  m.n_rules = static_cast<int>(std::lround(rules));
  m.total_literals = static_cast<int>(std::lround(lits));
  return m;
}

nlohmann::ordered_json fold_json(const FoldMetrics& f, double n_rules_exact,
                                 double total_literals_exact) {
  nlohmann::ordered_json j;
  j["auc"] = f.auc;
  j["auc_random_pick"] = f.auc_random_pick;
  j["pct_overlap"] = f.pct_overlap;
  j["g_score"] = f.g_score;
  j["n_rules"] = n_rules_exact;
  j["total_literals"] = total_literals_exact;
  j["avg_rule_length"] = f.avg_rule_length;
  j["nll_bits"] = f.score.nll_bits;
  j["regret_bits"] = f.score.regret_bits;
  j["model_bits"] = f.score.model_bits;
  j["total_bits"] = f.score.total;
  return j;
}

}  // namespace

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json fs = nlohmann::ordered_json::array();
  double rules_mean = 0, lits_mean = 0;
  for (const auto& f : folds) {
    fs.push_back(fold_json(f, f.n_rules, f.total_literals));
    rules_mean += static_cast<double>(f.n_rules) / folds.size();
    lits_mean += static_cast<double>(f.total_literals) / folds.size();
  }
  j["folds"] = fs;
  j["mean"] = fold_json(mean, rules_mean, lits_mean);
  return j.dump(2);
}

std::string MetricsReport::to_csv() const {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"fold", "auc", "auc_random_pick", "pct_overlap", "g_score",
                  "n_rules", "total_literals", "avg_rule_length", "nll_bits",
                  "regret_bits", "model_bits", "total_bits"});
  auto fmt = [](double v) {
    std::ostringstream ss;
    ss.precision(12);
    ss << v;
    return ss.str();
  };
  for (size_t i = 0; i < folds.size(); ++i) {
    const auto& f = folds[i];
    rows.push_back({std::to_string(i), fmt(f.auc), fmt(f.auc_random_pick),
                    fmt(f.pct_overlap), fmt(f.g_score), std::to_string(f.n_rules),
                    std::to_string(f.total_literals), fmt(f.avg_rule_length),
                    fmt(f.score.nll_bits), fmt(f.score.regret_bits),
                    fmt(f.score.model_bits), fmt(f.score.total)});
  }
  const auto& m = mean;
  rows.push_back({"mean", fmt(m.auc), fmt(m.auc_random_pick), fmt(m.pct_overlap),
                  fmt(m.g_score), std::to_string(m.n_rules),
                  std::to_string(m.total_literals), fmt(m.avg_rule_length),
                  fmt(m.score.nll_bits), fmt(m.score.regret_bits),
                  fmt(m.score.model_bits), fmt(m.score.total)});
  std::ostringstream out;
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) {
      if (i) out << ',';
      out << csv::escape_field(r[i]);
    }
    out << '\n';
  }
  return out.str();
}

std::string MetricsReport::to_text() const {
  std::ostringstream out;
  out << "fold  auc      auc_rp   %overlap g        rules literals total_bits\n";
  char buf[160];
  for (size_t i = 0; i < folds.size(); ++i) {
    const auto& f = folds[i];
    std::snprintf(buf, sizeof(buf), "%-5zu %-8.4f %-8.4f %-8.3f %-8.4f %-5d %-8d %.2f\n",
                  i, f.auc, f.auc_random_pick, f.pct_overlap, f.g_score, f.n_rules,
                  f.total_literals, f.score.total);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "mean  %-8.4f %-8.4f %-8.3f %-8.4f %-5d %-8d %.2f\n",
                mean.auc, mean.auc_random_pick, mean.pct_overlap, mean.g_score,
                mean.n_rules, mean.total_literals, mean.score.total);
  out << buf;
  return out.str();
}

MetricsReport cross_validate(const Dataset& ds, const SearchConfig& cfg, int k,
                             uint64_t seed, FoldAssignment* folds_out) {
  FoldAssignment fa = stratified_kfold(ds, k, seed);
  if (folds_out) *folds_out = fa;

  MetricsReport report;
  report.folds.resize(k);
  int workers = thread_count(cfg.n_threads);
  SearchConfig fold_cfg = cfg;
  fold_cfg.trace = nullptr;
  fold_cfg.n_threads = workers > 1 ? 1 : cfg.n_threads;  // parallel at fold level

  parallel_for(k, workers, [&](int f) {
    Dataset train = ds.subset(fa.train_indices(f));
    auto test_idx = fa.test_indices(f);
    std::vector<std::vector<double>> test_rows(test_idx.size());
    std::vector<int> test_labels(test_idx.size());
    for (size_t i = 0; i < test_idx.size(); ++i) {
      test_rows[i] = ds.row(test_idx[i]);
      test_labels[i] = ds.labels[test_idx[i]];
    }

    RuleSetModel model = fit(train, fold_cfg);
    FoldMetrics fm;
    fm.auc = model_auc(model, test_rows, test_labels);
    auto rp = evaluate_random_pick(model, test_rows, test_labels, 10,
                                   Rng::derive(seed, "cv-random-pick", f).next_u64());
    fm.auc_random_pick = rp.auc_mean;
    fm.pct_overlap = rp.pct_overlap;
    fm.g_score = model.n_rules() > 0
                     ? generalizability_score(model, test_rows, test_labels)
                     : 0.0;
    fm.n_rules = model.n_rules();
    fm.total_literals = total_literals(model);
    fm.avg_rule_length =
        model.n_rules() > 0
            ? static_cast<double>(fm.total_literals) / model.n_rules()
            : 0.0;
    fm.score = model.score();
    report.folds[f] = fm;
  });

  report.mean = mean_of(report.folds);
  return report;
}

Dataset simulate_groundtruth(int n, uint64_t seed) {
  require(n >= 1, ErrorKind::InvalidArgument, "simulate: n must be >= 1");
  constexpr int kFeatures = 50;
  Dataset ds;
  ds.n = n;
  ds.d = kFeatures;
  ds.n_classes = 2;
  ds.class_labels = {"0", "1"};
  ds.columns.assign(kFeatures, std::vector<double>(n, 0.0));
  ds.kinds.assign(kFeatures, ColumnKind::Indicator);
  for (int j = 0; j < kFeatures; ++j)
    ds.column_names.push_back("x" + std::to_string(j + 1));

  Rng rng = Rng::derive(seed, "simulation");
  ds.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    bool x1 = rng.bernoulli(0.2);
    ds.columns[0][i] = x1 ? 1.0 : 0.0;
    for (int j = 1; j < kFeatures; ++j) ds.columns[j][i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    double p_y1 = x1 ? 0.7 : 0.95;
    ds.labels[i] = rng.bernoulli(p_y1) ? 1 : 0;
  }
  return ds;
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = ds.column_names;
  header.push_back("y");
  rows.push_back(header);
  auto fmt = [](double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
  };
  for (int i = 0; i < ds.n; ++i) {
    std::vector<std::string> row;
    row.reserve(ds.d + 1);
    for (int j = 0; j < ds.d; ++j) row.push_back(fmt(ds.columns[j][i]));
    row.push_back(ds.class_labels[ds.labels[i]]);
    rows.push_back(std::move(row));
  }
  csv::write_file(path, rows);
}

namespace {

struct RepOutcome {
  double n_rules = 0, rule_length = 0, auc = 0, mdl = 0, prob_diff = 0;
  bool exact_recovery = false;
};

void accumulate(AblationArm& arm, const std::vector<RepOutcome>& reps) {
  const double n = static_cast<double>(reps.size());
  auto mean_sd = [&](auto get, double& mean, double& sd) {
    mean = 0;
    for (const auto& r : reps) mean += get(r) / n;
    double var = 0;
    for (const auto& r : reps) {
      double d = get(r) - mean;
      var += d * d;
    }
    sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  };
  mean_sd([](const RepOutcome& r) { return r.n_rules; }, arm.n_rules_mean, arm.n_rules_sd);
  mean_sd([](const RepOutcome& r) { return r.rule_length; }, arm.rule_length_mean,
          arm.rule_length_sd);
  mean_sd([](const RepOutcome& r) { return r.auc; }, arm.auc_mean, arm.auc_sd);
  mean_sd([](const RepOutcome& r) { return r.mdl; }, arm.mdl_mean, arm.mdl_sd);
  mean_sd([](const RepOutcome& r) { return r.prob_diff; }, arm.prob_diff_mean,
          arm.prob_diff_sd);
  for (const auto& r : reps) arm.exact_recoveries += r.exact_recovery ? 1 : 0;
}

}  // namespace

AblationResult run_ablation(int reps, int n, uint64_t seed,
                            const SearchConfig& base_cfg) {
  require(reps >= 1, ErrorKind::InvalidArgument, "ablate: reps must be >= 1");
  AblationResult result;
  result.reps = reps;

  std::vector<RepOutcome> on(reps), off(reps);
  int workers = thread_count(base_cfg.n_threads);

  parallel_for(reps, workers, [&](int rep) {
    Dataset train = simulate_groundtruth(n, Rng::derive(seed, "ablation-train", rep).next_u64());
    Dataset test = simulate_groundtruth(n, Rng::derive(seed, "ablation-test", rep).next_u64());
    auto test_rows = rows_of(test);

    for (int arm = 0; arm < 2; ++arm) {
      SearchConfig cfg = base_cfg;
      cfg.trace = nullptr;
      cfg.n_threads = 1;
      cfg.local_test = (arm == 0);
      RuleSetModel model = fit(train, cfg);

      RepOutcome o;
      o.n_rules = model.n_rules();
      o.rule_length = model.n_rules() > 0
                          ? static_cast<double>(total_literals(model)) / model.n_rules()
                          : 0.0;
      o.auc = model_auc(model, test_rows, test.labels);
      o.mdl = model.score().total;
      o.prob_diff = model.n_rules() > 0
                        ? generalizability_score(model, test_rows, test.labels,
                                                 /*normalized=*/true)
                        : 0.0;
      o.exact_recovery = model.n_rules() == 1 &&
                         model.rules()[0].literals.size() == 1 &&
                         model.rules()[0].literals[0].column == 0;
      (arm == 0 ? on[rep] : off[rep]) = o;
    }
  });

  accumulate(result.with_local_test, on);
  accumulate(result.without_local_test, off);
  return result;
}

std::string AblationResult::to_text() const {
  std::ostringstream out;
  out << "local_testing  #rules          rule_length     roc_auc         "
         "mdl_score            prob_diff\n";
  char buf[240];
  auto row = [&](const char* name, const AblationArm& a) {
    std::snprintf(buf, sizeof(buf),
                  "%-14s %-6.2f(+-%.2f)  %-6.3f(+-%.2f)  %-6.3f(+-%.3f) "
                  "%-9.3f(+-%.2f)   %.4f(+-%.4f)\n",
                  name, a.n_rules_mean, a.n_rules_sd, a.rule_length_mean,
                  a.rule_length_sd, a.auc_mean, a.auc_sd, a.mdl_mean, a.mdl_sd,
                  a.prob_diff_mean, a.prob_diff_sd);
    out << buf;
  };
  row("no", without_local_test);
  row("yes", with_local_test);
  std::snprintf(buf, sizeof(buf),
                "exact single-rule recoveries with local testing: %d/%d\n",
                with_local_test.exact_recoveries, reps);
  out << buf;
  return out.str();
}

std::string AblationResult::to_csv() const {
  std::ostringstream out;
  out << "local_testing,n_rules_mean,n_rules_sd,rule_length_mean,rule_length_sd,"
         "auc_mean,auc_sd,mdl_mean,mdl_sd,prob_diff_mean,prob_diff_sd,"
         "exact_recoveries\n";
  auto row = [&](const char* name, const AblationArm& a) {
    out.precision(10);
    out << name << ',' << a.n_rules_mean << ',' << a.n_rules_sd << ','
        << a.rule_length_mean << ',' << a.rule_length_sd << ',' << a.auc_mean << ','
        << a.auc_sd << ',' << a.mdl_mean << ',' << a.mdl_sd << ','
        << a.prob_diff_mean << ',' << a.prob_diff_sd << ',' << a.exact_recoveries
        << '\n';
  };
  row("no", without_local_test);
  row("yes", with_local_test);
  return out.str();
}

}  // namespace turs
