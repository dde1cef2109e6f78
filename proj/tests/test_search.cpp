#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "turs/eval.hpp"
#include "turs/search.hpp"
#include "turs/threads.hpp"

using namespace turs;
using namespace turs::testing;

TEST_CASE("mdl local test: informative split passes") {
  // parent 10 instances (5,5); child pure (5,0); leftout pure (0,5)
  std::vector<int> labels{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  Bitset parent = Bitset::all_ones(10);
  Bitset child = bitset_of({0, 1, 2, 3, 4}, 10);
  Bitset leftout = bitset_of({5, 6, 7, 8, 9}, 10);
  double l_split = std::log2(1.0) + std::log2(9.0);  // K_col = 1, K_value = 9
  CHECK(mdl_local_test(parent, child, leftout, labels, 2, l_split));
  // and the two sides evaluate as expected from the regret table
  double lhs = 10.0 + regret_table::log2_regret(10, 2);
  double rhs = 2 * regret_table::log2_regret(5, 2) + l_split;
  CHECK(lhs > rhs);
}

TEST_CASE("mdl local test: empty leftout always fails") {
  std::vector<int> labels{0, 1, 0, 1};
  Bitset parent = Bitset::all_ones(4);
  CHECK(!mdl_local_test(parent, parent, Bitset(4), labels, 2, 1.0));
}

TEST_CASE("mdl local test: pure parent never splits") {
  std::vector<int> labels(10, 0);
  labels.push_back(1);  // instance 10 is outside the parent
  Bitset parent(11), child(11), leftout(11);
  for (int i = 0; i < 10; ++i) parent.set(i);
  for (int i = 0; i < 6; ++i) child.set(i);
  for (int i = 6; i < 10; ++i) leftout.set(i);
  CHECK(!mdl_local_test(parent, child, leftout, labels, 2, std::log2(5.0)));
}

TEST_CASE("mdl local test: cover mismatch is rejected") {
  std::vector<int> labels{0, 1, 0, 1};
  Bitset parent = Bitset::all_ones(4);
  Bitset child = bitset_of({0, 1}, 4);
  CHECK_THROWS_WITH_AS(
      mdl_local_test(parent, child, bitset_of({1, 2, 3}, 4), labels, 2, 1.0),
      doctest::Contains("CoverMismatch"), TursError);
  CHECK_THROWS_WITH_AS(
      mdl_local_test(parent, child, bitset_of({2}, 4), labels, 2, 1.0),
      doctest::Contains("CoverMismatch"), TursError);
}

TEST_CASE("mdl local test: restrict_to intersects all three covers") {
  // restricted to the first 10 instances this is the informative split above;
  // unrestricted, the extra mixed tail makes the child/leftout impure
  std::vector<int> labels{0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 0, 1, 0};
  Bitset parent = Bitset::all_ones(14);
  Bitset child = bitset_of({0, 1, 2, 3, 4, 10, 11}, 14);
  Bitset leftout = and_not(parent, child);
  Bitset restrict = bitset_of({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 14);
  double l_split = std::log2(9.0);
  CHECK(mdl_local_test(parent, child, leftout, labels, 2, l_split, &restrict));
}

namespace {

Dataset one_numeric_column(const std::vector<double>& values,
                           const std::vector<int>& labels) {
  Dataset ds;
  ds.n = static_cast<int>(values.size());
  ds.d = 1;
  ds.n_classes = 2;
  ds.kinds = {ColumnKind::Numeric};
  ds.column_names = {"x"};
  ds.class_labels = {"0", "1"};
  ds.columns = {values};
  ds.labels = labels;
  return ds;
}

}  // namespace

TEST_CASE("generate_candidates: one numeric column emits GE and LT per cut") {
  std::vector<double> values;
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    values.push_back(i);
    labels.push_back(i % 2);
  }
  Dataset ds = one_numeric_column(values, labels);
  CutPoints cuts = compute_cutpoints(ds, 20);
  REQUIRE(cuts.per_column[0].size() == 20);
  auto cands = generate_candidates({}, Bitset::all_ones(ds.n), ds, cuts);
  CHECK(cands.size() == 40);  // GE and LT per cut, none empty on the full data
  for (const auto& c : cands) {
    CHECK(c.cover.any());
    CHECK(c.literals.size() == 1);
    CHECK(c.literals[0].k_value == 20);  // all values admissible here
  }
}

TEST_CASE("generate_candidates: column constant on the base cover contributes nothing") {
  // column becomes constant once restricted to x >= 50
  std::vector<double> values;
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    values.push_back(i < 50 ? i : 50.0);
    labels.push_back(i % 2);
  }
  Dataset ds = one_numeric_column(values, labels);
  CutPoints cuts = compute_cutpoints(ds, 10);
  Bitset base(ds.n);
  for (int i = 50; i < 100; ++i) base.set(i);
  // on the base cover every x equals 50: GE(v<=50) covers all, LT(v<=50) none
  auto cands = generate_candidates({}, base, ds, cuts);
  for (const auto& c : cands) {
    CHECK(c.cover.any());
    CHECK((c.cover.count() == base.count()));  // only no-op literals remain
  }
}

TEST_CASE("generate_candidates: GE literal refines only to intervals above it") {
  std::vector<double> values;
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    values.push_back(i);
    labels.push_back(i % 2);
  }
  Dataset ds = one_numeric_column(values, labels);
  CutPoints cuts = compute_cutpoints(ds, 10);
  double v1 = cuts.per_column[0][3];
  std::vector<Literal> base{{0, LiteralForm::Ge, v1, 0, 10}};
  Bitset base_cover = rule_cover(base, ds);
  auto cands = generate_candidates(base, base_cover, ds, cuts);

  // brute-force admissibility: cuts v2 > v1 with nonzero [v1, v2) coverage
  int expected = 0;
  for (double v2 : cuts.per_column[0]) {
    if (v2 <= v1) continue;
    int cover = 0;
    for (int i = 0; i < ds.n; ++i)
      if (values[i] >= v1 && values[i] < v2) ++cover;
    if (cover > 0) ++expected;
  }
  CHECK(static_cast<int>(cands.size()) == expected);
  for (const auto& c : cands) {
    REQUIRE(c.literals.size() == 1);
    CHECK(c.literals[0].form == LiteralForm::Interval);
    CHECK(c.literals[0].value == v1);
    CHECK(c.literals[0].value2 > v1);
    CHECK(c.literals[0].k_value == expected + 1);
  }
}

namespace {

Dataset blockade_dataset() {
  // two numeric columns; existing rule covers the left band, candidate region
  // bottom-right has a very different label distribution
  Dataset ds;
  ds.d = 2;
  ds.n_classes = 2;
  ds.kinds = {ColumnKind::Numeric, ColumnKind::Numeric};
  ds.column_names = {"x1", "x2"};
  ds.class_labels = {"0", "1"};
  ds.columns.resize(2);
  Rng rng(55);
  auto add = [&](double x, double y, int label) {
    ds.columns[0].push_back(x);
    ds.columns[1].push_back(y);
    ds.labels.push_back(label);
  };
  // left band x1 < 1: mostly class 0
  for (int i = 0; i < 60; ++i)
    add(rng.uniform01(), 2 * rng.uniform01(), rng.bernoulli(0.9) ? 0 : 1);
  // right-top x1 >= 1, x2 >= 0.8: mixed
  for (int i = 0; i < 30; ++i)
    add(1 + rng.uniform01(), 0.8 + 1.2 * rng.uniform01(), rng.bernoulli(0.5) ? 0 : 1);
  // right-bottom x1 >= 1, x2 < 0.8: strongly class 1
  for (int i = 0; i < 30; ++i)
    add(1 + rng.uniform01(), 0.8 * rng.uniform01(), rng.bernoulli(0.95) ? 1 : 0);
  ds.n = static_cast<int>(ds.labels.size());
  return ds;
}

}  // namespace

TEST_CASE("learning_speed matches the total-score difference per new instance") {
  Dataset ds = simulate_groundtruth(800, 3);
  RuleSetModel empty = RuleSetModel::empty(ds);
  empty.set_score(total_score(empty, ds));

  Rule cand;
  cand.literals = {{0, LiteralForm::Indicator, 1.0, 0, 1}};
  cand.cover = rule_cover(cand.literals, ds);

  double r = learning_speed(empty, cand, ds);
  RuleSetModel with = empty.with_rule(cand, ds);
  double expect = (empty.score().total - total_score(with, ds).total) /
                  static_cast<double>(cand.cover.count());
  CHECK(r == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("learning_speed rejects candidates with no new coverage") {
  std::vector<int> labels{0, 1, 0, 1, 0, 1};
  Dataset ds = labels_only(labels, 2);
  auto m = RuleSetModel::from_covers({bitset_of({0, 1, 2, 3}, 6)}, ds);
  m.set_score(total_score(m, ds));
  Rule cand;
  cand.cover = bitset_of({1, 2}, 6);  // entirely inside the model's cover
  CHECK_THROWS_WITH_AS(learning_speed(m, cand, ds), doctest::Contains("NoNewCoverage"),
                       TursError);
  CHECK_THROWS_WITH_AS(complementary_score(m, cand, ds),
                       doctest::Contains("NoNewCoverage"), TursError);
}

TEST_CASE("complementary score equals learning speed for disjoint candidates") {
  std::vector<int> labels{0, 0, 1, 1, 0, 1, 1, 1};
  Dataset ds = labels_only(labels, 2);
  auto m = RuleSetModel::from_covers({bitset_of({0, 1}, 8)}, ds);
  m.set_score(total_score(m, ds));
  Rule cand;
  cand.cover = bitset_of({4, 5, 6}, 8);
  CHECK(complementary_score(m, cand, ds) ==
        doctest::Approx(learning_speed(m, cand, ds)).epsilon(1e-12));
}

TEST_CASE("complementary score exceeds learning speed across a bad overlap") {
  Dataset ds = blockade_dataset();
  // existing rule: the left band
  RuleSetModel m = RuleSetModel::empty(ds);
  Rule left;
  left.literals = {{0, LiteralForm::Lt, 1.0, 0, 5}};
  left.cover = rule_cover(left.literals, ds);
  m = m.with_rule(left, ds);
  m.set_score(total_score(m, ds));

  // growing x2 < 0.8 from the empty rule creates a large overlap with the
  // left band whose estimates differ wildly
  Rule cand;
  cand.literals = {{1, LiteralForm::Lt, 0.8, 0, 5}};
  cand.cover = rule_cover(cand.literals, ds);

  double r = learning_speed(m, cand, ds);
  double big_r = complementary_score(m, cand, ds);
  CHECK(big_r > r);
}

TEST_CASE("learn_single_rule recovers the planted indicator on synthetic data") {
  Dataset ds = simulate_groundtruth(3000, 11);
  CutPoints cuts = compute_cutpoints(ds, 20);
  RuleSetModel empty = RuleSetModel::empty(ds);
  empty.set_score(total_score(empty, ds));
  SearchConfig cfg;
  cfg.n_threads = 1;
  auto rule = learn_single_rule(empty, ds, cuts, cfg);
  REQUIRE(rule.has_value());
  REQUIRE(rule->literals.size() == 1);
  CHECK(rule->literals[0].column == 0);
  CHECK(rule->literals[0].form == LiteralForm::Indicator);
  CHECK(rule->literals[0].value == 1.0);
}

TEST_CASE("learn_single_rule returns nothing when no split passes the local test") {
  // single pure-ish class structure: parent already pure per class
  std::vector<double> values;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    values.push_back(i % 7);
    labels.push_back(i % 2);  // labels independent of the only feature
  }
  Dataset ds = one_numeric_column(values, labels);
  CutPoints cuts = compute_cutpoints(ds, 5);
  RuleSetModel empty = RuleSetModel::empty(ds);
  empty.set_score(total_score(empty, ds));
  SearchConfig cfg;
  cfg.n_threads = 1;
  auto rule = learn_single_rule(empty, ds, cuts, cfg);
  CHECK(!rule.has_value());
}

TEST_CASE("fit: trivially separable one-dimensional data yields an improving model") {
  std::vector<double> values;
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) {
    values.push_back(i);
    labels.push_back(i < 30 ? 0 : 1);
  }
  Dataset ds = one_numeric_column(values, labels);
  SearchConfig cfg;
  cfg.n_threads = 1;
  RuleSetModel m = fit(ds, cfg);
  CHECK(m.n_rules() >= 1);
  RuleSetModel empty = RuleSetModel::empty(ds);
  CHECK(m.score().total < total_score(empty, ds).total);
}

TEST_CASE("fit: synthetic ground truth yields exactly one single-literal rule") {
  Dataset ds = simulate_groundtruth(5000, 21);
  SearchConfig cfg;
  cfg.n_threads = 1;
  RuleSetModel m = fit(ds, cfg);
  REQUIRE(m.n_rules() == 1);
  CHECK(m.rules()[0].literals.size() == 1);
  CHECK(m.rules()[0].literals[0].column == 0);
}

TEST_CASE("fit: pure noise labels produce the empty model almost always") {
  int empty_models = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = Rng::derive(seed, "noise-test");
    Dataset ds;
    ds.n = 400;
    ds.d = 10;
    ds.n_classes = 2;
    ds.class_labels = {"0", "1"};
    ds.columns.assign(10, {});
    for (int j = 0; j < 10; ++j) {
      ds.kinds.push_back(ColumnKind::Indicator);
      ds.column_names.push_back("b" + std::to_string(j));
      ds.columns[j].resize(400);
      for (int i = 0; i < 400; ++i) ds.columns[j][i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    for (int i = 0; i < 400; ++i) ds.labels.push_back(rng.bernoulli(0.5) ? 1 : 0);
    SearchConfig cfg;
    cfg.n_threads = 1;
    RuleSetModel m = fit(ds, cfg);
    if (m.n_rules() == 0) ++empty_models;
  }
  CHECK(empty_models >= 18);  // MDL rejects splits under the null
}

TEST_CASE("fit is deterministic and monotone") {
  Dataset ds = load_csv(std::string(TEST_DATA_DIR) + "/iris.csv", "species");
  SearchConfig cfg;
  cfg.seed = 5;
  std::vector<double> totals;
  cfg.trace = [&](const std::string&) {};
  RuleSetModel a = fit(ds, cfg);
  RuleSetModel b = fit(ds, cfg);
  CHECK(a.to_json() == b.to_json());

  // trace carries strictly decreasing totals and nondecreasing coverage for
  // accepted rules
  std::vector<double> accepted;
  std::vector<long> coverages;
  cfg.trace = [&](const std::string& line) {
    if (line.find("rule_added") != std::string::npos) {
      accepted.push_back(std::stod(line.substr(line.rfind(':') + 1)));
      auto cov_pos = line.find("\"coverage\":");
      coverages.push_back(std::stol(line.substr(cov_pos + 11)));
    }
  };
  RuleSetModel c = fit(ds, cfg);
  REQUIRE(accepted.size() == static_cast<size_t>(c.n_rules()));
  double prev = total_score(RuleSetModel::empty(ds), ds).total;
  long prev_cov = 0;
  for (size_t i = 0; i < accepted.size(); ++i) {
    CHECK(accepted[i] < prev);
    prev = accepted[i];
    CHECK(coverages[i] > prev_cov);  // every rule adds at least one instance
    prev_cov = coverages[i];
  }
}

TEST_CASE("fit with diversity disabled still satisfies the contracts") {
  Dataset ds = load_csv(std::string(TEST_DATA_DIR) + "/iris.csv", "species");
  SearchConfig cfg;
  cfg.patience_diversity = false;
  RuleSetModel m = fit(ds, cfg);
  CHECK(m.n_rules() >= 1);
  for (const auto& rule : m.rules()) {
    CHECK(rule.cover.any());
    CHECK(!rule.literals.empty());
  }
  CHECK(m.score().total < total_score(RuleSetModel::empty(ds), ds).total);
}

TEST_CASE("fit respects max_rules") {
  Dataset ds = load_csv(std::string(TEST_DATA_DIR) + "/iris.csv", "species");
  SearchConfig cfg;
  cfg.max_rules = 1;
  RuleSetModel m = fit(ds, cfg);
  CHECK(m.n_rules() <= 1);
}

TEST_CASE("beams respect the width bound and cluster range at iteration boundaries") {
  Dataset ds = load_csv(std::string(TEST_DATA_DIR) + "/iris.csv", "species");
  SearchConfig cfg;
  cfg.beam_width = 4;
  size_t max_beam = 0, max_aux = 0;
  bool clusters_ok = true;
  cfg.trace = [&](const std::string& line) {
    if (line.find("growth_iteration") == std::string::npos) return;
    // count beam entries and validate their cluster indices
    size_t entries = 0, pos = 0;
    while ((pos = line.find("\"cluster\":", pos)) != std::string::npos) {
      pos += 10;
      int cluster = std::stoi(line.substr(pos));
      clusters_ok = clusters_ok && cluster >= 1 && cluster <= 4;
      ++entries;
    }
    max_beam = std::max(max_beam, entries);
    auto aux_pos = line.find("\"aux_beam_size\":");
    if (aux_pos != std::string::npos)
      max_aux = std::max(max_aux, static_cast<size_t>(
                                      std::stoul(line.substr(aux_pos + 16))));
  };
  fit(ds, cfg);
  CHECK(max_beam >= 1);
  CHECK(max_beam <= 4);
  CHECK(max_aux <= 4);
  CHECK(clusters_ok);
}

TEST_CASE("TURS_THREADS caps the worker count") {
  setenv("TURS_THREADS", "3", 1);
  CHECK(thread_count(0) == 3);
  CHECK(thread_count(2) == 2);  // explicit request wins
  unsetenv("TURS_THREADS");
  CHECK(thread_count(5) == 5);
}

TEST_CASE("parallel candidate evaluation does not change the result") {
  Dataset ds = simulate_groundtruth(1200, 9);
  SearchConfig one, four;
  one.n_threads = 1;
  four.n_threads = 4;
  CHECK(fit(ds, one).to_json() == fit(ds, four).to_json());
}

TEST_CASE("fit handles four-class targets") {
  // four bands on one numeric column
  Dataset ds;
  ds.n = 120;
  ds.d = 1;
  ds.n_classes = 4;
  ds.kinds = {ColumnKind::Numeric};
  ds.column_names = {"x"};
  ds.class_labels = {"a", "b", "c", "d"};
  ds.columns.resize(1);
  Rng rng(67);
  for (int i = 0; i < 120; ++i) {
    ds.columns[0].push_back(i + rng.uniform01());
    ds.labels.push_back(i / 30);
  }
  SearchConfig cfg;
  cfg.n_threads = 1;
  RuleSetModel m = fit(ds, cfg);
  CHECK(m.n_rules() >= 2);
  CHECK(m.score().total < total_score(RuleSetModel::empty(ds), ds).total);

  std::vector<std::vector<double>> rows;
  for (int i = 0; i < ds.n; ++i) rows.push_back(ds.row(i));
  CHECK(model_auc(m, rows, ds.labels) > 0.95);
}

TEST_CASE("search config validation") {
  SearchConfig cfg;
  cfg.beam_width = 0;
  CHECK_THROWS_AS(cfg.validate(), TursError);
  SearchConfig cfg2;
  cfg2.k_stop = 0;
  CHECK_THROWS_AS(cfg2.validate(), TursError);
}
