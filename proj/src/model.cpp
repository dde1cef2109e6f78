#include "turs/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace turs {

bool literal_matches(const Literal& l, const std::vector<double>& row) {
  require(l.column >= 0 && l.column < static_cast<int>(row.size()),
          ErrorKind::InvalidArgument, "literal column out of range");
  return l.matches(row[l.column]);
}

std::vector<double> ml_estimate(const std::vector<int64_t>& counts) {
  int64_t total = 0;
  for (int64_t c : counts) {
    require(c >= 0, ErrorKind::InvalidArgument, "ml_estimate: negative count");
    total += c;
  }
  std::vector<double> p(counts.size());
  if (total == 0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(counts.size()));
  } else {
    for (size_t j = 0; j < counts.size(); ++j)
      p[j] = static_cast<double>(counts[j]) / static_cast<double>(total);
  }
  return p;
}

Bitset rule_cover(const std::vector<Literal>& literals, const Dataset& ds) {
  Bitset cover = Bitset::all_ones(ds.n);
  for (const auto& l : literals) {
    require(l.column >= 0 && l.column < ds.d, ErrorKind::InvalidArgument,
            "literal column out of range");
    const auto& col = ds.columns[l.column];
    for (int i = 0; i < ds.n; ++i)
      if (cover.test(i) && !l.matches(col[i])) cover.reset(i);
  }
  return cover;
}

std::string PredictedDistribution::provenance() const {
  switch (source) {
    case Source::ElseRule: return "else";
    case Source::SingleRule: return "rule:" + std::to_string(rule_indices[0]);
    case Source::Union: {
      std::string s = "union:";
      for (size_t i = 0; i < rule_indices.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(rule_indices[i]);
      }
      return s;
    }
  }
  return "else";
}

namespace {

std::vector<int64_t> class_counts_of(const Bitset& cover, const Dataset& ds) {
  std::vector<int64_t> counts(ds.n_classes, 0);
  cover.for_each_set([&](int i) { ++counts[ds.labels[i]]; });
  return counts;
}

std::vector<double> neg_log2(const std::vector<double>& p) {
  std::vector<double> out(p.size());
  for (size_t i = 0; i < p.size(); ++i)
    out[i] = p[i] > 0 ? -std::log2(p[i]) : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

RuleSetModel RuleSetModel::empty(const Dataset& ds) {
  RuleSetModel m;
  m.n_classes_ = ds.n_classes;
  m.n_columns_ = ds.d;
  m.column_names_ = ds.column_names;
  m.column_kinds_ = ds.kinds;
  m.class_labels_ = ds.class_labels;
  m.rebuild(ds);
  return m;
}

RuleSetModel RuleSetModel::from_covers(const std::vector<Bitset>& covers,
                                       const Dataset& ds) {
  RuleSetModel m = empty(ds);
  for (const auto& cover : covers) {
    Rule r;
    r.cover = cover;
    m.rules_.push_back(std::move(r));
  }
  m.rebuild(ds);
  return m;
}

RuleSetModel RuleSetModel::with_rule(Rule rule, const Dataset& ds) const {
  RuleSetModel m = *this;
  m.rules_.push_back(std::move(rule));
  m.rebuild(ds);
  return m;
}

void RuleSetModel::rebuild(const Dataset& ds) {
  const int n = ds.n;
  const int k = n_rules();

  for (auto& rule : rules_) {
    rule.class_counts = class_counts_of(rule.cover, ds);
    rule.coverage = rule.cover.count();
    rule.prob = ml_estimate(rule.class_counts);
    if (!rule.literals.empty()) {
      std::vector<LiteralCode> codes;
      codes.reserve(rule.literals.size());
      for (const auto& l : rule.literals) codes.push_back(l.code());
      rule.code_bits = rule_code_length(codes, n_columns_);
    }
  }

  covered_ = Bitset(n);
  for (const auto& rule : rules_) covered_ |= rule.cover;
  else_cover_ = and_not(Bitset::all_ones(n), covered_);
  else_counts_ = class_counts_of(else_cover_, ds);
  else_prob_ = ml_estimate(else_counts_);

  // Signature partition: each instance keyed by the exact set of covering
  // rules. std::map keeps group order deterministic.
  std::map<std::vector<int>, Bitset> members;
  std::vector<std::vector<int>> sig_of_row(n);
  for (int r = 0; r < k; ++r)
    rules_[r].cover.for_each_set([&](int i) { sig_of_row[i].push_back(r); });
  for (int i = 0; i < n; ++i) {
    auto it = members.find(sig_of_row[i]);
    if (it == members.end()) it = members.emplace(sig_of_row[i], Bitset(n)).first;
    it->second.set(i);
  }
  if (members.find({}) == members.end()) members.emplace(std::vector<int>{}, Bitset(n));

  groups_.clear();
  instance_group_.assign(n, -1);
  for (auto& [sig, mem] : members) {
    SignatureGroup g;
    g.sig = sig;
    g.members = mem;
    g.counts = class_counts_of(mem, ds);
    if (sig.empty()) {
      g.dist = else_prob_;
    } else if (sig.size() == 1) {
      g.dist = rules_[sig[0]].prob;
    } else {
      g.union_cover = Bitset(n);
      for (int r : sig) g.union_cover |= rules_[r].cover;
      g.union_counts = class_counts_of(g.union_cover, ds);
      g.dist = ml_estimate(g.union_counts);
    }
    g.neg_log2_dist = neg_log2(g.dist);
    int gi = static_cast<int>(groups_.size());
    g.members.for_each_set([&](int i) { instance_group_[i] = gi; });
    groups_.push_back(std::move(g));
  }
}

std::vector<double> RuleSetModel::union_estimate(
    const std::vector<int>& rule_indices) const {
  require(!rule_indices.empty(), ErrorKind::InvalidArgument,
          "EmptyIndexSet: union over no rules");
  std::vector<int> wanted = rule_indices;
  std::sort(wanted.begin(), wanted.end());
  for (int r : wanted)
    require(r >= 0 && r < n_rules(), ErrorKind::InvalidArgument,
            "union_estimate: rule index out of range");
  // Counts over the union of covers = sum over signature groups whose
  // signature intersects I. Exact, and computable without the training data.
  std::vector<int64_t> counts(n_classes_, 0);
  for (const auto& g : groups_) {
    if (g.sig.empty()) continue;
    bool hit = false;
    for (int r : g.sig) {
      if (std::binary_search(wanted.begin(), wanted.end(), r)) {
        hit = true;
        break;
      }
    }
    if (hit)
      for (int c = 0; c < n_classes_; ++c) counts[c] += g.counts[c];
  }
  return ml_estimate(counts);
}

double RuleSetModel::log_likelihood_bits(const Dataset& ds) const {
  require(ds.n == static_cast<int>(instance_group_.size()), ErrorKind::InvalidArgument,
          "model was not built against this dataset");
  double bits = 0;
  for (int i = 0; i < ds.n; ++i)
    bits += groups_[instance_group_[i]].neg_log2_dist[ds.labels[i]];
  return bits;
}

std::vector<int> RuleSetModel::covering_rules(const std::vector<double>& row) const {
  require(static_cast<int>(row.size()) == n_columns_, ErrorKind::InvalidArgument,
          "DimensionMismatch: row has " + std::to_string(row.size()) +
              " columns, model expects " + std::to_string(n_columns_));
  std::vector<int> covering;
  for (int r = 0; r < n_rules(); ++r)
    if (rules_[r].matches_row(row)) covering.push_back(r);
  return covering;
}

PredictedDistribution RuleSetModel::predict(const std::vector<double>& row) const {
  PredictedDistribution out;
  out.rule_indices = covering_rules(row);
  if (out.rule_indices.empty()) {
    out.source = PredictedDistribution::Source::ElseRule;
    out.prob = else_prob_;
  } else if (out.rule_indices.size() == 1) {
    out.source = PredictedDistribution::Source::SingleRule;
    out.prob = rules_[out.rule_indices[0]].prob;
  } else {
    out.source = PredictedDistribution::Source::Union;
    out.prob = union_estimate(out.rule_indices);
  }
  return out;
}

PredictedDistribution RuleSetModel::predict_random_pick(
    const std::vector<double>& row, Rng& rng) const {
  auto covering = covering_rules(row);
  if (covering.size() < 2) return predict(row);
  int pick = covering[rng.uniform_below(covering.size())];
  PredictedDistribution out;
  out.source = PredictedDistribution::Source::SingleRule;
  out.rule_indices = {pick};
  out.prob = rules_[pick].prob;
  return out;
}

ScoreBreakdown total_score(const RuleSetModel& model, const Dataset& ds) {
  ScoreBreakdown s;
  s.nll_bits = model.log_likelihood_bits(ds);
  // Per-rule regret over full covers; overlapping instances count repeatedly.
  // The else rule is included.
  double regret = 0;
  for (const auto& rule : model.rules())
    regret += regret_table::log2_regret(static_cast<int>(rule.coverage),
                                        model.n_classes());
  regret += regret_table::log2_regret(
      static_cast<int>(model.else_cover().count()), model.n_classes());
  s.regret_bits = regret;
  std::vector<double> lengths;
  lengths.reserve(model.n_rules());
  for (const auto& rule : model.rules()) lengths.push_back(rule.code_bits);
  s.model_bits = model_code_length(lengths);
  s.total = s.nll_bits + s.regret_bits + s.model_bits;
  return s;
}

namespace {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::string format_rule(const Rule& rule, const std::vector<std::string>& names) {
  std::ostringstream out;
  out << "IF ";
  if (rule.literals.empty()) {
    out << "TRUE";
  } else {
    for (size_t i = 0; i < rule.literals.size(); ++i) {
      const auto& l = rule.literals[i];
      if (i) out << " AND ";
      const std::string& name = names[l.column];
      switch (l.form) {
        case LiteralForm::Ge: out << name << " >= " << format_value(l.value); break;
        case LiteralForm::Lt: out << name << " < " << format_value(l.value); break;
        case LiteralForm::Interval:
          out << format_value(l.value) << " <= " << name << " < "
              << format_value(l.value2);
          break;
        case LiteralForm::Indicator:
          out << name << " == " << (l.value != 0 ? 1 : 0);
          break;
      }
    }
  }
  out << " THEN p = [";
  for (size_t c = 0; c < rule.prob.size(); ++c) {
    if (c) out << ", ";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", rule.prob[c]);
    out << buf;
  }
  out << "] (n=" << rule.coverage << ")";
  return out.str();
}

std::string RuleSetModel::describe() const {
  std::ostringstream out;
  out << "rules: " << n_rules() << "\n";
  for (const auto& rule : rules_) out << format_rule(rule, column_names_) << "\n";
  out << "else: p = [";
  for (size_t c = 0; c < else_prob_.size(); ++c) {
    if (c) out << ", ";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", else_prob_[c]);
    out << buf;
  }
  int64_t else_n = 0;
  for (int64_t c : else_counts_) else_n += c;
  out << "] (n=" << else_n << ")\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "nll    %.6f bits\nregret %.6f bits\nmodel  %.6f bits\ntotal  %.6f bits\n",
                score_.nll_bits, score_.regret_bits, score_.model_bits, score_.total);
  out << buf;
  return out.str();
}

// ---------------------------------------------------------------------------
// JSON serialization. Versioned schema; probabilities are always derived from
// the stored integer counts, never stored themselves.

namespace {

using ordered_json = nlohmann::ordered_json;

const char* form_name(LiteralForm f) {
  switch (f) {
    case LiteralForm::Ge: return "ge";
    case LiteralForm::Lt: return "lt";
    case LiteralForm::Interval: return "interval";
    case LiteralForm::Indicator: return "indicator";
  }
  return "ge";
}

LiteralForm form_from_name(const std::string& s) {
  if (s == "ge") return LiteralForm::Ge;
  if (s == "lt") return LiteralForm::Lt;
  if (s == "interval") return LiteralForm::Interval;
  if (s == "indicator") return LiteralForm::Indicator;
  throw TursError(ErrorKind::Format, "model json: unknown literal form '" + s + "'");
}

}  // namespace

std::string RuleSetModel::to_json() const {
  ordered_json j;
  j["format"] = "turs-model";
  j["version"] = 1;
  j["n_classes"] = n_classes_;
  j["class_labels"] = class_labels_;
  ordered_json cols = ordered_json::array();
  for (int c = 0; c < n_columns_; ++c) {
    ordered_json col;
    col["name"] = column_names_[c];
    col["kind"] = column_kinds_[c] == ColumnKind::Numeric ? "numeric" : "indicator";
    cols.push_back(col);
  }
  j["columns"] = cols;

  ordered_json rules = ordered_json::array();
  for (const auto& rule : rules_) {
    ordered_json r;
    ordered_json lits = ordered_json::array();
    for (const auto& l : rule.literals) {
      ordered_json lj;
      lj["column"] = l.column;
      lj["form"] = form_name(l.form);
      switch (l.form) {
        case LiteralForm::Interval:
          lj["low"] = l.value;
          lj["high"] = l.value2;
          break;
        case LiteralForm::Indicator:
          lj["value"] = (l.value != 0 ? 1 : 0);
          break;
        default:
          lj["value"] = l.value;
      }
      lj["k_value"] = l.k_value;
      lits.push_back(lj);
    }
    r["literals"] = lits;
    r["class_counts"] = rule.class_counts;
    rules.push_back(r);
  }
  j["rules"] = rules;
  j["else_class_counts"] = else_counts_;

  ordered_json sigs = ordered_json::array();
  for (const auto& g : groups_) {
    ordered_json s;
    s["rules"] = g.sig;
    s["class_counts"] = g.counts;
    sigs.push_back(s);
  }
  j["signatures"] = sigs;

  ordered_json sc;
  sc["nll_bits"] = score_.nll_bits;
  sc["regret_bits"] = score_.regret_bits;
  sc["model_bits"] = score_.model_bits;
  sc["total_bits"] = score_.total;
  j["score"] = sc;
  return j.dump(2);
}

RuleSetModel RuleSetModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw TursError(ErrorKind::Format, std::string("model json: ") + e.what());
  }
  try {
    require(j.at("format") == "turs-model", ErrorKind::Format,
            "model json: wrong format tag");
    require(j.at("version") == 1, ErrorKind::Format,
            "model json: unsupported version");

    RuleSetModel m;
    m.n_classes_ = j.at("n_classes").get<int>();
    require(m.n_classes_ >= 2, ErrorKind::Format, "model json: n_classes < 2");
    m.class_labels_ = j.at("class_labels").get<std::vector<std::string>>();
    for (const auto& col : j.at("columns")) {
      m.column_names_.push_back(col.at("name").get<std::string>());
      std::string kind = col.at("kind").get<std::string>();
      require(kind == "numeric" || kind == "indicator", ErrorKind::Format,
              "model json: unknown column kind");
      m.column_kinds_.push_back(kind == "numeric" ? ColumnKind::Numeric
                                                  : ColumnKind::Indicator);
    }
    m.n_columns_ = static_cast<int>(m.column_names_.size());

    for (const auto& rj : j.at("rules")) {
      Rule r;
      for (const auto& lj : rj.at("literals")) {
        Literal l;
        l.column = lj.at("column").get<int>();
        require(l.column >= 0 && l.column < m.n_columns_, ErrorKind::Format,
                "model json: literal column out of range");
        l.form = form_from_name(lj.at("form").get<std::string>());
        if (l.form == LiteralForm::Interval) {
          l.value = lj.at("low").get<double>();
          l.value2 = lj.at("high").get<double>();
          require(l.value < l.value2, ErrorKind::Format,
                  "model json: interval low must be < high");
        } else {
          l.value = lj.at("value").get<double>();
        }
        l.k_value = lj.at("k_value").get<int>();
        r.literals.push_back(l);
      }
      r.class_counts = rj.at("class_counts").get<std::vector<int64_t>>();
      require(static_cast<int>(r.class_counts.size()) == m.n_classes_,
              ErrorKind::Format, "model json: class_counts length mismatch");
      r.coverage = 0;
      for (int64_t c : r.class_counts) r.coverage += c;
      r.prob = ml_estimate(r.class_counts);
      if (!r.literals.empty()) {
        std::vector<LiteralCode> codes;
        for (const auto& l : r.literals) codes.push_back(l.code());
        r.code_bits = rule_code_length(codes, m.n_columns_);
      }
      m.rules_.push_back(std::move(r));
    }

    m.else_counts_ = j.at("else_class_counts").get<std::vector<int64_t>>();
    require(static_cast<int>(m.else_counts_.size()) == m.n_classes_,
            ErrorKind::Format, "model json: else_class_counts length mismatch");
    m.else_prob_ = ml_estimate(m.else_counts_);

    for (const auto& sj : j.at("signatures")) {
      SignatureGroup g;
      g.sig = sj.at("rules").get<std::vector<int>>();
      require(std::is_sorted(g.sig.begin(), g.sig.end()), ErrorKind::Format,
              "model json: signature indices must be sorted");
      for (int r : g.sig)
        require(r >= 0 && r < m.n_rules(), ErrorKind::Format,
                "model json: signature rule index out of range");
      g.counts = sj.at("class_counts").get<std::vector<int64_t>>();
      require(static_cast<int>(g.counts.size()) == m.n_classes_, ErrorKind::Format,
              "model json: signature class_counts length mismatch");
      m.groups_.push_back(std::move(g));
    }

    const auto& sc = j.at("score");
    m.score_.nll_bits = sc.at("nll_bits").get<double>();
    m.score_.regret_bits = sc.at("regret_bits").get<double>();
    m.score_.model_bits = sc.at("model_bits").get<double>();
    m.score_.total = sc.at("total_bits").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw TursError(ErrorKind::Format, std::string("model json: ") + e.what());
  }
}

}  // namespace turs
