#include "turs.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "turs/csv.hpp"
#include "turs/dataset.hpp"
#include "turs/eval.hpp"
#include "turs/model.hpp"
#include "turs/search.hpp"

struct turs_dataset {
  turs::Dataset ds;
};

struct turs_model {
  turs::RuleSetModel model;
};

namespace {

thread_local std::string g_last_error;

turs_status status_of(const turs::TursError& e) {
  switch (e.kind()) {
    case turs::ErrorKind::Io: return TURS_ERR_IO;
    case turs::ErrorKind::Format: return TURS_ERR_FORMAT;
    case turs::ErrorKind::InvalidArgument: return TURS_ERR_INVALID_ARGUMENT;
    case turs::ErrorKind::Internal: return TURS_ERR_INTERNAL;
  }
  return TURS_ERR_INTERNAL;
}

template <typename Fn>
turs_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TURS_OK;
  } catch (const turs::TursError& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TURS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return TURS_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

turs::SearchConfig config_of(const turs_fit_options* opts) {
  turs::SearchConfig cfg;
  if (!opts) return cfg;
  cfg.beam_width = opts->beam_width;
  cfg.n_cutpoints = opts->n_cutpoints;
  cfg.k_stop = opts->k_stop;
  cfg.seed = opts->seed;
  cfg.patience_diversity = opts->patience_diversity != 0;
  cfg.local_test = opts->local_test != 0;
  cfg.max_rules = opts->max_rules;
  cfg.aux_rank_by_complementary = opts->aux_rank_complementary != 0;
  cfg.n_threads = opts->n_threads;
  return cfg;
}

void require_arg(bool cond, const char* message) {
  turs::require(cond, turs::ErrorKind::InvalidArgument, message);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  turs::require(out.good(), turs::ErrorKind::Io, "cannot open for writing: " + path);
  out << text;
  turs::require(out.good(), turs::ErrorKind::Io, "write failed: " + path);
}

}  // namespace

extern "C" {

const char* turs_version(void) { return "1.0.0"; }

const char* turs_last_error(void) { return g_last_error.c_str(); }

void turs_string_free(char* s) { std::free(s); }

turs_status turs_dataset_load_csv(const char* path, const char* target,
                                  const char* schema_path, turs_dataset** out) {
  return guarded([&] {
    require_arg(path && target && out, "path, target and out must be non-null");
    std::unique_ptr<turs::Schema> schema;
    if (schema_path) schema = std::make_unique<turs::Schema>(turs::Schema::load(schema_path));
    auto handle = std::make_unique<turs_dataset>();
    handle->ds = turs::load_csv(path, target, schema.get());
    *out = handle.release();
  });
}

void turs_dataset_free(turs_dataset* ds) { delete ds; }

int turs_dataset_num_rows(const turs_dataset* ds) { return ds ? ds->ds.n : 0; }
int turs_dataset_num_columns(const turs_dataset* ds) { return ds ? ds->ds.d : 0; }
int turs_dataset_num_classes(const turs_dataset* ds) {
  return ds ? ds->ds.n_classes : 0;
}

void turs_fit_options_init(turs_fit_options* opts) {
  if (!opts) return;
  opts->beam_width = 10;
  opts->n_cutpoints = 20;
  opts->k_stop = 3;
  opts->seed = 0;
  opts->patience_diversity = 1;
  opts->local_test = 1;
  opts->max_rules = 0;
  opts->aux_rank_complementary = 0;
  opts->n_threads = 0;
  opts->trace_path = nullptr;
}

turs_status turs_fit(const turs_dataset* ds, const turs_fit_options* opts,
                     turs_model** out) {
  return guarded([&] {
    require_arg(ds && out, "dataset and out must be non-null");
    turs::SearchConfig cfg = config_of(opts);
    std::unique_ptr<std::ofstream> trace_file;
    if (opts && opts->trace_path) {
      trace_file = std::make_unique<std::ofstream>(opts->trace_path, std::ios::binary);
      turs::require(trace_file->good(), turs::ErrorKind::Io,
                    std::string("cannot open trace file: ") + opts->trace_path);
      auto* file = trace_file.get();
      cfg.trace = [file](const std::string& line) { (*file) << line << '\n'; };
    }
    auto handle = std::make_unique<turs_model>();
    handle->model = turs::fit(ds->ds, cfg);
    *out = handle.release();
  });
}

void turs_model_free(turs_model* m) { delete m; }

int turs_model_num_rules(const turs_model* m) { return m ? m->model.n_rules() : 0; }
int turs_model_num_classes(const turs_model* m) {
  return m ? m->model.n_classes() : 0;
}
int turs_model_num_columns(const turs_model* m) {
  return m ? m->model.n_columns() : 0;
}
int turs_model_total_literals(const turs_model* m) {
  return m ? turs::total_literals(m->model) : 0;
}

turs_status turs_model_score(const turs_model* m, double* nll_bits,
                             double* regret_bits, double* model_bits,
                             double* total_bits) {
  return guarded([&] {
    require_arg(m != nullptr, "model must be non-null");
    const auto& s = m->model.score();
    if (nll_bits) *nll_bits = s.nll_bits;
    if (regret_bits) *regret_bits = s.regret_bits;
    if (model_bits) *model_bits = s.model_bits;
    if (total_bits) *total_bits = s.total;
  });
}

turs_status turs_model_describe(const turs_model* m, char** out) {
  return guarded([&] {
    require_arg(m && out, "model and out must be non-null");
    *out = dup_string(m->model.describe());
  });
}

turs_status turs_model_save(const turs_model* m, const char* path) {
  return guarded([&] {
    require_arg(m && path, "model and path must be non-null");
    write_text_file(path, m->model.to_json());
  });
}

turs_status turs_model_load(const char* path, turs_model** out) {
  return guarded([&] {
    require_arg(path && out, "path and out must be non-null");
    std::ifstream in(path, std::ios::binary);
    turs::require(in.good(), turs::ErrorKind::Io,
                  std::string("cannot open model file: ") + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto handle = std::make_unique<turs_model>();
    handle->model = turs::RuleSetModel::from_json(ss.str());
    *out = handle.release();
  });
}

turs_status turs_model_to_json(const turs_model* m, char** out) {
  return guarded([&] {
    require_arg(m && out, "model and out must be non-null");
    *out = dup_string(m->model.to_json());
  });
}

turs_status turs_predict(const turs_model* m, const double* row, int n_columns,
                         double* probs, char** provenance) {
  return guarded([&] {
    require_arg(m && row && probs, "model, row and probs must be non-null");
    std::vector<double> r(row, row + n_columns);
    auto pred = m->model.predict(r);
    for (int c = 0; c < m->model.n_classes(); ++c) probs[c] = pred.prob[c];
    if (provenance) *provenance = dup_string(pred.provenance());
  });
}

turs_status turs_predict_csv(const turs_model* m, const char* data_csv,
                             const char* out_csv, int random_pick,
                             uint64_t seed) {
  return guarded([&] {
    require_arg(m && data_csv && out_csv, "model and paths must be non-null");
    const auto& model = m->model;
    auto records = turs::csv::read_file(data_csv);
    turs::require(records.size() >= 2, turs::ErrorKind::Format,
                  "prediction data needs a header and at least one row");
    const auto& header = records[0];

    // Match model columns against the input header: exact name first, then a
    // raw categorical column that re-encodes to "name=level".
    struct ColumnSource {
      int input_index;
      bool indicator_of_level;  // value = (cell == level)
      std::string level;
    };
    std::vector<ColumnSource> sources;
    for (int j = 0; j < model.n_columns(); ++j) {
      const std::string& name = model.column_names()[j];
      int exact = -1;
      for (size_t h = 0; h < header.size(); ++h)
        if (header[h] == name) exact = static_cast<int>(h);
      if (exact >= 0) {
        sources.push_back({exact, false, ""});
        continue;
      }
      auto eq = name.find('=');
      if (eq != std::string::npos) {
        std::string base = name.substr(0, eq);
        std::string level = name.substr(eq + 1);
        int raw = -1;
        for (size_t h = 0; h < header.size(); ++h)
          if (header[h] == base) raw = static_cast<int>(h);
        if (raw >= 0) {
          sources.push_back({raw, true, level});
          continue;
        }
      }
      throw turs::TursError(turs::ErrorKind::Format,
                            "SchemaMismatch: input is missing column '" + name + "'");
    }

    std::vector<std::vector<std::string>> out_rows;
    std::vector<std::string> out_header;
    for (const auto& label : model.class_labels()) out_header.push_back("prob_" + label);
    out_header.push_back("provenance");
    out_rows.push_back(out_header);

    turs::Rng rng = turs::Rng::derive(seed, "random-pick");
    std::vector<double> row(model.n_columns());
    for (size_t i = 1; i < records.size(); ++i) {
      const auto& rec = records[i];
      turs::require(rec.size() == header.size(), turs::ErrorKind::Format,
                    "prediction data row " + std::to_string(i) + " is ragged");
      for (int j = 0; j < model.n_columns(); ++j) {
        const auto& src = sources[j];
        const std::string& cell = rec[src.input_index];
        if (src.indicator_of_level) {
          row[j] = cell == src.level ? 1.0 : 0.0;
        } else {
          try {
            size_t pos = 0;
            row[j] = std::stod(cell, &pos);
            turs::require(pos == cell.size(), turs::ErrorKind::Format, "bad number");
          } catch (...) {
            throw turs::TursError(turs::ErrorKind::Format,
                                  "SchemaMismatch: non-numeric value '" + cell +
                                      "' in column '" + model.column_names()[j] + "'");
          }
        }
      }
      auto pred = random_pick ? model.predict_random_pick(row, rng) : model.predict(row);
      std::vector<std::string> out_row;
      for (double p : pred.prob) {
        std::ostringstream ss;
        ss.precision(17);
        ss << p;
        out_row.push_back(ss.str());
      }
      out_row.push_back(pred.provenance());
      out_rows.push_back(std::move(out_row));
    }
    turs::csv::write_file(out_csv, out_rows);
  });
}

turs_status turs_cross_validate(const turs_dataset* ds,
                                const turs_fit_options* opts, int folds,
                                const char* report_json, const char* report_csv,
                                const char* folds_csv, char** summary) {
  return guarded([&] {
    require_arg(ds != nullptr, "dataset must be non-null");
    turs::SearchConfig cfg = config_of(opts);
    turs::FoldAssignment fa;
    auto report = turs::cross_validate(ds->ds, cfg, folds, cfg.seed, &fa);
    if (report_json) write_text_file(report_json, report.to_json());
    if (report_csv) write_text_file(report_csv, report.to_csv());
    if (folds_csv) fa.write_csv(folds_csv);
    if (summary) *summary = dup_string(report.to_text());
  });
}

turs_status turs_simulate(int n, uint64_t seed, const char* out_csv) {
  return guarded([&] {
    require_arg(out_csv != nullptr, "out_csv must be non-null");
    turs::write_dataset_csv(turs::simulate_groundtruth(n, seed), out_csv);
  });
}

turs_status turs_ablate(int reps, int n, uint64_t seed,
                        const turs_fit_options* opts, const char* out_csv,
                        char** summary) {
  return guarded([&] {
    turs::SearchConfig cfg = config_of(opts);
    auto result = turs::run_ablation(reps, n, seed, cfg);
    if (out_csv) write_text_file(out_csv, result.to_csv());
    if (summary) *summary = dup_string(result.to_text());
  });
}

}  // extern "C"
