// turs - rule set learner CLI. Talks to the library exclusively through the
// C API in turs.h; exit codes: 0 success, 2 usage/validation/I-O error,
// 1 internal error.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "turs.h"

namespace {

struct CommonFitFlags {
  int beam_width = 10;
  int n_cutpoints = 20;
  int k_stop = 3;
  uint64_t seed = 0;
  int max_rules = 0;
  bool no_patience_diversity = false;
  bool no_local_test = false;
  bool aux_rank_complementary = false;
  std::string trace_path;

  void attach(CLI::App* cmd, bool with_local_test_flag = true) {
    // optional key:value config file; explicit flags take precedence
    cmd->set_config("--config", "", "search options as key: value lines");
    cmd->get_config_formatter_base()->valueSeparator(':');
    cmd->add_option("--beam-width", beam_width, "beam width W")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--n-cutpoints", n_cutpoints, "candidate cut points per numeric column")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--k-stop", k_stop, "non-improving growth iterations before stopping")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    cmd->add_option("--max-rules", max_rules, "cap on the number of rules (0 = unlimited)");
    cmd->add_flag("--no-patience-diversity", no_patience_diversity,
                  "disable coverage-ratio beam clustering");
    if (with_local_test_flag)
      cmd->add_flag("--no-local-test", no_local_test, "disable the MDL local test");
    cmd->add_flag("--aux-rank-complementary", aux_rank_complementary,
                  "rank the auxiliary beam by the complementary score at reduction");
    cmd->add_option("--trace", trace_path, "write a JSONL growth trace to this file");
  }

  turs_fit_options options() const {
    turs_fit_options opts;
    turs_fit_options_init(&opts);
    opts.beam_width = beam_width;
    opts.n_cutpoints = n_cutpoints;
    opts.k_stop = k_stop;
    opts.seed = seed;
    opts.max_rules = max_rules;
    opts.patience_diversity = no_patience_diversity ? 0 : 1;
    opts.local_test = no_local_test ? 0 : 1;
    opts.aux_rank_complementary = aux_rank_complementary ? 1 : 0;
    opts.trace_path = trace_path.empty() ? nullptr : trace_path.c_str();
    return opts;
  }
};

int fail(turs_status status) {
  std::fprintf(stderr, "error: %s\n", turs_last_error());
  return status == TURS_ERR_INTERNAL ? 1 : 2;
}

struct DatasetHandle {
  turs_dataset* ptr = nullptr;
  ~DatasetHandle() { turs_dataset_free(ptr); }
};
struct ModelHandle {
  turs_model* ptr = nullptr;
  ~ModelHandle() { turs_model_free(ptr); }
};
struct CString {
  char* ptr = nullptr;
  ~CString() { turs_string_free(ptr); }
};

int cmd_fit(const std::string& data, const std::string& target,
            const std::string& schema, const std::string& out,
            const CommonFitFlags& flags) {
  DatasetHandle ds;
  turs_status st = turs_dataset_load_csv(data.c_str(), target.c_str(),
                                         schema.empty() ? nullptr : schema.c_str(),
                                         &ds.ptr);
  if (st != TURS_OK) return fail(st);

  turs_fit_options opts = flags.options();
  ModelHandle model;
  st = turs_fit(ds.ptr, &opts, &model.ptr);
  if (st != TURS_OK) return fail(st);

  st = turs_model_save(model.ptr, out.c_str());
  if (st != TURS_OK) return fail(st);

  CString text;
  st = turs_model_describe(model.ptr, &text.ptr);
  if (st != TURS_OK) return fail(st);
  std::fputs(text.ptr, stdout);
  std::printf("model written to %s\n", out.c_str());
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data,
                const std::string& out, bool random_pick, uint64_t seed) {
  ModelHandle model;
  turs_status st = turs_model_load(model_path.c_str(), &model.ptr);
  if (st != TURS_OK) return fail(st);
  st = turs_predict_csv(model.ptr, data.c_str(), out.c_str(), random_pick ? 1 : 0,
                        seed);
  if (st != TURS_OK) return fail(st);
  std::printf("predictions written to %s\n", out.c_str());
  return 0;
}

int cmd_cv(const std::string& data, const std::string& target,
           const std::string& schema, int folds, const std::string& out_json,
           const std::string& out_csv, const std::string& folds_out,
           const CommonFitFlags& flags) {
  DatasetHandle ds;
  turs_status st = turs_dataset_load_csv(data.c_str(), target.c_str(),
                                         schema.empty() ? nullptr : schema.c_str(),
                                         &ds.ptr);
  if (st != TURS_OK) return fail(st);

  turs_fit_options opts = flags.options();
  CString summary;
  st = turs_cross_validate(ds.ptr, &opts, folds,
                           out_json.empty() ? nullptr : out_json.c_str(),
                           out_csv.empty() ? nullptr : out_csv.c_str(),
                           folds_out.empty() ? nullptr : folds_out.c_str(),
                           &summary.ptr);
  if (st != TURS_OK) return fail(st);
  std::fputs(summary.ptr, stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"truly unordered probabilistic rule set learner"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "learn a rule set and save the model");
  std::string fit_data, fit_target, fit_schema, fit_out;
  CommonFitFlags fit_flags;
  fit->add_option("--data", fit_data, "training CSV")->required();
  fit->add_option("--target", fit_target, "target column name")->required();
  fit->add_option("--schema", fit_schema, "per-column kind hints file");
  fit->add_option("--out", fit_out, "output model JSON path")->required();
  fit_flags.attach(fit);

  // predict
  auto* predict = app.add_subcommand("predict", "score a feature CSV with a model");
  std::string pr_model, pr_data, pr_out;
  bool pr_random_pick = false;
  uint64_t pr_seed = 0;
  predict->add_option("--model", pr_model, "model JSON path")->required();
  predict->add_option("--data", pr_data, "feature CSV")->required();
  predict->add_option("--out", pr_out, "output CSV path")->required();
  predict->add_flag("--random-pick", pr_random_pick,
                    "resolve overlaps by a uniformly picked covering rule");
  predict->add_option("--seed", pr_seed, "seed for --random-pick");

  // cv
  auto* cv = app.add_subcommand("cv", "stratified cross-validation report");
  std::string cv_data, cv_target, cv_schema, cv_json, cv_csv, cv_folds_out;
  int cv_folds = 5;
  CommonFitFlags cv_flags;
  cv->add_option("--data", cv_data, "CSV path")->required();
  cv->add_option("--target", cv_target, "target column name")->required();
  cv->add_option("--schema", cv_schema, "per-column kind hints file");
  cv->add_option("--folds", cv_folds, "number of folds")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  cv->add_option("--out", cv_json, "metrics report JSON path");
  cv->add_option("--csv", cv_csv, "metrics report CSV path");
  cv->add_option("--folds-out", cv_folds_out, "fold assignment CSV path");
  cv_flags.attach(cv);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "write synthetic ground-truth data");
  int sim_n = 5000;
  uint64_t sim_seed = 0;
  std::string sim_out;
  simulate->add_option("--n", sim_n, "rows")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--seed", sim_seed, "random seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "output CSV path")->required();

  // ablate
  auto* ablate = app.add_subcommand(
      "ablate", "local-test ablation on synthetic data (both arms)");
  int ab_reps = 100, ab_n = 5000;
  std::string ab_out;
  CommonFitFlags ab_flags;
  ablate->add_option("--reps", ab_reps, "repetitions")->check(CLI::PositiveNumber)->capture_default_str();
  ablate->add_option("--n", ab_n, "rows per repetition")->check(CLI::PositiveNumber)->capture_default_str();
  ablate->add_option("--out", ab_out, "results CSV path");
  ab_flags.attach(ablate, /*with_local_test_flag=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (fit->parsed())
      return cmd_fit(fit_data, fit_target, fit_schema, fit_out, fit_flags);
    if (predict->parsed())
      return cmd_predict(pr_model, pr_data, pr_out, pr_random_pick, pr_seed);
    if (cv->parsed())
      return cmd_cv(cv_data, cv_target, cv_schema, cv_folds, cv_json, cv_csv,
                    cv_folds_out, cv_flags);
    if (simulate->parsed()) {
      turs_status st = turs_simulate(sim_n, sim_seed, sim_out.c_str());
      if (st != TURS_OK) return fail(st);
      std::printf("synthetic data written to %s\n", sim_out.c_str());
      return 0;
    }
    if (ablate->parsed()) {
      turs_fit_options opts = ab_flags.options();
      CString summary;
      turs_status st = turs_ablate(ab_reps, ab_n, opts.seed, &opts,
                                   ab_out.empty() ? nullptr : ab_out.c_str(),
                                   &summary.ptr);
      if (st != TURS_OK) return fail(st);
      std::fputs(summary.ptr, stdout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
