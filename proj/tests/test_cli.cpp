// Drives the installed CLI binary end to end. argv[1] is the binary path.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string g_cli;
int g_failures = 0;

void expect(bool cond, const std::string& what) {
  if (!cond) {
    std::cerr << "FAILED: " << what << "\n";
    ++g_failures;
  }
}

int run(const std::string& args, std::string* output = nullptr) {
  std::string cmd = g_cli + " " + args + " >/tmp/turs_cli_out.txt 2>&1";
  int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in("/tmp/turs_cli_out.txt");
    std::ostringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  return WEXITSTATUS(status);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: turs_cli_tests <cli-binary>\n";
    return 1;
  }
  g_cli = argv[1];

  write_file("/tmp/turs_cli_train.csv",
             "x,flag,y\n"
             "1,0,a\n2,0,a\n3,0,a\n4,0,a\n5,0,a\n6,0,a\n7,0,a\n8,0,a\n"
             "11,1,b\n12,1,b\n13,1,b\n14,1,b\n15,1,b\n16,1,b\n17,1,b\n18,1,b\n");

  // usage errors exit with 2
  expect(run("fit --data /tmp/turs_cli_train.csv --out /tmp/m.json") == 2,
         "missing --target exits 2");
  expect(run("fit --data /tmp/turs_cli_train.csv --target y --out /tmp/m.json "
             "--beam-width 0") == 2,
         "--beam-width 0 exits 2");
  expect(run("nonsense") == 2, "unknown subcommand exits 2");
  std::string help_out;
  expect(run("--help", &help_out) == 0, "--help exits 0");
  expect(help_out.find("fit") != std::string::npos, "--help lists subcommands");

  // fit writes a model and prints rules
  std::string fit_out;
  expect(run("fit --data /tmp/turs_cli_train.csv --target y --out "
             "/tmp/turs_cli_model.json --n-cutpoints 5 --seed 1",
             &fit_out) == 0,
         "fit exits 0");
  expect(fit_out.find("IF") != std::string::npos, "fit prints rules");
  expect(fit_out.find("total") != std::string::npos, "fit prints the score");
  expect(read_file("/tmp/turs_cli_model.json").find("turs-model") != std::string::npos,
         "model file written");

  // nonexistent data exits 2 with a one-line diagnostic
  std::string err_out;
  expect(run("fit --data /nope.csv --target y --out /tmp/m.json", &err_out) == 2,
         "unreadable data exits 2");
  expect(err_out.find("error:") != std::string::npos, "diagnostic printed");

  // determinism: same seed, byte-identical model
  expect(run("fit --data /tmp/turs_cli_train.csv --target y --out "
             "/tmp/turs_cli_model2.json --n-cutpoints 5 --seed 1") == 0,
         "second fit exits 0");
  expect(read_file("/tmp/turs_cli_model.json") == read_file("/tmp/turs_cli_model2.json"),
         "fit is byte-identical for the same seed");

  // predict: provenance column, else rows, random-pick equality without overlap
  expect(run("predict --model /tmp/turs_cli_model.json --data "
             "/tmp/turs_cli_train.csv --out /tmp/turs_cli_preds.csv") == 0,
         "predict exits 0");
  std::string preds = read_file("/tmp/turs_cli_preds.csv");
  expect(preds.find("provenance") != std::string::npos, "provenance header present");
  expect(preds.find("rule:") != std::string::npos || preds.find("else") != std::string::npos,
         "provenance values present");

  expect(run("predict --model /tmp/turs_cli_model.json --data "
             "/tmp/turs_cli_train.csv --out /tmp/turs_cli_preds_rp.csv "
             "--random-pick --seed 9") == 0,
         "random-pick predict exits 0");
  // the toy model has disjoint rules, so random-pick output is byte-identical
  expect(read_file("/tmp/turs_cli_preds_rp.csv") == preds,
         "random-pick equals default on a zero-overlap model");

  // simulate: 5000 x 51 shape
  expect(run("simulate --n 120 --seed 7 --out /tmp/turs_cli_sim.csv") == 0,
         "simulate exits 0");
  {
    std::ifstream in("/tmp/turs_cli_sim.csv");
    std::string header;
    std::getline(in, header);
    int commas = 0;
    for (char c : header) commas += c == ',';
    expect(commas == 50, "simulate writes 50 features plus the target");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    expect(rows == 120, "simulate writes n rows");
  }

  // cv: text table with per-fold rows and a mean row
  std::string cv_out;
  expect(run("cv --data /tmp/turs_cli_train.csv --target y --folds 2 --seed 3 "
             "--n-cutpoints 5 --out /tmp/turs_cli_cv.json --csv /tmp/turs_cli_cv.csv "
             "--folds-out /tmp/turs_cli_folds.csv",
             &cv_out) == 0,
         "cv exits 0");
  expect(cv_out.find("mean") != std::string::npos, "cv prints a mean row");
  expect(read_file("/tmp/turs_cli_folds.csv").find("instance_index") != std::string::npos,
         "fold assignment csv written");

  // ablate: two-row table shape
  std::string ab_out;
  expect(run("ablate --reps 2 --n 300 --seed 1", &ab_out) == 0, "ablate exits 0");
  expect(ab_out.find("no") != std::string::npos && ab_out.find("yes") != std::string::npos,
         "ablate prints both arms");

  // key:value config file is equivalent to the same explicit flags
  write_file("/tmp/turs_cli_cfg.txt", "n-cutpoints: 5\nseed: 1\n");
  expect(run("fit --data /tmp/turs_cli_train.csv --target y --out /tmp/m_cfgfile.json "
             "--config /tmp/turs_cli_cfg.txt") == 0,
         "fit with --config exits 0");
  expect(read_file("/tmp/m_cfgfile.json") == read_file("/tmp/turs_cli_model.json"),
         "config file reproduces the flag-based model");

  // trace flag produces a JSONL file
  expect(run("fit --data /tmp/turs_cli_train.csv --target y --out /tmp/m3.json "
             "--n-cutpoints 5 --trace /tmp/turs_cli_trace.jsonl") == 0,
         "fit with --trace exits 0");
  std::string trace = read_file("/tmp/turs_cli_trace.jsonl");
  expect(trace.find("growth_iteration") != std::string::npos,
         "trace contains growth events");
  expect(trace.find("rule_added") != std::string::npos,
         "trace contains rule_added events");

  if (g_failures == 0) {
    std::cout << "cli tests passed\n";
    return 0;
  }
  std::cerr << g_failures << " cli test(s) failed\n";
  return 1;
}
