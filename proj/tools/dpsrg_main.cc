// Copyright 2026 The DPSRG Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver. Links only the C interface.
//
//   dpsrg factorize --workload ones --batches 16 --out ones_b16.strategy
//   dpsrg run config.txt [--set key=value ...]
//   dpsrg verify [--criterion N] [--no-figure]
//   dpsrg report results/ [more/ ...] [--all]
//
// Exit codes: 0 success, 1 run failures present, 2 invalid spec or usage.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpsrg/dpsrg.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailures = 1;
constexpr int kExitInvalid = 2;

int PrintError(const char* context) {
  std::fprintf(stderr, "dpsrg: %s: %s\n", context, dpsrg_last_error());
  return kExitFailures;
}

void PrintAndFree(char* text) {
  std::fputs(text, stdout);
  dpsrg_string_free(text);
}

struct FactorizeArgs {
  std::string workload = "ones";
  int epochs = 1;
  int batches = 16;
  double gamma = 0.9;
  double decay = 1.0;
  int iterations = 500;
  std::string out;
};

int Factorize(const FactorizeArgs& a) {
  dpsrg_strategy* strategy = nullptr;
  const dpsrg_status s =
      dpsrg_factorize(a.workload.c_str(), a.epochs, a.batches, a.gamma,
                      a.decay, a.iterations, &strategy);
  if (s == DPSRG_INVALID_ARGUMENT) {
    PrintError("factorize");
    return kExitInvalid;
  }
  if (s != DPSRG_OK) return PrintError("factorize");
  std::printf("size=%d\nobjective=%.17g\ntree_objective=%.17g\n"
              "sensitivity=%.17g\nconverged=%s\n",
              dpsrg_strategy_size(strategy), dpsrg_strategy_objective(strategy),
              dpsrg_strategy_tree_objective(strategy),
              dpsrg_strategy_sensitivity(strategy),
              dpsrg_strategy_converged(strategy) ? "true" : "false");
  int code = kExitOk;
  if (!a.out.empty()) {
    if (dpsrg_strategy_save(strategy, a.out.c_str()) != DPSRG_OK) {
      code = PrintError("save");
    } else {
      std::printf("wrote %s\n", a.out.c_str());
    }
  }
  dpsrg_strategy_free(strategy);
  return code;
}

struct RunArgs {
  std::string config;
  std::vector<std::string> overrides;
  bool all_rows = false;
};

int Run(const RunArgs& a) {
  dpsrg_spec* spec = nullptr;
  if (dpsrg_spec_load(a.config.c_str(), &spec) != DPSRG_OK) {
    std::fprintf(stderr, "dpsrg: invalid spec %s: %s\n", a.config.c_str(),
                 dpsrg_last_error());
    return kExitInvalid;
  }
  for (const std::string& kv : a.overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos ||
        dpsrg_spec_set(spec, kv.substr(0, eq).c_str(),
                       kv.substr(eq + 1).c_str()) != DPSRG_OK) {
      std::fprintf(stderr, "dpsrg: invalid override '%s': %s\n", kv.c_str(),
                   eq == std::string::npos ? "expected key=value"
                                           : dpsrg_last_error());
      dpsrg_spec_free(spec);
      return kExitInvalid;
    }
  }
  dpsrg_result* result = nullptr;
  const dpsrg_status s = dpsrg_run(spec, &result);
  if (s != DPSRG_OK) {
    const int code = s == DPSRG_INVALID_ARGUMENT ? kExitInvalid : kExitFailures;
    PrintError("run");
    dpsrg_spec_free(spec);
    return code;
  }
  int code = kExitOk;
  const std::string output = dpsrg_spec_output(spec);
  if (dpsrg_result_write(result, output.c_str(),
                         dpsrg_spec_trajectories(spec)) != DPSRG_OK) {
    code = PrintError("write");
  } else {
    char* report = nullptr;
    if (dpsrg_result_report(result, a.all_rows ? 1 : 0, &report) == DPSRG_OK) {
      PrintAndFree(report);
    }
    std::printf("wrote %s/summary.csv\n", output.c_str());
  }
  const int failures = dpsrg_result_failures(result);
  if (failures > 0) {
    std::fprintf(stderr, "dpsrg: %d run(s) failed; see summary comments\n",
                 failures);
    code = kExitFailures;
  }
  dpsrg_result_free(result);
  dpsrg_spec_free(spec);
  return code;
}

struct VerifyArgs {
  int criterion = 0;
  bool no_figure = false;
  std::string data_dir;
};

int Verify(const VerifyArgs& a) {
  int failures = 0;
  for (int id = 1; id <= dpsrg_num_criteria(); ++id) {
    if (a.criterion != 0 && id != a.criterion) continue;
    int passed = 0, skipped = 0;
    char* line = nullptr;
    if (dpsrg_verify(id, a.data_dir.empty() ? nullptr : a.data_dir.c_str(),
                     a.no_figure ? 0 : 1, &passed, &skipped,
                     &line) != DPSRG_OK) {
      PrintError("verify");
      return kExitInvalid;
    }
    std::printf("%s\n", line);
    std::fflush(stdout);
    dpsrg_string_free(line);
    if (!passed && !skipped) ++failures;
  }
  return failures == 0 ? kExitOk : kExitFailures;
}

struct ReportArgs {
  std::vector<std::string> paths;
  bool all_rows = false;
};

int Report(const ReportArgs& a) {
  std::vector<const char*> paths;
  for (const std::string& p : a.paths) paths.push_back(p.c_str());
  char* text = nullptr;
  if (dpsrg_report(paths.data(), paths.size(), a.all_rows ? 1 : 0, &text) !=
      DPSRG_OK) {
    PrintError("report");
    return kExitInvalid;
  }
  PrintAndFree(text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private stochastic convex optimisation toolkit"};
  app.set_version_flag("--version", std::string(dpsrg_version()));
  app.require_subcommand(1);

  FactorizeArgs fa;
  CLI::App* factorize =
      app.add_subcommand("factorize", "Optimise and cache a strategy matrix");
  factorize->add_option("--workload", fa.workload,
                        "ones, momentum or momentum_decay")
      ->capture_default_str();
  factorize->add_option("--epochs", fa.epochs, "Epochs k")->capture_default_str();
  factorize->add_option("--batches", fa.batches, "Batches per epoch b")
      ->capture_default_str();
  factorize->add_option("--gamma", fa.gamma, "Momentum")->capture_default_str();
  factorize->add_option("--decay", fa.decay, "SRG decay c")->capture_default_str();
  factorize->add_option("--iterations", fa.iterations, "Optimiser iterations")
      ->capture_default_str();
  factorize->add_option("--out", fa.out, "Write the strategy to this file");

  RunArgs ra;
  CLI::App* run = app.add_subcommand("run", "Execute an experiment config");
  run->add_option("config", ra.config, "key=value config file")->required();
  run->add_option("--set", ra.overrides, "Override a config key (key=value)");
  run->add_flag("--all", ra.all_rows, "Print every grid row");

  VerifyArgs va;
  CLI::App* verify = app.add_subcommand("verify", "Run the acceptance suite");
  verify->add_option("--criterion", va.criterion, "Run one criterion (1-10)");
  verify->add_flag("--no-figure", va.no_figure, "Skip the MNIST criterion");
  verify->add_option("--data-dir", va.data_dir,
                     "MNIST directory (default $DPSRG_DATA_DIR)");

  ReportArgs pa;
  CLI::App* report = app.add_subcommand("report", "Summarise result CSVs");
  report->add_option("paths", pa.paths, "summary.csv files or output dirs")
      ->required();
  report->add_flag("--all", pa.all_rows, "Print every grid row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }
  if (*factorize) return Factorize(fa);
  if (*run) return Run(ra);
  if (*verify) return Verify(va);
  return Report(pa);
}
