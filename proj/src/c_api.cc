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

#include "dpsrg/dpsrg.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "dpsrg/experiment.h"
#include "dpsrg/matrix_mechanism.h"
#include "dpsrg/verification.h"

struct dpsrg_spec {
  dpsrg::ExperimentSpec spec;
};

struct dpsrg_result {
  dpsrg::ExperimentResult result;
};

struct dpsrg_strategy {
  dpsrg::StrategyMatrix strategy;
};

namespace {

thread_local std::string last_error;

dpsrg_status ToCode(absl::StatusCode code) {
  switch (code) {
    case absl::StatusCode::kOk:
      return DPSRG_OK;
    case absl::StatusCode::kInvalidArgument:
      return DPSRG_INVALID_ARGUMENT;
    case absl::StatusCode::kNotFound:
      return DPSRG_NOT_FOUND;
    case absl::StatusCode::kFailedPrecondition:
      return DPSRG_FAILED_PRECONDITION;
    case absl::StatusCode::kOutOfRange:
      return DPSRG_OUT_OF_RANGE;
    case absl::StatusCode::kDataLoss:
      return DPSRG_DATA_LOSS;
    case absl::StatusCode::kUnavailable:
      return DPSRG_UNAVAILABLE;
    default:
      return DPSRG_INTERNAL;
  }
}

dpsrg_status Report(const absl::Status& status) {
  last_error = status.ok() ? std::string() : std::string(status.message());
  return ToCode(status.code());
}

dpsrg_status NullArgument(const char* what) {
  return Report(absl::InvalidArgumentError(absl::StrCat(what, " is null")));
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Runs `body`, translating escaped exceptions into DPSRG_INTERNAL.
template <typename F>
dpsrg_status Guard(F body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return Report(absl::InternalError(e.what()));
  } catch (...) {
    return Report(absl::InternalError("unknown exception"));
  }
}

}  // namespace

extern "C" {

const char* dpsrg_version(void) { return "1.0.0"; }

const char* dpsrg_last_error(void) { return last_error.c_str(); }

void dpsrg_string_free(char* s) { std::free(s); }

dpsrg_status dpsrg_spec_parse(const char* text, dpsrg_spec** out) {
  if (text == nullptr || out == nullptr) return NullArgument("argument");
  return Guard([&] {
    auto spec = dpsrg::ParseExperimentSpec(text);
    if (!spec.ok()) return Report(spec.status());
    *out = new dpsrg_spec{*std::move(spec)};
    return Report(absl::OkStatus());
  });
}

dpsrg_status dpsrg_spec_load(const char* path, dpsrg_spec** out) {
  if (path == nullptr || out == nullptr) return NullArgument("argument");
  return Guard([&] {
    auto spec = dpsrg::LoadExperimentSpec(path);
    if (!spec.ok()) return Report(spec.status());
    *out = new dpsrg_spec{*std::move(spec)};
    return Report(absl::OkStatus());
  });
}

dpsrg_status dpsrg_spec_set(dpsrg_spec* spec, const char* key,
                            const char* value) {
  if (spec == nullptr || key == nullptr || value == nullptr) {
    return NullArgument("argument");
  }
  return Guard([&] {
    // Re-parse the serialised spec with the key replaced.
    const std::string prefix = absl::StrCat(key, "=");
    std::string text;
    for (const std::string& line :
         std::vector<std::string>(absl::StrSplit(
             dpsrg::SerializeExperimentSpec(spec->spec), '\n'))) {
      if (line.rfind(prefix, 0) == 0 || line.empty()) continue;
      absl::StrAppend(&text, line, "\n");
    }
    absl::StrAppend(&text, prefix, value, "\n");
    auto updated = dpsrg::ParseExperimentSpec(text);
    if (!updated.ok()) return Report(updated.status());
    spec->spec = *std::move(updated);
    return Report(absl::OkStatus());
  });
}

dpsrg_status dpsrg_spec_serialize(const dpsrg_spec* spec, char** out) {
  if (spec == nullptr || out == nullptr) return NullArgument("argument");
  *out = CopyString(dpsrg::SerializeExperimentSpec(spec->spec));
  return Report(absl::OkStatus());
}

const char* dpsrg_spec_output(const dpsrg_spec* spec) {
  return spec == nullptr ? "" : spec->spec.output.c_str();
}

int dpsrg_spec_trajectories(const dpsrg_spec* spec) {
  return spec != nullptr && spec->spec.trajectories ? 1 : 0;
}

void dpsrg_spec_free(dpsrg_spec* spec) { delete spec; }

dpsrg_status dpsrg_run(const dpsrg_spec* spec, dpsrg_result** out) {
  if (spec == nullptr || out == nullptr) return NullArgument("argument");
  return Guard([&] {
    auto result = dpsrg::RunExperiment(spec->spec);
    if (!result.ok()) return Report(result.status());
    *out = new dpsrg_result{*std::move(result)};
    return Report(absl::OkStatus());
  });
}

int dpsrg_result_failures(const dpsrg_result* result) {
  return result == nullptr ? 0 : result->result.failures;
}

size_t dpsrg_result_num_rows(const dpsrg_result* result) {
  return result == nullptr ? 0 : result->result.table.rows.size();
}

dpsrg_status dpsrg_result_write(const dpsrg_result* result, const char* dir,
                                int trajectories) {
  if (result == nullptr || dir == nullptr) return NullArgument("argument");
  return Guard([&] {
    return Report(dpsrg::EmitCsv(result->result, dir, trajectories != 0));
  });
}

dpsrg_status dpsrg_result_report(const dpsrg_result* result, int all_rows,
                                 char** out) {
  if (result == nullptr || out == nullptr) return NullArgument("argument");
  *out = CopyString(dpsrg::RenderReport({result->result.table}, all_rows != 0));
  return Report(absl::OkStatus());
}

void dpsrg_result_free(dpsrg_result* result) { delete result; }

dpsrg_status dpsrg_report(const char* const* paths, size_t count,
                          int all_rows, char** out) {
  if ((paths == nullptr && count > 0) || out == nullptr) {
    return NullArgument("argument");
  }
  return Guard([&] {
    std::vector<dpsrg::MetricTable> tables;
    for (size_t i = 0; i < count; ++i) {
      std::filesystem::path path(paths[i]);
      if (std::filesystem::is_directory(path)) path /= "summary.csv";
      auto table = dpsrg::LoadSummaryCsv(path.string());
      if (!table.ok()) {
        return Report(absl::Status(
            table.status().code(),
            absl::StrCat(path.string(), ": ", table.status().message())));
      }
      tables.push_back(*std::move(table));
    }
    *out = CopyString(dpsrg::RenderReport(tables, all_rows != 0));
    return Report(absl::OkStatus());
  });
}

dpsrg_status dpsrg_factorize(const char* workload, int epochs, int batches,
                             double gamma, double decay, int iterations,
                             dpsrg_strategy** out) {
  if (workload == nullptr || out == nullptr) return NullArgument("argument");
  return Guard([&] {
    auto kind = dpsrg::ParseWorkload(workload);
    if (!kind.ok()) return Report(kind.status());
    auto w = dpsrg::BuildWorkload(*kind, epochs, batches, gamma, decay);
    if (!w.ok()) return Report(w.status());
    dpsrg::StrategyMetadata meta;
    meta.kind = *kind;
    meta.epochs = epochs;
    meta.batches = batches;
    meta.gamma = gamma;
    meta.decay = decay;
    dpsrg::FactorizeOptions options;
    options.iterations = iterations;
    auto strategy = dpsrg::Factorize(*w, meta, options);
    if (!strategy.ok()) return Report(strategy.status());
    *out = new dpsrg_strategy{*std::move(strategy)};
    return Report(absl::OkStatus());
  });
}

dpsrg_status dpsrg_strategy_load(const char* path, dpsrg_strategy** out) {
  if (path == nullptr || out == nullptr) return NullArgument("argument");
  return Guard([&] {
    auto strategy = dpsrg::LoadStrategy(path);
    if (!strategy.ok()) return Report(strategy.status());
    *out = new dpsrg_strategy{*std::move(strategy)};
    return Report(absl::OkStatus());
  });
}

dpsrg_status dpsrg_strategy_save(const dpsrg_strategy* strategy,
                                 const char* path) {
  if (strategy == nullptr || path == nullptr) return NullArgument("argument");
  return Guard(
      [&] { return Report(dpsrg::SaveStrategy(strategy->strategy, path)); });
}

int dpsrg_strategy_size(const dpsrg_strategy* strategy) {
  return strategy == nullptr ? 0 : strategy->strategy.size();
}

double dpsrg_strategy_objective(const dpsrg_strategy* strategy) {
  return strategy == nullptr ? 0.0 : strategy->strategy.objective();
}

double dpsrg_strategy_tree_objective(const dpsrg_strategy* strategy) {
  if (strategy == nullptr) return 0.0;
  const dpsrg::StrategyMetadata& meta = strategy->strategy.meta();
  return dpsrg::TreeBaselineObjective(strategy->strategy.workload(),
                                      meta.epochs, meta.batches);
}

double dpsrg_strategy_sensitivity(const dpsrg_strategy* strategy) {
  return strategy == nullptr ? 0.0 : strategy->strategy.sensitivity();
}

int dpsrg_strategy_converged(const dpsrg_strategy* strategy) {
  return strategy != nullptr && strategy->strategy.converged() ? 1 : 0;
}

void dpsrg_strategy_free(dpsrg_strategy* strategy) { delete strategy; }

int dpsrg_num_criteria(void) { return dpsrg::kNumCriteria; }

dpsrg_status dpsrg_verify(int criterion, const char* data_dir,
                          int include_figure, int* passed, int* skipped,
                          char** line) {
  if (passed == nullptr || skipped == nullptr || line == nullptr) {
    return NullArgument("argument");
  }
  if (criterion < 1 || criterion > dpsrg::kNumCriteria) {
    return Report(absl::InvalidArgumentError(
        absl::StrCat("criterion must lie in [1, ", dpsrg::kNumCriteria, "]")));
  }
  return Guard([&] {
    dpsrg::VerifyOptions options;
    if (data_dir != nullptr) options.data_dir = data_dir;
    options.include_figure = include_figure != 0;
    const dpsrg::CriterionResult r = dpsrg::RunCriterion(criterion, options);
    *passed = r.passed ? 1 : 0;
    *skipped = r.skipped ? 1 : 0;
    *line = CopyString(dpsrg::FormatCriterion(r));
    return Report(absl::OkStatus());
  });
}

}  // extern "C"
