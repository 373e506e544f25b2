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

#ifndef DPSRG_EXPERIMENT_H_
#define DPSRG_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsrg/accounting.h"
#include "dpsrg/objectives.h"
#include "dpsrg/optim.h"

namespace dpsrg {

enum class TaskKind { kSynthetic, kMnist, kCifarFeatures, kCsvDataset };

enum class Algorithm {
  kAcceleratedSrgd,
  kIndependentSrgd,
  kUnacceleratedSrgd,
  kDpSgd,
  kDpFtrl,
  kDpMemf,
  kDpSrgMemf,
  kNonPrivate,
};

std::string_view AlgorithmName(Algorithm algorithm);
absl::StatusOr<Algorithm> ParseAlgorithm(std::string_view name);

// An algorithm plus, for the matrix-factorisation methods, the workload the
// strategy is optimised for: "ones" or "true" (momentum for DP-MEMF,
// momentum with decay for DP-SRG-MEMF). Other algorithms use "none".
struct AlgorithmChoice {
  Algorithm algorithm = Algorithm::kDpSgd;
  std::string workload = "none";

  friend bool operator==(const AlgorithmChoice&,
                         const AlgorithmChoice&) = default;
};

// Everything needed to reproduce a sweep. Serialises to flat key=value text.
struct ExperimentSpec {
  TaskKind task = TaskKind::kSynthetic;
  std::vector<AlgorithmChoice> algorithms = {{Algorithm::kDpSgd, "none"}};

  // Privacy target: at most one of epsilon / rho / mu; none of them means a
  // non-private run.
  std::optional<double> epsilon;
  std::optional<double> rho;
  std::optional<double> mu;
  double delta = 1e-6;

  // Sweep grids. A clip of 0 selects the theory clip norm for the
  // accelerated methods; inf disables clipping where allowed.
  std::vector<double> lr = {0.1};
  std::vector<double> clip = {1.0};
  std::vector<double> c = {1.0};

  int repeats = 1;
  uint64_t seed = 0;
  std::string output = "results";
  bool trajectories = true;
  int workers = 1;

  int epochs = 1;
  int batch_size = 0;  // 0: floor(sqrt(n)) or the accounting choice
  double momentum = 0.9;
  bool add_noise_twice = true;
  int factorize_iterations = 500;
  std::string strategy_dir;

  bool select_on_validation = false;
  double validation_fraction = 0.1;

  // Empirical tasks.
  std::string data_dir;  // empty: $DPSRG_DATA_DIR
  int num_classes = 10;
  // Synthetic task (also the constraint radius of the accelerated methods).
  int dim = 20;
  int num_examples = 4096;
  double radius = 1.0;
  double lipschitz = 1.0;
  double smoothness = 1.0;
  double condition = 1e3;
  double target_norm = 0.5;
  double noise_scale = 0.5;
  double curvature_spread = 0.5;

  friend bool operator==(const ExperimentSpec&,
                         const ExperimentSpec&) = default;
};

// Parses flat key=value text ('#' starts a comment). Unknown keys, bad
// values and violated invariants are InvalidArgument.
absl::StatusOr<ExperimentSpec> ParseExperimentSpec(std::string_view text);
absl::StatusOr<ExperimentSpec> LoadExperimentSpec(const std::string& path);
std::string SerializeExperimentSpec(const ExperimentSpec& spec);
absl::Status ValidateExperimentSpec(const ExperimentSpec& spec);

// Converts the spec's privacy target (no data access).
absl::StatusOr<PrivacyBudget> BudgetFor(const ExperimentSpec& spec);

struct MetricRow {
  std::string algorithm;
  std::string workload;
  double lr = 0.0;
  double clip = 0.0;
  double c = 0.0;
  std::optional<double> acc_mean;   // percent
  std::optional<double> acc_ci95;   // 1.96 s / sqrt(r)
  std::optional<double> excess_mean;
  int runs = 0;
  int failures = 0;

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

struct MetricTable {
  std::vector<MetricRow> rows;
  // Index of the selected row per algorithm choice, in spec order.
  std::vector<int> best;

  friend bool operator==(const MetricTable&, const MetricTable&) = default;
};

struct RunOutcome {
  int row = 0;
  int repeat = 0;
  uint64_t seed = 0;
  absl::Status status;
  RunRecord record;
  std::optional<double> validation_accuracy;
  std::vector<std::string> header;  // per-run comment lines (regime etc.)
};

// Supplies the training problem. Called exactly once, after the privacy
// budget has been converted.
class DataSource {
 public:
  virtual ~DataSource() = default;
  virtual absl::StatusOr<std::unique_ptr<LossProblem>> Load(
      const ExperimentSpec& spec) = 0;
};
// Synthetic quadratic, MNIST idx, or csv according to spec.task.
std::unique_ptr<DataSource> DefaultDataSource();

struct ExperimentResult {
  PrivacyBudget budget = PrivacyBudget::NonPrivate();
  MetricTable table;
  std::vector<RunOutcome> runs;
  // Ordered log of pipeline stages ("budget", "data", ...).
  std::vector<std::string> events;
  std::vector<std::string> header;  // summary comment lines
  int failures = 0;
};

// Runs the full sweep. A null source selects DefaultDataSource().
absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentSpec& spec,
                                               DataSource* source = nullptr);

// 95% normal-approximation half-width: 1.96 s / sqrt(r) (0 for r < 2).
double ConfidenceHalfWidth(const std::vector<double>& values);

// Writes <dir>/summary.csv and, when requested, <dir>/runs/*.csv.
absl::Status EmitCsv(const ExperimentResult& result, const std::string& dir,
                     bool trajectories);
absl::StatusOr<MetricTable> ParseSummaryCsv(std::string_view text);
absl::StatusOr<MetricTable> LoadSummaryCsv(const std::string& path);
// Human-readable table of the selected rows (and all rows when `all`).
std::string RenderReport(const std::vector<MetricTable>& tables, bool all);

// Trajectory CSV for a single run.
std::string TrajectoryCsv(const RunRecord& record,
                          const std::vector<std::string>& header);

}  // namespace dpsrg

#endif  // DPSRG_EXPERIMENT_H_
