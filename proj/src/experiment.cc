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

#include "dpsrg/experiment.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "dpsrg/dataset.h"
#include "dpsrg/matrix_mechanism.h"
#include "dpsrg/random.h"
#include "dpsrg/status_macros.h"

namespace dpsrg {
namespace {

constexpr uint64_t kDataKey = 0x6461;
constexpr uint64_t kSplitKey = 0x7370;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct NamedTask {
  TaskKind kind;
  const char* name;
};
constexpr NamedTask kTasks[] = {
    {TaskKind::kSynthetic, "synthetic"},
    {TaskKind::kMnist, "mnist"},
    {TaskKind::kCifarFeatures, "cifar-features"},
    {TaskKind::kCsvDataset, "csv-dataset"},
};

struct NamedAlgorithm {
  Algorithm algorithm;
  const char* name;
};
constexpr NamedAlgorithm kAlgorithms[] = {
    {Algorithm::kAcceleratedSrgd, "accelerated_srgd"},
    {Algorithm::kIndependentSrgd, "independent_srgd"},
    {Algorithm::kUnacceleratedSrgd, "unaccelerated_srgd"},
    {Algorithm::kDpSgd, "dp_sgd"},
    {Algorithm::kDpFtrl, "dp_ftrl"},
    {Algorithm::kDpMemf, "dp_memf"},
    {Algorithm::kDpSrgMemf, "dp_srg_memf"},
    {Algorithm::kNonPrivate, "nonprivate"},
};

std::string_view TaskName(TaskKind kind) {
  for (const auto& t : kTasks) {
    if (t.kind == kind) return t.name;
  }
  return "unknown";
}

bool IsMatrixFactorization(Algorithm a) {
  return a == Algorithm::kDpMemf || a == Algorithm::kDpSrgMemf;
}

bool IsAccelerated(Algorithm a) {
  return a == Algorithm::kAcceleratedSrgd || a == Algorithm::kIndependentSrgd;
}

std::string Num(double v) { return absl::StrFormat("%.17g", v); }

std::string OptNum(const std::optional<double>& v) {
  return v ? Num(*v) : std::string();
}

uint64_t Fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

absl::Status Invalid(absl::string_view key, absl::string_view value,
                     absl::string_view why) {
  return absl::InvalidArgumentError(absl::StrCat(
      "invalid value '", std::string(value), "' for key '", std::string(key),
      "': ", std::string(why)));
}

absl::StatusOr<double> ParseDouble(absl::string_view key,
                                   absl::string_view value) {
  double v;
  if (!absl::SimpleAtod(value, &v) || std::isnan(v)) {
    return Invalid(key, value, "not a number");
  }
  return v;
}

absl::StatusOr<int> ParseInt(absl::string_view key, absl::string_view value) {
  int v;
  if (!absl::SimpleAtoi(value, &v)) return Invalid(key, value, "not an integer");
  return v;
}

absl::StatusOr<bool> ParseBool(absl::string_view key, absl::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  return Invalid(key, value, "expected true or false");
}

absl::StatusOr<std::vector<double>> ParseDoubles(absl::string_view key,
                                                 absl::string_view value) {
  std::vector<double> out;
  for (absl::string_view item : absl::StrSplit(value, ',')) {
    ASSIGN_OR_RETURN(double v,
                     ParseDouble(key, absl::StripAsciiWhitespace(item)));
    out.push_back(v);
  }
  return out;
}

absl::StatusOr<AlgorithmChoice> ParseChoice(absl::string_view text) {
  AlgorithmChoice choice;
  std::vector<std::string> parts = absl::StrSplit(text, ':');
  if (parts.empty() || parts.size() > 2) {
    return Invalid("algorithms", text, "expected name[:workload]");
  }
  ASSIGN_OR_RETURN(choice.algorithm, ParseAlgorithm(parts[0]));
  if (parts.size() == 2) {
    choice.workload = parts[1];
  } else {
    choice.workload =
        IsMatrixFactorization(choice.algorithm) ? "ones" : "none";
  }
  return choice;
}

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

// ----------------------------------------------------------------------------
// Data sources.

class StandardSource : public DataSource {
 public:
  absl::StatusOr<std::unique_ptr<LossProblem>> Load(
      const ExperimentSpec& spec) override {
    if (spec.task == TaskKind::kSynthetic) {
      SyntheticQuadraticOptions o;
      o.dim = spec.dim;
      o.num_examples = static_cast<size_t>(spec.num_examples);
      o.radius = spec.radius;
      o.lipschitz = spec.lipschitz;
      o.smoothness = spec.smoothness;
      o.condition = spec.condition;
      o.target_norm = spec.target_norm;
      o.noise_scale = spec.noise_scale;
      o.curvature_spread = spec.curvature_spread;
      o.seed = spec.seed;
      ASSIGN_OR_RETURN(auto problem, SyntheticQuadratic::Create(o));
      return std::unique_ptr<LossProblem>(std::move(problem));
    }
    std::string dir = spec.data_dir;
    if (dir.empty()) {
      const char* env = std::getenv("DPSRG_DATA_DIR");
      if (env != nullptr) dir = env;
    }
    if (dir.empty()) {
      return absl::FailedPreconditionError(
          "no data directory: set data_dir or DPSRG_DATA_DIR");
    }
    const DatasetFormat format = spec.task == TaskKind::kMnist
                                     ? DatasetFormat::kIdx
                                     : DatasetFormat::kCsv;
    ASSIGN_OR_RETURN(auto task, LoadDataset(dir, format, spec.num_classes));
    return std::unique_ptr<LossProblem>(std::move(task));
  }
};

// ----------------------------------------------------------------------------
// Per-row preparation.

struct RowPlan {
  AlgorithmChoice choice;
  double lr = 0.0;
  double clip = 0.0;
  double c = 0.0;
  absl::Status status;  // preparation failure, if any
  int batch = 1;
  int steps = 1;
  SrgdConfig srgd;
  std::shared_ptr<const StrategyMatrix> strategy;
  double sgd_sigma = 0.0;
  std::vector<std::string> header;
};

class StrategyCache {
 public:
  StrategyCache(const ExperimentSpec& spec) : spec_(spec) {}

  absl::StatusOr<std::shared_ptr<const StrategyMatrix>> Get(
      const StrategyMetadata& meta) {
    const std::string key =
        absl::StrCat(static_cast<int>(meta.kind), "_", meta.epochs, "_",
                     meta.batches, "_", Num(meta.gamma), "_", Num(meta.decay));
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::string path;
    if (!spec_.strategy_dir.empty()) {
      path = (std::filesystem::path(spec_.strategy_dir) /
              absl::StrFormat("%s_k%d_b%d_g%.6g_c%.6g.strategy",
                              std::string(WorkloadName(meta.kind)),
                              meta.epochs, meta.batches, meta.gamma,
                              meta.decay))
                 .string();
      absl::StatusOr<StrategyMatrix> loaded = LoadStrategy(path);
      if (loaded.ok() && loaded->meta().kind == meta.kind &&
          loaded->meta().epochs == meta.epochs &&
          loaded->meta().batches == meta.batches &&
          loaded->meta().gamma == meta.gamma &&
          loaded->meta().decay == meta.decay) {
        auto shared = std::make_shared<const StrategyMatrix>(*std::move(loaded));
        cache_[key] = shared;
        return shared;
      }
    }
    ASSIGN_OR_RETURN(Eigen::MatrixXd workload,
                     BuildWorkload(meta.kind, meta.epochs, meta.batches,
                                   meta.gamma, meta.decay));
    FactorizeOptions options;
    options.iterations = spec_.factorize_iterations;
    ASSIGN_OR_RETURN(StrategyMatrix strategy,
                     Factorize(workload, meta, options));
    if (!path.empty()) {
      std::filesystem::create_directories(spec_.strategy_dir);
      RETURN_IF_ERROR(SaveStrategy(strategy, path));
    }
    auto shared = std::make_shared<const StrategyMatrix>(std::move(strategy));
    cache_[key] = shared;
    return shared;
  }

 private:
  const ExperimentSpec& spec_;
  std::map<std::string, std::shared_ptr<const StrategyMatrix>> cache_;
};

int DefaultBatch(const ExperimentSpec& spec, size_t n) {
  if (spec.batch_size > 0) return spec.batch_size;
  return std::max(1, static_cast<int>(std::floor(std::sqrt(double(n)))));
}

absl::Status PrepareRow(const ExperimentSpec& spec,
                        const PrivacyBudget& budget,
                        const LossProblem& problem, StrategyCache& cache,
                        RowPlan& plan) {
  const size_t n = problem.num_examples();
  const Algorithm a = plan.choice.algorithm;
  plan.header = {
      absl::StrCat("# algorithm=", std::string(AlgorithmName(a))),
      absl::StrCat("# workload=", plan.choice.workload),
      absl::StrCat("# lr=", Num(plan.lr)),
      absl::StrCat("# clip=", Num(plan.clip)),
      absl::StrCat("# c=", Num(plan.c)),
  };
  if (IsAccelerated(a) || a == Algorithm::kUnacceleratedSrgd) {
    const double r_diam = 2.0 * spec.radius;
    const double lip = problem.lipschitz();
    const double smooth = problem.smoothness();
    if (spec.batch_size == 0 && budget.is_private() && IsAccelerated(a) &&
        n >= 4) {
      ASSIGN_OR_RETURN(BatchPlan bp,
                       BatchAndBeta(static_cast<int64_t>(n), lip, smooth,
                                    r_diam, budget.epsilon(), budget.delta(),
                                    static_cast<double>(problem.dim())));
      plan.batch = static_cast<int>(bp.batch);
    } else {
      plan.batch = DefaultBatch(spec, n);
    }
    plan.steps = static_cast<int>(n / static_cast<size_t>(plan.batch));
    if (plan.steps < 1) {
      return absl::InvalidArgumentError("batch size exceeds dataset size");
    }
    if (a == Algorithm::kUnacceleratedSrgd) return absl::OkStatus();

    const double b = plan.batch;
    const double beta_plan =
        smooth + (8.0 * lip + 16.0 * smooth * r_diam) *
                     std::pow(static_cast<double>(n), 1.5) / (r_diam * b * b);
    if (!(plan.lr > 0.0)) {
      return absl::InvalidArgumentError(
          "accelerated methods need lr > 0 (beta = beta_plan / lr)");
    }
    const double clip =
        plan.clip > 0.0 ? plan.clip : ClipNorm(lip, smooth, r_diam);
    ASSIGN_OR_RETURN(ConstraintBall ball, ConstraintBall::Create(spec.radius));
    SrgdConfig& cfg = plan.srgd;
    cfg.steps = plan.steps;
    cfg.batch = plan.batch;
    cfg.beta = beta_plan / plan.lr;
    cfg.clip = clip;
    cfg.ball = ball;
    if (budget.is_private()) {
      if (std::isinf(clip)) {
        return absl::InvalidArgumentError(
            "private accelerated runs need a finite clip");
      }
      if (a == Algorithm::kAcceleratedSrgd) {
        // Tree noise on the summed-increment scale: beta * SrgdSigma with
        // the clip norm in place of 4L + 8MR.
        cfg.sigma = 2.0 * std::sqrt(2.0) * clip *
                    std::sqrt(std::log(static_cast<double>(cfg.steps)) *
                              std::log(2.5 / budget.delta())) /
                    (budget.epsilon() * b);
        if (cfg.steps < 2) cfg.sigma = clip / (b * budget.mu());
      } else {
        // Each example enters one step: per-step sensitivity clip / B.
        cfg.sigma = clip / (b * budget.mu());
      }
    }
    RegimeInputs in;
    in.n = static_cast<int64_t>(n);
    in.dim = static_cast<double>(problem.dim());
    in.lipschitz = lip;
    in.smoothness = smooth;
    in.r_diam = r_diam;
    in.epsilon = budget.epsilon();
    in.delta = budget.is_private() ? budget.delta() : spec.delta;
    in.batch = plan.batch;
    in.steps = plan.steps;
    in.beta = cfg.beta;
    for (auto& line : BuildRegimeReport(in).CommentLines()) {
      plan.header.push_back(std::move(line));
    }
    plan.header.push_back(absl::StrCat("# tree_sigma=", Num(cfg.sigma)));
    return absl::OkStatus();
  }

  plan.batch = DefaultBatch(spec, n);
  const int batches = static_cast<int>(n / static_cast<size_t>(plan.batch));
  if (batches < 1) {
    return absl::InvalidArgumentError("batch size exceeds dataset size");
  }
  plan.steps = batches * spec.epochs;
  if (budget.is_private() && a != Algorithm::kNonPrivate &&
      std::isinf(plan.clip)) {
    return absl::InvalidArgumentError("private runs need a finite clip");
  }
  if (a == Algorithm::kDpSgd) {
    if (budget.is_private()) {
      plan.sgd_sigma = plan.clip * std::sqrt(spec.epochs / (2.0 * budget.rho())) /
                       static_cast<double>(plan.batch);
    }
    plan.header.push_back(absl::StrCat("# sgd_sigma=", Num(plan.sgd_sigma)));
    return absl::OkStatus();
  }
  if (a == Algorithm::kNonPrivate) return absl::OkStatus();
  StrategyMetadata meta;
  meta.epochs = spec.epochs;
  meta.batches = batches;
  if (a == Algorithm::kDpFtrl || plan.choice.workload == "ones") {
    meta.kind = WorkloadKind::kOnes;
  } else if (a == Algorithm::kDpMemf) {
    meta.kind = WorkloadKind::kMomentum;
    meta.gamma = spec.momentum;
  } else {
    meta.kind = WorkloadKind::kMomentumDecay;
    meta.gamma = spec.momentum;
    meta.decay = plan.c;
  }
  ASSIGN_OR_RETURN(plan.strategy, cache.Get(meta));
  plan.header.push_back(
      absl::StrCat("# strategy.sensitivity=", Num(plan.strategy->sensitivity())));
  plan.header.push_back(
      absl::StrCat("# strategy.objective=", Num(plan.strategy->objective())));
  plan.header.push_back(absl::StrCat(
      "# strategy.converged=", plan.strategy->converged() ? "true" : "false"));
  return absl::OkStatus();
}

// Fixed-order epoch batches over a seeded permutation.
BatchList ShuffledEpoch(size_t n, int batches, uint64_t seed) {
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  SplitMix64 engine(seed);
  std::shuffle(order.begin(), order.end(), engine);
  BatchList out = *EpochBatches(n, batches);
  for (auto& batch : out) {
    for (auto& i : batch) i = order[i];
  }
  return out;
}

absl::StatusOr<RunRecord> ExecuteRun(const ExperimentSpec& spec,
                                     const PrivacyBudget& budget,
                                     const LossProblem& problem,
                                     const RowPlan& plan, uint64_t seed,
                                     uint64_t data_seed) {
  RETURN_IF_ERROR(plan.status);
  const size_t n = problem.num_examples();
  const Algorithm a = plan.choice.algorithm;
  if (IsAccelerated(a) || a == Algorithm::kUnacceleratedSrgd) {
    ASSIGN_OR_RETURN(BatchList batches,
                     DisjointBatches(n, plan.batch, plan.steps, data_seed));
    if (a == Algorithm::kUnacceleratedSrgd) {
      UnacceleratedConfig cfg;
      cfg.steps = plan.steps;
      cfg.batch = plan.batch;
      cfg.lr = plan.lr;
      cfg.decay = {plan.c};
      if (spec.task == TaskKind::kSynthetic) {
        ASSIGN_OR_RETURN(cfg.ball, ConstraintBall::Create(spec.radius));
      }
      cfg.seed = seed;
      return RunUnacceleratedSrgd(problem, batches, cfg, nullptr);
    }
    SrgdConfig cfg = plan.srgd;
    cfg.seed = seed;
    return a == Algorithm::kAcceleratedSrgd
               ? RunAcceleratedDpSrgd(problem, batches, cfg)
               : RunIndependentVariant(problem, batches, cfg);
  }
  const int per_epoch = plan.steps / spec.epochs;
  const BatchList epoch = ShuffledEpoch(n, per_epoch, data_seed);
  if (a == Algorithm::kDpSgd || a == Algorithm::kDpFtrl) {
    BatchList all;
    for (int k = 0; k < spec.epochs; ++k) {
      all.insert(all.end(), epoch.begin(), epoch.end());
    }
    if (a == Algorithm::kDpSgd) {
      return RunDpSgd(problem, all, plan.lr, plan.clip, plan.sgd_sigma,
                      ConstraintBall::Unbounded(), seed);
    }
    return RunDpFtrl(problem, all, plan.lr, plan.clip, *plan.strategy,
                     budget.rho(), ConstraintBall::Unbounded(), seed);
  }
  MemfConfig cfg;
  cfg.epochs = spec.epochs;
  cfg.batches = per_epoch;
  cfg.clip = plan.clip;
  cfg.decay = plan.c;
  cfg.momentum = spec.momentum;
  cfg.lr = plan.lr;
  cfg.seed = seed;
  cfg.add_noise_twice = spec.add_noise_twice;
  if (a == Algorithm::kNonPrivate) {
    const StrategyMatrix identity =
        StrategyMatrix::Identity(spec.epochs, per_epoch);
    // Identity has group sensitivity sqrt(k); it is never used for noise.
    StrategyMatrix scaled = *StrategyMatrix::Create(
        identity.matrix() / std::sqrt(static_cast<double>(spec.epochs)),
        identity.workload(), identity.meta());
    cfg.strategy = &scaled;
    cfg.rho = kInf;
    if (cfg.clip == 0.0) cfg.clip = kInf;
    return RunDpMemf(problem, epoch, cfg);
  }
  cfg.strategy = plan.strategy.get();
  cfg.rho = budget.is_private() ? budget.rho() : kInf;
  return a == Algorithm::kDpMemf ? RunDpMemf(problem, epoch, cfg)
                                 : RunDpSrgMemf(problem, epoch, cfg);
}

// Splits a validation set off the training data of a logistic task.
absl::StatusOr<std::pair<std::unique_ptr<LossProblem>, LabeledSet>>
SplitValidation(const ExperimentSpec& spec, const LogisticTask& task) {
  const LabeledSet& train = task.train();
  const size_t n = train.size();
  const size_t v = std::clamp<size_t>(
      static_cast<size_t>(std::llround(spec.validation_fraction * n)), 1,
      n - 1);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  SplitMix64 engine(DeriveSeed(spec.seed, {kSplitKey}));
  std::shuffle(order.begin(), order.end(), engine);
  LabeledSet fit, val;
  fit.features.resize(train.features.rows(), static_cast<Eigen::Index>(n - v));
  val.features.resize(train.features.rows(), static_cast<Eigen::Index>(v));
  for (size_t i = 0; i < n; ++i) {
    const size_t src = order[i];
    if (i < v) {
      val.features.col(i) = train.features.col(src);
      val.labels.push_back(train.labels[src]);
    } else {
      fit.features.col(i - v) = train.features.col(src);
      fit.labels.push_back(train.labels[src]);
    }
  }
  ASSIGN_OR_RETURN(auto reduced, LogisticTask::Create(std::move(fit), task.test(),
                                                      task.num_classes()));
  return std::make_pair(std::unique_ptr<LossProblem>(std::move(reduced)),
                        std::move(val));
}

std::vector<std::string> BudgetLines(const PrivacyBudget& budget) {
  const char* kind = "none";
  switch (budget.kind()) {
    case PrivacyBudget::Kind::kApproxDp:
      kind = "approx_dp";
      break;
    case PrivacyBudget::Kind::kGdp:
      kind = "gdp";
      break;
    case PrivacyBudget::Kind::kZcdp:
      kind = "zcdp";
      break;
    case PrivacyBudget::Kind::kNone:
      break;
  }
  return {
      absl::StrCat("# budget.kind=", kind),
      absl::StrCat("# budget.epsilon=", Num(budget.epsilon())),
      absl::StrCat("# budget.delta=", Num(budget.delta())),
      absl::StrCat("# budget.mu=", Num(budget.mu())),
      absl::StrCat("# budget.rho=", Num(budget.rho())),
  };
}

}  // namespace

std::string_view AlgorithmName(Algorithm algorithm) {
  for (const auto& a : kAlgorithms) {
    if (a.algorithm == algorithm) return a.name;
  }
  return "unknown";
}

absl::StatusOr<Algorithm> ParseAlgorithm(std::string_view name) {
  for (const auto& a : kAlgorithms) {
    if (name == a.name) return a.algorithm;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown algorithm '", std::string(name), "'"));
}

absl::Status ValidateExperimentSpec(const ExperimentSpec& spec) {
  auto fail = [](auto... parts) {
    return absl::InvalidArgumentError(absl::StrCat(parts...));
  };
  if (spec.algorithms.empty()) return fail("algorithms must be nonempty");
  for (const AlgorithmChoice& c : spec.algorithms) {
    if (IsMatrixFactorization(c.algorithm)) {
      if (c.workload != "ones" && c.workload != "true") {
        return fail("workload for ", std::string(AlgorithmName(c.algorithm)),
                    " must be ones or true, got '", c.workload, "'");
      }
    } else if (c.workload != "none") {
      return fail(std::string(AlgorithmName(c.algorithm)), " takes no workload");
    }
  }
  const int targets = spec.epsilon.has_value() + spec.rho.has_value() +
                      spec.mu.has_value();
  if (targets > 1) return fail("give at most one of epsilon, rho, mu");
  for (const auto& v : {spec.epsilon, spec.rho, spec.mu}) {
    if (v && !(*v > 0.0)) return fail("privacy parameter must be positive");
  }
  if (!(spec.delta > 0.0 && spec.delta < 1.0)) {
    return fail("delta must lie in (0, 1)");
  }
  if (spec.lr.empty() || spec.clip.empty() || spec.c.empty()) {
    return fail("sweep grids must be nonempty");
  }
  for (double v : spec.lr) {
    if (!(v >= 0.0) || std::isinf(v)) return fail("lr must be finite and >= 0");
  }
  for (double v : spec.clip) {
    if (!(v >= 0.0)) return fail("clip must be >= 0");
  }
  for (double v : spec.c) {
    if (!(v >= 0.0 && v <= 1.0)) return fail("c must lie in [0, 1]");
  }
  if (spec.repeats < 1) return fail("repeats must be >= 1");
  if (spec.workers < 1) return fail("workers must be >= 1");
  if (spec.epochs < 1) return fail("epochs must be >= 1");
  if (spec.batch_size < 0) return fail("batch_size must be >= 0");
  if (!(spec.momentum >= 0.0 && spec.momentum < 1.0)) {
    return fail("momentum must lie in [0, 1)");
  }
  if (spec.factorize_iterations < 0) {
    return fail("factorize_iterations must be >= 0");
  }
  if (!(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0)) {
    return fail("validation_fraction must lie in (0, 1)");
  }
  if (spec.num_classes < 2) return fail("num_classes must be >= 2");
  if (spec.dim < 1 || spec.num_examples < 4) {
    return fail("need dim >= 1 and num_examples >= 4");
  }
  if (!(spec.radius > 0.0) || std::isinf(spec.radius)) {
    return fail("radius must be finite and positive");
  }
  if (!(spec.condition >= 1.0)) return fail("condition must be >= 1");
  if (spec.output.empty()) return fail("output must be nonempty");
  return absl::OkStatus();
}

absl::StatusOr<ExperimentSpec> ParseExperimentSpec(std::string_view text) {
  ExperimentSpec spec;
  using Setter = std::function<absl::Status(absl::string_view)>;
  auto dbl = [](double* out, const char* key) -> Setter {
    return [out, key](absl::string_view v) -> absl::Status {
      ASSIGN_OR_RETURN(*out, ParseDouble(key, v));
      return absl::OkStatus();
    };
  };
  auto opt = [](std::optional<double>* out, const char* key) -> Setter {
    return [out, key](absl::string_view v) -> absl::Status {
      ASSIGN_OR_RETURN(double d, ParseDouble(key, v));
      *out = d;
      return absl::OkStatus();
    };
  };
  auto integer = [](int* out, const char* key) -> Setter {
    return [out, key](absl::string_view v) -> absl::Status {
      ASSIGN_OR_RETURN(*out, ParseInt(key, v));
      return absl::OkStatus();
    };
  };
  auto boolean = [](bool* out, const char* key) -> Setter {
    return [out, key](absl::string_view v) -> absl::Status {
      ASSIGN_OR_RETURN(*out, ParseBool(key, v));
      return absl::OkStatus();
    };
  };
  auto list = [](std::vector<double>* out, const char* key) -> Setter {
    return [out, key](absl::string_view v) -> absl::Status {
      ASSIGN_OR_RETURN(*out, ParseDoubles(key, v));
      return absl::OkStatus();
    };
  };
  auto str = [](std::string* out) -> Setter {
    return [out](absl::string_view v) -> absl::Status {
      *out = std::string(v);
      return absl::OkStatus();
    };
  };
  const std::map<std::string, Setter, std::less<>> setters = {
      {"task",
       [&](absl::string_view v) -> absl::Status {
         for (const auto& t : kTasks) {
           if (v == t.name) {
             spec.task = t.kind;
             return absl::OkStatus();
           }
         }
         return Invalid("task", v,
                        "expected synthetic, mnist, cifar-features or "
                        "csv-dataset");
       }},
      {"algorithms",
       [&](absl::string_view v) -> absl::Status {
         spec.algorithms.clear();
         for (absl::string_view item : absl::StrSplit(v, ',')) {
           ASSIGN_OR_RETURN(AlgorithmChoice c,
                            ParseChoice(absl::StripAsciiWhitespace(item)));
           spec.algorithms.push_back(std::move(c));
         }
         return absl::OkStatus();
       }},
      {"epsilon", opt(&spec.epsilon, "epsilon")},
      {"rho", opt(&spec.rho, "rho")},
      {"mu", opt(&spec.mu, "mu")},
      {"delta", dbl(&spec.delta, "delta")},
      {"lr", list(&spec.lr, "lr")},
      {"clip", list(&spec.clip, "clip")},
      {"c", list(&spec.c, "c")},
      {"repeats", integer(&spec.repeats, "repeats")},
      {"seed",
       [&](absl::string_view v) -> absl::Status {
         if (!absl::SimpleAtoi(v, &spec.seed)) {
           return Invalid("seed", v, "not an unsigned integer");
         }
         return absl::OkStatus();
       }},
      {"output", str(&spec.output)},
      {"trajectories", boolean(&spec.trajectories, "trajectories")},
      {"workers", integer(&spec.workers, "workers")},
      {"epochs", integer(&spec.epochs, "epochs")},
      {"batch_size", integer(&spec.batch_size, "batch_size")},
      {"momentum", dbl(&spec.momentum, "momentum")},
      {"add_noise_twice", boolean(&spec.add_noise_twice, "add_noise_twice")},
      {"factorize_iterations",
       integer(&spec.factorize_iterations, "factorize_iterations")},
      {"strategy_dir", str(&spec.strategy_dir)},
      {"select_on_validation",
       boolean(&spec.select_on_validation, "select_on_validation")},
      {"validation_fraction",
       dbl(&spec.validation_fraction, "validation_fraction")},
      {"data_dir", str(&spec.data_dir)},
      {"num_classes", integer(&spec.num_classes, "num_classes")},
      {"dim", integer(&spec.dim, "dim")},
      {"num_examples", integer(&spec.num_examples, "num_examples")},
      {"radius", dbl(&spec.radius, "radius")},
      {"lipschitz", dbl(&spec.lipschitz, "lipschitz")},
      {"smoothness", dbl(&spec.smoothness, "smoothness")},
      {"condition", dbl(&spec.condition, "condition")},
      {"target_norm", dbl(&spec.target_norm, "target_norm")},
      {"noise_scale", dbl(&spec.noise_scale, "noise_scale")},
      {"curvature_spread", dbl(&spec.curvature_spread, "curvature_spread")},
  };

  std::map<std::string, int> seen;
  int line_no = 0;
  for (absl::string_view raw :
       absl::StrSplit(absl::string_view(text.data(), text.size()), '\n')) {
    ++line_no;
    absl::string_view line = raw;
    if (size_t hash = line.find('#'); hash != absl::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected key=value"));
    }
    const std::string key(absl::StripAsciiWhitespace(line.substr(0, eq)));
    const absl::string_view value =
        absl::StripAsciiWhitespace(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": unknown key '", key, "'"));
    }
    if (seen.count(key)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "line ", line_no, ": duplicate key '", key, "' (first on line ",
          seen[key], ")"));
    }
    seen[key] = line_no;
    RETURN_IF_ERROR(it->second(value));
  }
  RETURN_IF_ERROR(ValidateExperimentSpec(spec));
  return spec;
}

absl::StatusOr<ExperimentSpec> LoadExperimentSpec(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseExperimentSpec(buffer.str());
}

std::string SerializeExperimentSpec(const ExperimentSpec& spec) {
  auto nums = [](const std::vector<double>& v) {
    return absl::StrJoin(v, ",", [](std::string* out, double d) {
      out->append(Num(d));
    });
  };
  auto flag = [](bool b) { return b ? "true" : "false"; };
  std::vector<std::string> choices;
  for (const auto& c : spec.algorithms) {
    choices.push_back(absl::StrCat(std::string(AlgorithmName(c.algorithm)), ":", c.workload));
  }
  std::string out;
  absl::StrAppend(&out, "task=", std::string(TaskName(spec.task)), "\n");
  absl::StrAppend(&out, "algorithms=", absl::StrJoin(choices, ","), "\n");
  if (spec.epsilon) absl::StrAppend(&out, "epsilon=", Num(*spec.epsilon), "\n");
  if (spec.rho) absl::StrAppend(&out, "rho=", Num(*spec.rho), "\n");
  if (spec.mu) absl::StrAppend(&out, "mu=", Num(*spec.mu), "\n");
  absl::StrAppend(&out, "delta=", Num(spec.delta), "\n");
  absl::StrAppend(&out, "lr=", nums(spec.lr), "\n");
  absl::StrAppend(&out, "clip=", nums(spec.clip), "\n");
  absl::StrAppend(&out, "c=", nums(spec.c), "\n");
  absl::StrAppend(&out, "repeats=", spec.repeats, "\n");
  absl::StrAppend(&out, "seed=", spec.seed, "\n");
  absl::StrAppend(&out, "output=", spec.output, "\n");
  absl::StrAppend(&out, "trajectories=", flag(spec.trajectories), "\n");
  absl::StrAppend(&out, "workers=", spec.workers, "\n");
  absl::StrAppend(&out, "epochs=", spec.epochs, "\n");
  absl::StrAppend(&out, "batch_size=", spec.batch_size, "\n");
  absl::StrAppend(&out, "momentum=", Num(spec.momentum), "\n");
  absl::StrAppend(&out, "add_noise_twice=", flag(spec.add_noise_twice), "\n");
  absl::StrAppend(&out, "factorize_iterations=", spec.factorize_iterations,
                  "\n");
  if (!spec.strategy_dir.empty()) {
    absl::StrAppend(&out, "strategy_dir=", spec.strategy_dir, "\n");
  }
  absl::StrAppend(&out, "select_on_validation=",
                  flag(spec.select_on_validation), "\n");
  absl::StrAppend(&out, "validation_fraction=", Num(spec.validation_fraction),
                  "\n");
  if (!spec.data_dir.empty()) {
    absl::StrAppend(&out, "data_dir=", spec.data_dir, "\n");
  }
  absl::StrAppend(&out, "num_classes=", spec.num_classes, "\n");
  absl::StrAppend(&out, "dim=", spec.dim, "\n");
  absl::StrAppend(&out, "num_examples=", spec.num_examples, "\n");
  absl::StrAppend(&out, "radius=", Num(spec.radius), "\n");
  absl::StrAppend(&out, "lipschitz=", Num(spec.lipschitz), "\n");
  absl::StrAppend(&out, "smoothness=", Num(spec.smoothness), "\n");
  absl::StrAppend(&out, "condition=", Num(spec.condition), "\n");
  absl::StrAppend(&out, "target_norm=", Num(spec.target_norm), "\n");
  absl::StrAppend(&out, "noise_scale=", Num(spec.noise_scale), "\n");
  absl::StrAppend(&out, "curvature_spread=", Num(spec.curvature_spread), "\n");
  return out;
}

absl::StatusOr<PrivacyBudget> BudgetFor(const ExperimentSpec& spec) {
  if (spec.epsilon) return PrivacyBudget::ApproxDp(*spec.epsilon, spec.delta);
  if (spec.rho) return PrivacyBudget::Zcdp(*spec.rho, spec.delta);
  if (spec.mu) return PrivacyBudget::Gdp(*spec.mu, spec.delta);
  return PrivacyBudget::NonPrivate();
}

std::unique_ptr<DataSource> DefaultDataSource() {
  return std::make_unique<StandardSource>();
}

double ConfidenceHalfWidth(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double mean = Mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double s = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return 1.96 * s / std::sqrt(static_cast<double>(values.size()));
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentSpec& spec,
                                               DataSource* source) {
  RETURN_IF_ERROR(ValidateExperimentSpec(spec));
  ExperimentResult result;
  ASSIGN_OR_RETURN(result.budget, BudgetFor(spec));
  result.events.push_back(absl::StrCat(
      "budget epsilon=", Num(result.budget.epsilon()),
      " delta=", Num(result.budget.delta()), " rho=", Num(result.budget.rho()),
      " mu=", Num(result.budget.mu())));

  std::unique_ptr<DataSource> fallback;
  if (source == nullptr) {
    fallback = DefaultDataSource();
    source = fallback.get();
  }
  ASSIGN_OR_RETURN(std::unique_ptr<LossProblem> problem, source->Load(spec));
  result.events.push_back(absl::StrCat("data n=", problem->num_examples(),
                                       " dim=", problem->dim()));
  std::optional<LabeledSet> validation;
  const LogisticTask* logistic = nullptr;
  if (spec.select_on_validation) {
    if (auto* task = dynamic_cast<const LogisticTask*>(problem.get())) {
      ASSIGN_OR_RETURN(auto split, SplitValidation(spec, *task));
      problem = std::move(split.first);
      validation = std::move(split.second);
      result.events.push_back(
          absl::StrCat("validation n=", validation->size()));
    }
  }
  logistic = dynamic_cast<const LogisticTask*>(problem.get());

  // Rows in spec order: algorithm x lr x clip x c.
  StrategyCache cache(spec);
  std::vector<RowPlan> plans;
  for (const AlgorithmChoice& choice : spec.algorithms) {
    for (double lr : spec.lr) {
      for (double clip : spec.clip) {
        for (double c : spec.c) {
          RowPlan plan;
          plan.choice = choice;
          plan.lr = lr;
          plan.clip = clip;
          plan.c = c;
          plan.status = PrepareRow(spec, result.budget, *problem, cache, plan);
          plans.push_back(std::move(plan));
        }
      }
    }
  }
  result.events.push_back(absl::StrCat("plan rows=", plans.size()));

  const int repeats = spec.repeats;
  result.runs.resize(plans.size() * repeats);
  for (size_t r = 0; r < plans.size(); ++r) {
    const RowPlan& p = plans[r];
    for (int k = 0; k < repeats; ++k) {
      RunOutcome& o = result.runs[r * repeats + k];
      o.row = static_cast<int>(r);
      o.repeat = k;
      o.seed = DeriveSeed(
          spec.seed,
          {Fnv1a(AlgorithmName(p.choice.algorithm)), Fnv1a(p.choice.workload),
           std::bit_cast<uint64_t>(p.lr), std::bit_cast<uint64_t>(p.clip),
           std::bit_cast<uint64_t>(p.c), static_cast<uint64_t>(k)});
      o.header = p.header;
      o.header.push_back(absl::StrCat("# repeat=", k));
      o.header.push_back(absl::StrCat("# seed=", o.seed));
    }
  }

  auto work = [&](size_t index) {
    RunOutcome& o = result.runs[index];
    const uint64_t data_seed =
        DeriveSeed(spec.seed, {kDataKey, static_cast<uint64_t>(o.repeat)});
    absl::StatusOr<RunRecord> record = ExecuteRun(
        spec, result.budget, *problem, plans[o.row], o.seed, data_seed);
    if (!record.ok()) {
      o.status = record.status();
      return;
    }
    o.record = *std::move(record);
    if (validation && logistic != nullptr) {
      o.validation_accuracy = logistic->Accuracy(o.record.output, *validation);
    }
  };
  const int workers =
      std::min<int>(spec.workers, static_cast<int>(result.runs.size()));
  if (workers <= 1) {
    for (size_t i = 0; i < result.runs.size(); ++i) work(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < result.runs.size(); i = next++) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  // Aggregate in row order.
  for (size_t r = 0; r < plans.size(); ++r) {
    const RowPlan& p = plans[r];
    MetricRow row;
    row.algorithm = std::string(AlgorithmName(p.choice.algorithm));
    row.workload = p.choice.workload;
    row.lr = p.lr;
    row.clip = p.clip;
    row.c = p.c;
    std::vector<double> acc, excess;
    for (int k = 0; k < repeats; ++k) {
      const RunOutcome& o = result.runs[r * repeats + k];
      ++row.runs;
      if (!o.status.ok()) {
        ++row.failures;
        continue;
      }
      if (o.record.accuracy) acc.push_back(100.0 * *o.record.accuracy);
      if (o.record.excess) excess.push_back(*o.record.excess);
    }
    if (!acc.empty()) {
      row.acc_mean = Mean(acc);
      row.acc_ci95 = ConfidenceHalfWidth(acc);
    }
    if (!excess.empty()) row.excess_mean = Mean(excess);
    result.failures += row.failures;
    result.table.rows.push_back(std::move(row));
  }

  // Best row per algorithm choice.
  const size_t per_choice = spec.lr.size() * spec.clip.size() * spec.c.size();
  for (size_t a = 0; a < spec.algorithms.size(); ++a) {
    int best = -1;
    double best_score = -kInf;
    for (size_t g = 0; g < per_choice; ++g) {
      const size_t r = a * per_choice + g;
      const MetricRow& row = result.table.rows[r];
      std::optional<double> score;
      if (spec.select_on_validation && validation) {
        std::vector<double> vals;
        for (int k = 0; k < repeats; ++k) {
          const RunOutcome& o = result.runs[r * repeats + k];
          if (o.status.ok() && o.validation_accuracy) {
            vals.push_back(*o.validation_accuracy);
          }
        }
        if (!vals.empty()) score = Mean(vals);
      } else if (row.acc_mean) {
        score = *row.acc_mean;
      } else if (row.excess_mean) {
        score = -*row.excess_mean;
      }
      if (score && std::isfinite(*score) && *score > best_score) {
        best_score = *score;
        best = static_cast<int>(r);
      }
    }
    result.table.best.push_back(best);
  }

  result.header = BudgetLines(result.budget);
  result.header.push_back("# ci=95% normal approximation (1.96 s / sqrt(r))");
  result.header.push_back(absl::StrCat(
      "# selection=", spec.select_on_validation ? "validation" : "test"));
  for (size_t r = 0; r < plans.size(); ++r) {
    for (const std::string& line : plans[r].header) {
      if (absl::StartsWith(line, "# regime.") ||
          absl::StartsWith(line, "# strategy.")) {
        result.header.push_back(
            absl::StrCat("# row.", r, ".", line.substr(2)));
      }
    }
    if (!plans[r].status.ok()) {
      result.header.push_back(absl::StrCat("# row.", r, ".error=",
                                           plans[r].status.message()));
    }
  }
  for (const RunOutcome& o : result.runs) {
    if (!o.status.ok()) {
      result.header.push_back(absl::StrCat("# failure=", o.row, ",", o.repeat,
                                           ",", o.status.message()));
    }
  }
  result.events.push_back(absl::StrCat("done failures=", result.failures));
  return result;
}

std::string TrajectoryCsv(const RunRecord& record,
                          const std::vector<std::string>& header) {
  std::string out;
  for (const std::string& line : header) absl::StrAppend(&out, line, "\n");
  absl::StrAppend(&out, "step,loss,phi,noise_norm,grad_norm\n");
  for (size_t t = 0; t < record.steps.size(); ++t) {
    const StepRecord& s = record.steps[t];
    absl::StrAppend(&out, t, ",", Num(s.loss), ",", OptNum(s.phi), ",",
                    OptNum(s.noise_norm), ",", Num(s.grad_norm), "\n");
  }
  return out;
}

namespace {

absl::Status WriteText(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    return absl::UnavailableError(
        absl::StrCat("cannot open ", path.string(), " for writing"));
  }
  out << text;
  if (!out) {
    return absl::DataLossError(absl::StrCat("write failed: ", path.string()));
  }
  return absl::OkStatus();
}

std::string SummaryCsv(const ExperimentResult& result) {
  std::string out;
  for (const std::string& line : result.header) {
    absl::StrAppend(&out, line, "\n");
  }
  for (size_t r = 0; r < result.table.rows.size(); ++r) {
    const MetricRow& row = result.table.rows[r];
    absl::StrAppend(&out, "# row.", r, ".runs=", row.runs, "\n");
    absl::StrAppend(&out, "# row.", r, ".failures=", row.failures, "\n");
  }
  absl::StrAppend(&out, "# best=", absl::StrJoin(result.table.best, ","),
                  "\n");
  absl::StrAppend(
      &out, "algorithm,workload,lr,clip,c,acc_mean,acc_ci95,excess_mean\n");
  for (const MetricRow& row : result.table.rows) {
    absl::StrAppend(&out, row.algorithm, ",", row.workload, ",", Num(row.lr),
                    ",", Num(row.clip), ",", Num(row.c), ",",
                    OptNum(row.acc_mean), ",", OptNum(row.acc_ci95), ",",
                    OptNum(row.excess_mean), "\n");
  }
  return out;
}

}  // namespace

absl::Status EmitCsv(const ExperimentResult& result, const std::string& dir,
                     bool trajectories) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  RETURN_IF_ERROR(WriteText(std::filesystem::path(dir) / "summary.csv",
                            SummaryCsv(result)));
  if (!trajectories) return absl::OkStatus();
  const std::filesystem::path runs = std::filesystem::path(dir) / "runs";
  std::filesystem::create_directories(runs, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", runs.string(), ": ", ec.message()));
  }
  std::vector<std::string> budget;
  for (const std::string& line : result.header) {
    if (absl::StartsWith(line, "# budget.")) budget.push_back(line);
  }
  for (const RunOutcome& o : result.runs) {
    if (!o.status.ok()) continue;
    const MetricRow& row = result.table.rows[o.row];
    std::vector<std::string> header = budget;
    header.insert(header.end(), o.header.begin(), o.header.end());
    RETURN_IF_ERROR(WriteText(
        runs / absl::StrFormat("row%03d_%s_%s_rep%03d.csv", o.row,
                               row.algorithm, row.workload, o.repeat),
        TrajectoryCsv(o.record, header)));
  }
  return absl::OkStatus();
}

absl::StatusOr<MetricTable> ParseSummaryCsv(std::string_view text) {
  MetricTable table;
  std::map<int, int> runs, failures;
  bool header_seen = false;
  int line_no = 0;
  auto opt = [](absl::string_view cell) -> absl::StatusOr<std::optional<double>> {
    if (cell.empty()) return std::optional<double>();
    double v;
    if (!absl::SimpleAtod(cell, &v)) {
      return absl::DataLossError(
          absl::StrCat("bad number '", std::string(cell), "'"));
    }
    return std::optional<double>(v);
  };
  for (absl::string_view line :
       absl::StrSplit(absl::string_view(text.data(), text.size()), '\n')) {
    ++line_no;
    if (line.empty()) continue;
    if (absl::ConsumePrefix(&line, "# ")) {
      if (absl::ConsumePrefix(&line, "best=")) {
        if (line.empty()) continue;
        for (absl::string_view item : absl::StrSplit(line, ',')) {
          int v;
          if (!absl::SimpleAtoi(item, &v)) {
            return absl::DataLossError("bad best-row list");
          }
          table.best.push_back(v);
        }
      } else if (absl::ConsumePrefix(&line, "row.")) {
        std::vector<absl::string_view> parts =
            absl::StrSplit(line, absl::MaxSplits('.', 1));
        int row;
        if (parts.size() == 2 && absl::SimpleAtoi(parts[0], &row)) {
          int v;
          if (absl::ConsumePrefix(&parts[1], "runs=") &&
              absl::SimpleAtoi(parts[1], &v)) {
            runs[row] = v;
          } else if (absl::ConsumePrefix(&parts[1], "failures=") &&
                     absl::SimpleAtoi(parts[1], &v)) {
            failures[row] = v;
          }
        }
      }
      continue;
    }
    if (line[0] == '#') continue;
    if (!header_seen) {
      if (line != "algorithm,workload,lr,clip,c,acc_mean,acc_ci95,excess_mean") {
        return absl::DataLossError(
            absl::StrCat("line ", line_no, ": unexpected summary header"));
      }
      header_seen = true;
      continue;
    }
    std::vector<absl::string_view> cells = absl::StrSplit(line, ',');
    if (cells.size() != 8) {
      return absl::DataLossError(
          absl::StrCat("line ", line_no, ": expected 8 cells"));
    }
    MetricRow row;
    row.algorithm = std::string(cells[0]);
    row.workload = std::string(cells[1]);
    if (!absl::SimpleAtod(cells[2], &row.lr) ||
        !absl::SimpleAtod(cells[3], &row.clip) ||
        !absl::SimpleAtod(cells[4], &row.c)) {
      return absl::DataLossError(
          absl::StrCat("line ", line_no, ": bad grid value"));
    }
    ASSIGN_OR_RETURN(row.acc_mean, opt(cells[5]));
    ASSIGN_OR_RETURN(row.acc_ci95, opt(cells[6]));
    ASSIGN_OR_RETURN(row.excess_mean, opt(cells[7]));
    const int index = static_cast<int>(table.rows.size());
    row.runs = runs.count(index) ? runs[index] : 0;
    row.failures = failures.count(index) ? failures[index] : 0;
    table.rows.push_back(std::move(row));
  }
  if (!header_seen) return absl::DataLossError("summary header missing");
  return table;
}

absl::StatusOr<MetricTable> LoadSummaryCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseSummaryCsv(buffer.str());
}

std::string RenderReport(const std::vector<MetricTable>& tables, bool all) {
  std::string out = absl::StrFormat(
      "%-2s %-20s %-9s %10s %10s %10s %18s %14s %7s\n", "", "algorithm",
      "workload", "lr", "clip", "c", "acc% (95% CI)", "excess", "failed");
  for (const MetricTable& table : tables) {
    for (size_t r = 0; r < table.rows.size(); ++r) {
      const bool is_best =
          std::find(table.best.begin(), table.best.end(), static_cast<int>(r)) !=
          table.best.end();
      if (!all && !is_best) continue;
      const MetricRow& row = table.rows[r];
      const std::string acc =
          row.acc_mean ? absl::StrFormat("%.3f +- %.3f", *row.acc_mean,
                                         row.acc_ci95.value_or(0.0))
                       : "-";
      const std::string excess =
          row.excess_mean ? absl::StrFormat("%.6g", *row.excess_mean) : "-";
      absl::StrAppendFormat(&out, "%-2s %-20s %-9s %10.4g %10.4g %10.4g %18s "
                                  "%14s %3d/%-3d\n",
                            is_best ? "*" : "", row.algorithm, row.workload,
                            row.lr, row.clip, row.c, acc, excess, row.failures,
                            row.runs);
    }
  }
  return out;
}

}  // namespace dpsrg
