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

#include "dpsrg/verification.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dpsrg/accounting.h"
#include "dpsrg/experiment.h"
#include "dpsrg/matrix_mechanism.h"
#include "dpsrg/objectives.h"
#include "dpsrg/optim.h"
#include "dpsrg/random.h"
#include "dpsrg/tree_mechanism.h"

namespace dpsrg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool passed = false;
  bool skipped = false;
  std::string detail;
};

Outcome Fail(const absl::Status& status) {
  return {false, false, absl::StrCat("error: ", status.ToString())};
}

// Quadratic used by the deterministic checks: d = 20, L = M = 1, R = 1.
absl::StatusOr<std::unique_ptr<SyntheticQuadratic>> RateProblem() {
  SyntheticQuadraticOptions o;
  o.dim = 20;
  o.num_examples = 64;
  o.radius = 1.0;
  o.lipschitz = 1.0;
  o.smoothness = 1.0;
  o.condition = 1e6;
  o.target_norm = 0.5;
  o.noise_scale = 0.25;
  o.curvature_spread = 0.5;
  o.seed = 1;
  return SyntheticQuadratic::Create(o);
}

BatchList FullBatches(size_t n, int steps) {
  Batch all(n);
  std::iota(all.begin(), all.end(), size_t{0});
  return BatchList(static_cast<size_t>(steps), all);
}

// Noise-free full-batch runs for T in {32, 64, 128, 256}.
absl::StatusOr<std::vector<RunRecord>> RateRuns(const LossProblem& problem) {
  std::vector<RunRecord> runs;
  for (int steps : {32, 64, 128, 256}) {
    SrgdConfig cfg;
    cfg.steps = steps;
    cfg.batch = static_cast<int>(problem.num_examples());
    cfg.beta = 1.0;
    cfg.sigma = 0.0;
    cfg.ball = *ConstraintBall::Create(1.0);
    auto run = RunAcceleratedDpSrgd(
        problem, FullBatches(problem.num_examples(), steps), cfg);
    if (!run.ok()) return run.status();
    runs.push_back(*std::move(run));
  }
  return runs;
}

Outcome AccelerationRate() {
  auto problem = RateProblem();
  if (!problem.ok()) return Fail(problem.status());
  auto runs = RateRuns(**problem);
  if (!runs.ok()) return Fail(runs.status());
  Outcome out{true, false, ""};
  for (size_t i = 0; i + 1 < runs->size(); ++i) {
    const double ratio = *(*runs)[i].excess / *(*runs)[i + 1].excess;
    const bool ok = ratio >= 2.5 && ratio <= 6.0;
    out.passed = out.passed && ok;
    absl::StrAppendFormat(&out.detail, "T=%d ratio=%.3f%s; ", 32 << i, ratio,
                          ok ? "" : " (outside [2.5, 6])");
  }
  return out;
}

Outcome PotentialMonotone() {
  auto problem = RateProblem();
  if (!problem.ok()) return Fail(problem.status());
  auto runs = RateRuns(**problem);
  if (!runs.ok()) return Fail(runs.status());
  Outcome out{true, false, ""};
  double worst = -kInf;  // max (phi_{t+1} - phi_t) / phi_0
  for (const RunRecord& run : *runs) {
    const double phi0 = *run.initial_phi;
    double prev = phi0;
    for (const StepRecord& step : run.steps) {
      worst = std::max(worst, (*step.phi - prev) / phi0);
      if (*step.phi > prev + 1e-9 * phi0) out.passed = false;
      prev = *step.phi;
    }
  }
  out.detail = absl::StrFormat("max (phi_{t+1} - phi_t) / phi_0 = %.3g (limit 1e-9)",
                               worst);
  return out;
}

Outcome SensitivityCheck() {
  SyntheticQuadraticOptions o;
  o.dim = 10;
  o.num_examples = 256;
  o.radius = 1.0;
  o.lipschitz = 1.0;
  o.smoothness = 1.0;
  o.condition = 10.0;
  o.target_norm = 0.5;
  o.noise_scale = 0.3;
  o.curvature_spread = 0.5;
  o.seed = 3;
  auto problem = SyntheticQuadratic::Create(o);
  if (!problem.ok()) return Fail(problem.status());
  const LossProblem& p = **problem;
  const int batch = 16, steps = 16;
  const double r_diam = 2.0 * o.radius;
  int violations = 0;
  double worst_ratio = 0.0;
  SplitMix64 picker(DeriveSeed(0x5e5, {}));
  for (int pair = 0; pair < 50; ++pair) {
    SrgdConfig cfg;
    cfg.steps = steps;
    cfg.batch = batch;
    cfg.beta = 2.0 * o.smoothness * steps;
    cfg.sigma = 0.05;
    cfg.ball = *ConstraintBall::Create(o.radius);
    cfg.seed = static_cast<uint64_t>(pair);
    cfg.keep_gradient_points = true;
    auto batches = DisjointBatches(p.num_examples(), batch, steps,
                                   DeriveSeed(cfg.seed, {0xba}));
    if (!batches.ok()) return Fail(batches.status());
    auto run = RunAcceleratedDpSrgd(p, *batches, cfg);
    if (!run.ok()) return Fail(run.status());
    const int t = static_cast<int>(picker() % steps);
    const size_t example = (*batches)[t][picker() % batch];
    const ZeroedProblem adjacent(p, {example});
    const std::vector<double> eta = ResolvedEta(cfg);
    // Both datasets share the iterates up to step t; afterwards the
    // comparison is conditioned on the released prefix sums, so only step t
    // differs.
    double max_diff = 0.0;
    for (int s = 0; s < steps; ++s) {
      const ParamVector& x = run->gradient_points[s];
      const ParamVector& x_prev =
          s == 0 ? x : run->gradient_points[s - 1];
      const double eta_prev = s == 0 ? 0.0 : eta[s - 1];
      auto a = SrgIncrement(p, x, x_prev, eta[s], eta_prev, (*batches)[s], kInf);
      auto b = SrgIncrement(adjacent, x, x_prev, eta[s], eta_prev,
                            (*batches)[s], kInf);
      if (!a.ok() || !b.ok()) return Fail(a.ok() ? b.status() : a.status());
      max_diff = std::max(max_diff, (*a - *b).norm() * batch);
    }
    const double bound = SensitivityBound(o.lipschitz, o.smoothness, r_diam,
                                          run->max_noise_norm);
    if (max_diff > bound) ++violations;
    worst_ratio = std::max(worst_ratio, max_diff / bound);
  }
  return {violations == 0, false,
          absl::StrFormat("50 pairs, violations=%d, max measured/bound=%.4f",
                          violations, worst_ratio)};
}

Outcome TreeTail() {
  const int steps = 16, dim = 4, trials = 1000;
  const double delta = 0.05;
  const double sigma = *CalibrateTreeSigma(1.0, 1.0, steps);
  const double bound = TreeErrorBound(1.0, 1.0, steps, dim, delta);
  int exceed = 0;
  const ParamVector zero = ParamVector::Zero(dim);
  for (int trial = 0; trial < trials; ++trial) {
    auto tree = TreeState::Create(steps, dim, sigma,
                                  DeriveSeed(0x7a11, {uint64_t(trial)}));
    if (!tree.ok()) return Fail(tree.status());
    double worst = 0.0;
    for (int i = 1; i <= steps; ++i) {
      if (auto s = tree->Ingest(i, zero); !s.ok()) return Fail(s);
      auto prefix = tree->PrefixSum(i);
      if (!prefix.ok()) return Fail(prefix.status());
      worst = std::max(worst, prefix->noise_only.norm());
    }
    if (worst > bound) ++exceed;
  }
  const double fraction = static_cast<double>(exceed) / trials;
  return {fraction <= delta, false,
          absl::StrFormat("bound=%.4f, exceed fraction=%.4f (limit %.2f)",
                          bound, fraction, delta)};
}

Outcome TreeUnbiased() {
  const int steps = 16, dim = 2, trials = 100000;
  const double sigma = *CalibrateTreeSigma(1.0, 1.0, steps);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, steps);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(dim, steps);
  const ParamVector zero = ParamVector::Zero(dim);
  for (int trial = 0; trial < trials; ++trial) {
    auto tree = TreeState::Create(steps, dim, sigma,
                                  DeriveSeed(0x0b1a5, {uint64_t(trial)}));
    if (!tree.ok()) return Fail(tree.status());
    for (int i = 1; i <= steps; ++i) {
      if (auto s = tree->Ingest(i, zero); !s.ok()) return Fail(s);
      auto prefix = tree->PrefixSum(i);
      if (!prefix.ok()) return Fail(prefix.status());
      sum.col(i - 1) += prefix->noise_only;
      sum_sq.col(i - 1) += prefix->noise_only.cwiseAbs2();
    }
  }
  double worst_z = 0.0;
  for (int i = 0; i < steps; ++i) {
    for (int k = 0; k < dim; ++k) {
      const double mean = sum(k, i) / trials;
      const double var =
          (sum_sq(k, i) - trials * mean * mean) / (trials - 1.0);
      const double se = std::sqrt(var / trials);
      worst_z = std::max(worst_z, std::abs(mean) / se);
    }
  }
  return {worst_z <= 4.0, false,
          absl::StrFormat("max |mean| / SE over %d prefixes x %d coords = %.3f "
                          "(limit 4)",
                          steps, dim, worst_z)};
}

Outcome VarianceGrowth() {
  SyntheticQuadraticOptions o;
  o.dim = 20;
  o.num_examples = 1000;
  o.radius = 1.0;
  o.lipschitz = 1.0;
  o.smoothness = 1.0;
  o.condition = 10.0;
  o.target_norm = 0.5;
  o.noise_scale = 0.0;
  o.curvature_spread = 0.5;
  o.seed = 6;
  auto problem = SyntheticQuadratic::Create(o);
  if (!problem.ok()) return Fail(problem.status());
  const ParamVector start = *(*problem)->minimizer();
  ParamVector velocity = ParamVector::Constant(o.dim, 1.0);
  velocity *= 0.01 / velocity.norm();
  auto probe = FrozenPathVarianceProbe(**problem, start, velocity, 1.0,
                                       /*batch=*/4, /*steps=*/64,
                                       /*seeds=*/100, /*seed=*/6);
  if (!probe.ok()) return Fail(probe.status());
  const LinearFit& fit = probe->fit;
  return {fit.r2 >= 0.9 && fit.slope > 0.0, false,
          absl::StrFormat("slope=%.4g, R^2=%.4f (need > 0 and >= 0.9)",
                          fit.slope, fit.r2)};
}

Outcome FactorizationQuality() {
  Outcome out{true, false, ""};
  for (int b : {8, 16, 32}) {
    auto workload = BuildWorkload(WorkloadKind::kOnes, 1, b, 0.0, 1.0);
    if (!workload.ok()) return Fail(workload.status());
    StrategyMetadata meta;
    meta.kind = WorkloadKind::kOnes;
    meta.epochs = 1;
    meta.batches = b;
    auto strategy = Factorize(*workload, meta, FactorizeOptions{});
    if (!strategy.ok()) return Fail(strategy.status());
    const double baseline = TreeBaselineObjective(*workload, 1, b);
    const double objective = strategy->objective();
    const bool ok = objective <= baseline && strategy->sensitivity() <= 1.0 + 1e-9;
    out.passed = out.passed && ok;
    absl::StrAppendFormat(&out.detail, "b=%d obj=%.6f tree=%.6f sens=%.12f; ",
                          b, objective, baseline, strategy->sensitivity());
  }
  return out;
}

double MaxTrajectoryGap(const RunRecord& a, const RunRecord& b) {
  if (a.steps.size() != b.steps.size()) return kInf;
  double gap = (a.output - b.output).lpNorm<Eigen::Infinity>();
  for (size_t t = 0; t < a.steps.size(); ++t) {
    gap = std::max(gap, std::abs(a.steps[t].loss - b.steps[t].loss));
  }
  return gap;
}

Outcome ReductionIdentities() {
  SyntheticQuadraticOptions o;
  o.dim = 5;
  o.num_examples = 40;
  o.condition = 10.0;
  o.noise_scale = 0.3;
  o.curvature_spread = 0.5;
  o.seed = 8;
  auto problem = SyntheticQuadratic::Create(o);
  if (!problem.ok()) return Fail(problem.status());
  const LossProblem& p = **problem;
  const int steps = 10;
  auto epoch = EpochBatches(p.num_examples(), steps);
  if (!epoch.ok()) return Fail(epoch.status());
  const double batch = static_cast<double>((*epoch)[0].size());
  const double clip = 0.5, rho = 2.0, lr = 0.3;
  const uint64_t seed = 99;

  // (a) DP-FTRL with C = I against DP-SGD with matching noise scale.
  const StrategyMatrix identity = StrategyMatrix::Identity(1, steps);
  auto ftrl = RunDpFtrl(p, *epoch, lr, clip, identity, rho,
                        ConstraintBall::Unbounded(), seed);
  auto sgd = RunDpSgd(p, *epoch, lr, clip, clip / (batch * std::sqrt(2.0 * rho)),
                      ConstraintBall::Unbounded(), seed);
  if (!ftrl.ok() || !sgd.ok()) {
    return Fail(ftrl.ok() ? sgd.status() : ftrl.status());
  }
  const double gap_a = MaxTrajectoryGap(*ftrl, *sgd);

  // (b) Momentum workload with gamma = 0 against the ones workload.
  auto ones = BuildWorkload(WorkloadKind::kOnes, 1, steps, 0.0, 1.0);
  auto momentum = BuildWorkload(WorkloadKind::kMomentum, 1, steps, 0.0, 1.0);
  if (!ones.ok() || !momentum.ok()) {
    return Fail(ones.ok() ? momentum.status() : ones.status());
  }
  double gap_b = (*ones - *momentum).cwiseAbs().maxCoeff();
  StrategyMetadata meta_ones;
  meta_ones.batches = steps;
  StrategyMetadata meta_momentum = meta_ones;
  meta_momentum.kind = WorkloadKind::kMomentum;
  FactorizeOptions fopts;
  fopts.iterations = 50;
  auto c_ones = Factorize(*ones, meta_ones, fopts);
  auto c_momentum = Factorize(*momentum, meta_momentum, fopts);
  if (!c_ones.ok() || !c_momentum.ok()) {
    return Fail(c_ones.ok() ? c_momentum.status() : c_ones.status());
  }
  MemfConfig cfg;
  cfg.epochs = 1;
  cfg.batches = steps;
  cfg.rho = rho;
  cfg.clip = clip;
  cfg.lr = lr;
  cfg.seed = seed;
  cfg.strategy = &*c_ones;
  auto run_ones = RunDpMemf(p, *epoch, cfg);
  cfg.strategy = &*c_momentum;
  auto run_momentum = RunDpMemf(p, *epoch, cfg);
  if (!run_ones.ok() || !run_momentum.ok()) {
    return Fail(run_ones.ok() ? run_momentum.status() : run_ones.status());
  }
  gap_b = std::max(gap_b, MaxTrajectoryGap(*run_ones, *run_momentum));

  // (c) DP-SRG-MEMF with c = 0 against DP-MEMF, noise-free and unclipped.
  cfg.strategy = &*c_ones;
  cfg.rho = kInf;
  cfg.clip = kInf;
  cfg.decay = 0.0;
  auto memf = RunDpMemf(p, *epoch, cfg);
  auto srg = RunDpSrgMemf(p, *epoch, cfg);
  if (!memf.ok() || !srg.ok()) return Fail(memf.ok() ? srg.status() : memf.status());
  const double gap_c = MaxTrajectoryGap(*memf, *srg);

  const double tol = 1e-12;
  return {gap_a <= tol && gap_b <= tol && gap_c <= tol, false,
          absl::StrFormat("ftrl(C=I) vs sgd gap=%.3g; momentum(0) vs ones "
                          "gap=%.3g; srg-memf(c=0) vs memf gap=%.3g (limit "
                          "1e-12)",
                          gap_a, gap_b, gap_c)};
}

bool RelClose(double a, double b, double tol) {
  if (a == b) return true;
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

double LogUniform(SplitMix64& g, double lo, double hi) {
  const double u = (g() >> 11) * 0x1.0p-53;
  return std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
}

// Independent transcriptions of the accounting formulas.
double DupClipNorm(double l, double m, double r) { return 4 * (l + 2 * m * r); }

double DupSigma(double l, double m, double r, double eps, double delta,
                double b, double beta, double t) {
  return 2 * std::sqrt(2.0) * DupClipNorm(l, m, r) *
         std::sqrt(std::log(t) * std::log(2.5 / delta)) / (eps * b * beta);
}

struct DupPlan {
  int64_t batch, steps;
  double beta;
};

DupPlan DupBatchAndBeta(double n, double l, double m, double r, double eps,
                        double delta, double d) {
  auto cap = [&](double t) {
    const double lt = std::log(t);
    if (lt <= 0) return kInf;
    return (l + 2 * m * r) * n * std::sqrt(n) * eps /
           (4 * std::sqrt(2.0) * r * std::sqrt(d) * lt * std::sqrt(lt) *
            std::sqrt(std::log(4 * t / delta) * std::log(2.5 / delta)));
  };
  auto pick = [&](double t) {
    return std::max<int64_t>(
        1, static_cast<int64_t>(std::floor(std::min(std::sqrt(n), cap(t)))));
  };
  auto ceil_div = [&](int64_t b) {
    return static_cast<int64_t>(std::ceil(n / static_cast<double>(b)));
  };
  const int64_t b0 = pick(std::sqrt(n));
  const int64_t b = pick(static_cast<double>(ceil_div(b0)));
  const double bb = static_cast<double>(b);
  return {b, ceil_div(b), m + (8 * l + 16 * m * r) * n * std::sqrt(n) / (r * bb * bb)};
}

Outcome AccountingFidelity() {
  SplitMix64 g(DeriveSeed(0xacc, {}));
  int mismatches = 0;
  std::string first;
  auto note = [&](bool ok, const std::string& what) {
    if (ok) return;
    if (mismatches++ == 0) first = what;
  };
  for (int i = 0; i < 100; ++i) {
    const double l = LogUniform(g, 0.1, 10), m = (i % 10 == 0) ? 0.0 : LogUniform(g, 0.1, 10);
    const double r = LogUniform(g, 0.1, 5), eps = LogUniform(g, 0.05, 10);
    const double delta = LogUniform(g, 1e-9, 1e-2), b = std::floor(LogUniform(g, 1, 1000));
    const double beta = LogUniform(g, 1, 1e4);
    const int64_t t = static_cast<int64_t>(LogUniform(g, 2, 1e5));
    const int64_t n = static_cast<int64_t>(LogUniform(g, 4, 1e7));
    const double d = std::floor(LogUniform(g, 1, 1e5));
    const double mu = LogUniform(g, 0.01, 10), rho = LogUniform(g, 0.01, 10);
    note(RelClose(ClipNorm(l, m, r), DupClipNorm(l, m, r), 1e-12),
         absl::StrCat("clip_norm at point ", i));
    note(RelClose(SrgdSigma(l, m, r, eps, delta, b, beta, t),
                  DupSigma(l, m, r, eps, delta, b, beta, double(t)), 1e-12),
         absl::StrCat("srgd_sigma at point ", i));
    auto plan = BatchAndBeta(n, l, m, r, eps, delta, d);
    const DupPlan dup = DupBatchAndBeta(double(n), l, m, r, eps, delta, d);
    note(plan.ok() && plan->batch == dup.batch && plan->steps == dup.steps &&
             RelClose(plan->beta, dup.beta, 1e-12),
         absl::StrCat("batch_and_beta at point ", i));
    note(RelClose(ZcdpToDp(rho, delta),
                  rho + 2 * std::sqrt(rho) * std::sqrt(-std::log(delta)), 1e-12),
         absl::StrCat("zcdp_to_dp at point ", i));
    note(RelClose(GdpToDp(mu, delta),
                  std::sqrt(2.0) * mu * std::sqrt(std::log(2.5) - std::log(delta)),
                  1e-12),
         absl::StrCat("gdp_to_dp at point ", i));
  }
  auto spot = BatchAndBeta(10000, 1.0, 1.0, 1.0, 1e6, 1e-6, 1.0);
  const bool spot_ok = spot.ok() && spot->batch == 100 && spot->steps == 100 &&
                       spot->beta == 2401.0;
  return {mismatches == 0 && spot_ok, false,
          absl::StrFormat("100-point grid mismatches=%d%s; spot B=%d T=%d "
                          "beta=%.17g (expect 100, 100, 2401)",
                          mismatches,
                          mismatches ? absl::StrCat(" (first: ", first, ")")
                                     : std::string(),
                          spot.ok() ? spot->batch : -1,
                          spot.ok() ? spot->steps : -1,
                          spot.ok() ? spot->beta : 0.0)};
}

Outcome FigureReproduction(const VerifyOptions& options) {
  if (!options.include_figure) return {false, true, "skipped: disabled"};
  std::string dir = options.data_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("DPSRG_DATA_DIR")) dir = env;
  }
  for (const char* f : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                        "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"}) {
    if (dir.empty() || !std::filesystem::exists(std::filesystem::path(dir) / f)) {
      return {false, true,
              absl::StrCat("skipped: MNIST idx files not found (set "
                           "DPSRG_DATA_DIR); missing ", f)};
    }
  }
  ExperimentSpec spec;
  spec.task = TaskKind::kMnist;
  spec.data_dir = dir;
  spec.algorithms = {{Algorithm::kDpSrgMemf, "true"},
                     {Algorithm::kDpMemf, "ones"}};
  spec.epsilon = 0.1;
  spec.delta = 1e-6;
  spec.batch_size = 500;
  spec.epochs = 1;
  spec.c = {std::exp(-2.5)};
  spec.lr = {0.5, 1.0, 2.0};
  spec.clip = {0.5, 1.0};
  spec.repeats = 20;
  spec.trajectories = false;
  spec.workers = options.workers;
  auto result = RunExperiment(spec);
  if (!result.ok()) return Fail(result.status());
  const MetricTable& table = result->table;
  if (table.best.size() != 2 || table.best[0] < 0 || table.best[1] < 0) {
    return {false, false, "no successful rows"};
  }
  const double srg = *table.rows[table.best[0]].acc_mean;
  const double memf = *table.rows[table.best[1]].acc_mean;
  const bool ok = std::abs(srg - 83.753) <= 1.5 && srg >= memf;
  return {ok, false,
          absl::StrFormat("srg-memf(true)=%.3f%% (target 83.753 +- 1.5), "
                          "memf(ones)=%.3f%%",
                          srg, memf)};
}

struct CriterionInfo {
  const char* name;
  double limit_seconds;
};

constexpr CriterionInfo kInfo[kNumCriteria] = {
    {"noiseless acceleration rate", 10},
    {"potential monotonicity", 5},
    {"sensitivity bound", 30},
    {"binary tree tail bound", 10},
    {"tree unbiasedness", 20},
    {"unaccelerated variance growth", 30},
    {"factorization quality", 60},
    {"reduction identities", 5},
    {"accounting formula fidelity", 5},
    {"figure reproduction", 4 * 3600},
};

}  // namespace

CriterionResult RunCriterion(int id, const VerifyOptions& options) {
  CriterionResult result;
  result.id = id;
  if (id < 1 || id > kNumCriteria) {
    result.detail = absl::StrCat("unknown criterion ", id);
    return result;
  }
  result.name = kInfo[id - 1].name;
  result.limit_seconds = kInfo[id - 1].limit_seconds;
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  switch (id) {
    case 1: outcome = AccelerationRate(); break;
    case 2: outcome = PotentialMonotone(); break;
    case 3: outcome = SensitivityCheck(); break;
    case 4: outcome = TreeTail(); break;
    case 5: outcome = TreeUnbiased(); break;
    case 6: outcome = VarianceGrowth(); break;
    case 7: outcome = FactorizationQuality(); break;
    case 8: outcome = ReductionIdentities(); break;
    case 9: outcome = AccountingFidelity(); break;
    case 10: outcome = FigureReproduction(options); break;
  }
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  result.skipped = outcome.skipped;
  result.detail = outcome.detail;
  result.passed = outcome.passed && result.seconds <= result.limit_seconds;
  if (outcome.passed && !result.passed) {
    absl::StrAppend(&result.detail, " [runtime limit exceeded]");
  }
  return result;
}

std::vector<CriterionResult> RunAcceptanceSuite(const VerifyOptions& options) {
  std::vector<CriterionResult> results;
  for (int id = 1; id <= kNumCriteria; ++id) {
    results.push_back(RunCriterion(id, options));
  }
  return results;
}

std::string FormatCriterion(const CriterionResult& r) {
  const char* tag = r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL");
  return absl::StrFormat("[%s] %d %s (%.2f s / %.0f s): %s", tag, r.id, r.name,
                         r.seconds, r.limit_seconds, r.detail);
}

}  // namespace dpsrg
