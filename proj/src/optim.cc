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

#include "dpsrg/optim.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>

#include "absl/strings/str_cat.h"
#include "dpsrg/random.h"
#include "dpsrg/status_macros.h"
#include "dpsrg/tree_mechanism.h"

namespace dpsrg {
namespace {

// Stream keys separating the randomness of different consumers of a seed.
constexpr uint64_t kTreeKey = 0x7472;
constexpr uint64_t kProbeKey = 0x7072;
constexpr uint64_t kShuffleKey = 0x7368;

absl::Status NonFinite(int step) {
  return absl::OutOfRangeError(
      absl::StrCat("non-finite iterate at step ", step, "; run aborted"));
}

absl::Status CheckBatchCount(const BatchList& batches, int steps) {
  if (static_cast<int>(batches.size()) < steps) {
    return absl::FailedPreconditionError(
        absl::StrCat("batch stream exhausted: ", batches.size(),
                     " batches for ", steps, " steps"));
  }
  return absl::OkStatus();
}

absl::Status CheckSinglePass(const BatchList& batches, int steps, size_t n) {
  std::vector<bool> seen(n, false);
  for (int t = 0; t < steps; ++t) {
    if (batches[t].empty()) {
      return absl::InvalidArgumentError(absl::StrCat("batch ", t, " is empty"));
    }
    for (size_t i : batches[t]) {
      if (i >= n) {
        return absl::OutOfRangeError(
            absl::StrCat("example index ", i, " out of range"));
      }
      if (seen[i]) {
        return absl::FailedPreconditionError(absl::StrCat(
            "example ", i, " appears in more than one batch; a single pass "
            "requires disjoint batches"));
      }
      seen[i] = true;
    }
  }
  return absl::OkStatus();
}

std::optional<double> QNorm(const LossProblem& problem,
                            const ParamVector& estimate, const ParamVector& x) {
  if (auto g = problem.PopulationGradient(x)) return (estimate - *g).norm();
  return std::nullopt;
}

Batch SampleWithReplacement(SplitMix64& engine, size_t n, int batch) {
  std::uniform_int_distribution<size_t> pick(0, n - 1);
  Batch out(batch);
  for (auto& i : out) i = pick(engine);
  return out;
}

// Shared body of the accelerated method. `srg` selects the SRG estimator with
// tree noise; otherwise fresh gradients with independent noise.
absl::StatusOr<RunRecord> RunAccelerated(const LossProblem& problem,
                                         const BatchList& batches,
                                         const SrgdConfig& cfg, bool srg) {
  RETURN_IF_ERROR(ValidateSrgdConfig(cfg, problem));
  RETURN_IF_ERROR(CheckBatchCount(batches, cfg.steps));
  // Disjointness carries the privacy argument; noise-free runs may reuse
  // examples (e.g. full-batch optimisation).
  if (srg && cfg.sigma > 0.0) {
    RETURN_IF_ERROR(
        CheckSinglePass(batches, cfg.steps, problem.num_examples()));
  }
  const std::vector<double> eta = ResolvedEta(cfg);
  const std::vector<double> tau = ResolvedTau(cfg);
  const Eigen::Index d = problem.dim();
  ASSIGN_OR_RETURN(TreeState tree,
                   TreeState::Create(std::max(cfg.steps, 1), d, cfg.sigma,
                                     DeriveSeed(cfg.seed, {kTreeKey})));

  ParamVector x = ParamVector::Zero(d);
  ParamVector y = x, z = x, x_prev = x;
  RunRecord record;
  record.initial_phi = Potential(problem, y, z, 0.0, cfg.beta);
  double eta_sum = 0.0;
  for (int t = 0; t < cfg.steps; ++t) {
    const Batch& batch = batches[t];
    if (cfg.keep_gradient_points) record.gradient_points.push_back(x);
    StepRecord step;
    ASSIGN_OR_RETURN(step.loss, BatchLoss(problem, x, batch));

    ParamVector grad;   // noisy gradient used by the update
    ParamVector clean;  // its noise-free part
    ParamVector noise;  // b_t
    if (srg) {
      ASSIGN_OR_RETURN(
          ParamVector delta,
          SrgIncrement(problem, x, x_prev, eta[t], t == 0 ? 0.0 : eta[t - 1],
                       batch, cfg.clip));
      RETURN_IF_ERROR(tree.Ingest(t + 1, delta));
      ASSIGN_OR_RETURN(TreeState::Prefix prefix, tree.PrefixSum(t + 1));
      grad = prefix.estimate / eta[t];
      clean = (prefix.estimate - prefix.noise_only) / eta[t];
      noise = -prefix.noise_only / cfg.beta;
    } else {
      ASSIGN_OR_RETURN(clean, ClippedBatchGrad(problem, x, batch, cfg.clip));
      ParamVector xi = ParamVector::Zero(d);
      if (cfg.sigma > 0.0) {
        xi = KeyedGaussian(cfg.seed, {kTreeKey, static_cast<uint64_t>(t)}, d,
                           cfg.sigma);
      }
      grad = clean + xi;
      noise = -(eta[t] / cfg.beta) * xi;
    }
    step.grad_norm = grad.norm();
    step.noise_norm = noise.norm();
    step.q_norm = QNorm(problem, clean, x);
    record.max_noise_norm = std::max(record.max_noise_norm, *step.noise_norm);

    ASSIGN_OR_RETURN(ParamVector z_next,
                     ProjectBall(z - (eta[t] / cfg.beta) * grad, cfg.ball));
    ASSIGN_OR_RETURN(ParamVector y_next,
                     ProjectBall(x - grad / cfg.beta, cfg.ball));
    ASSIGN_OR_RETURN(ParamVector x_next,
                     Interpolate(y_next, z_next, tau[t + 1]));
    if (!AllFinite(x_next)) return NonFinite(t);
    x_prev = std::move(x);
    x = std::move(x_next);
    y = std::move(y_next);
    z = std::move(z_next);
    eta_sum += eta[t];
    step.phi = Potential(problem, y, z, eta_sum, cfg.beta);
    step.excess = problem.ExactExcess(y);
    record.steps.push_back(std::move(step));
  }
  record.output = y;
  Finalize(problem, record);
  return record;
}

}  // namespace

absl::StatusOr<BatchList> DisjointBatches(size_t n, int batch, int steps,
                                          std::optional<uint64_t> shuffle_seed) {
  if (batch < 1 || steps < 1) {
    return absl::InvalidArgumentError("batch and steps must be >= 1");
  }
  if (static_cast<size_t>(batch) * static_cast<size_t>(steps) > n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "B * T = ", batch * steps, " exceeds the ", n, " available examples"));
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  if (shuffle_seed) {
    SplitMix64 engine(DeriveSeed(*shuffle_seed, {kShuffleKey}));
    std::shuffle(order.begin(), order.end(), engine);
  }
  BatchList out(steps);
  for (int t = 0; t < steps; ++t) {
    out[t].assign(order.begin() + static_cast<ptrdiff_t>(t) * batch,
                  order.begin() + static_cast<ptrdiff_t>(t + 1) * batch);
  }
  return out;
}

absl::StatusOr<BatchList> EpochBatches(size_t n, int batches) {
  if (batches < 1 || static_cast<size_t>(batches) > n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "cannot split ", n, " examples into ", batches, " batches"));
  }
  const size_t size = n / batches;
  BatchList out(batches);
  for (int j = 0; j < batches; ++j) {
    const size_t begin = j * size;
    const size_t end = (j + 1 == batches) ? n : begin + size;
    for (size_t i = begin; i < end; ++i) out[j].push_back(i);
  }
  return out;
}

void Finalize(const LossProblem& problem, RunRecord& record) {
  if (!AllFinite(record.output)) return;
  if (auto exact = problem.ExactExcess(record.output)) {
    record.excess = *exact;
  } else if (auto loss = problem.HeldOutLoss(record.output)) {
    record.excess = *loss;
  }
  record.accuracy = problem.HeldOutAccuracy(record.output);
}

std::vector<double> ResolvedEta(const SrgdConfig& cfg) {
  if (!cfg.eta.empty()) return cfg.eta;
  std::vector<double> eta(cfg.steps + 1);
  for (int t = 0; t <= cfg.steps; ++t) eta[t] = t + 1.0;
  return eta;
}

std::vector<double> ResolvedTau(const SrgdConfig& cfg) {
  if (!cfg.tau.empty()) return cfg.tau;
  const std::vector<double> eta = ResolvedEta(cfg);
  std::vector<double> tau(eta.size());
  double sum = 0.0;
  for (size_t t = 0; t < eta.size(); ++t) {
    sum += eta[t];
    tau[t] = eta[t] / sum;
  }
  return tau;
}

absl::Status ValidateSrgdConfig(const SrgdConfig& cfg,
                                const LossProblem& problem) {
  if (cfg.steps < 1 || cfg.batch < 1) {
    return absl::InvalidArgumentError("T and B must be >= 1");
  }
  const size_t expected = static_cast<size_t>(cfg.steps) + 1;
  if (!cfg.eta.empty() && cfg.eta.size() != expected) {
    return absl::InvalidArgumentError(
        absl::StrCat("eta schedule needs T + 1 = ", expected, " entries"));
  }
  if (!cfg.tau.empty() && cfg.tau.size() != expected) {
    return absl::InvalidArgumentError(
        absl::StrCat("tau schedule needs T + 1 = ", expected, " entries"));
  }
  const std::vector<double> eta = ResolvedEta(cfg);
  double sum = 0.0;
  for (size_t t = 0; t < eta.size(); ++t) {
    if (!(eta[t] > 0.0) || !std::isfinite(eta[t])) {
      return absl::InvalidArgumentError(
          absl::StrCat("eta_", t, " must be positive and finite"));
    }
    if (t > 0 && eta[t] < eta[t - 1]) {
      return absl::InvalidArgumentError(
          absl::StrCat("eta must be nondecreasing; eta_", t, " < eta_", t - 1));
    }
    sum += eta[t];
    if (eta[t] * eta[t] > 4.0 * sum) {
      return absl::InvalidArgumentError(absl::StrCat(
          "schedule violates eta_t^2 <= 4 eta_{0:t} at t = ", t));
    }
  }
  for (double tau : ResolvedTau(cfg)) {
    if (!(tau >= 0.0 && tau <= 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("tau must lie in [0, 1], got ", tau));
    }
  }
  if (!(cfg.beta >= problem.smoothness()) || !std::isfinite(cfg.beta)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "beta = ", cfg.beta, " must be finite and >= M = ",
        problem.smoothness()));
  }
  if (!(cfg.sigma >= 0.0) || !std::isfinite(cfg.sigma)) {
    return absl::InvalidArgumentError("sigma must be finite and >= 0");
  }
  if (!(cfg.clip > 0.0)) return absl::InvalidArgumentError("clip must be > 0");
  return absl::OkStatus();
}

std::optional<double> Potential(const LossProblem& problem,
                                const ParamVector& y, const ParamVector& z,
                                double eta_prefix_sum, double beta) {
  const std::optional<ParamVector> x_star = problem.minimizer();
  const std::optional<double> excess = problem.ExactExcess(y);
  if (!x_star || !excess) return std::nullopt;
  return eta_prefix_sum * *excess + 2.0 * beta * (z - *x_star).squaredNorm();
}

absl::StatusOr<RunRecord> RunAcceleratedDpSrgd(const LossProblem& problem,
                                               const BatchList& batches,
                                               const SrgdConfig& cfg) {
  return RunAccelerated(problem, batches, cfg, /*srg=*/true);
}

absl::StatusOr<RunRecord> RunIndependentVariant(const LossProblem& problem,
                                                const BatchList& batches,
                                                const SrgdConfig& cfg) {
  return RunAccelerated(problem, batches, cfg, /*srg=*/false);
}

LinearFit FitLine(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit fit;
  const size_t n = std::min(x.size(), y.size());
  if (n < 2) return fit;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

namespace {

// Accumulates per-checkpoint sample mean/variance of vectors (Welford).
class TraceVariance {
 public:
  TraceVariance(size_t slots, Eigen::Index dim)
      : count_(slots, 0),
        mean_(slots, ParamVector::Zero(dim)),
        m2_(slots, ParamVector::Zero(dim)) {}

  void Add(size_t slot, const ParamVector& v) {
    ++count_[slot];
    const ParamVector diff = v - mean_[slot];
    mean_[slot] += diff / static_cast<double>(count_[slot]);
    m2_[slot] += diff.cwiseProduct(v - mean_[slot]);
  }
  double Variance(size_t slot) const {
    if (count_[slot] < 2) return 0.0;
    return m2_[slot].sum() / static_cast<double>(count_[slot] - 1);
  }

 private:
  std::vector<int> count_;
  std::vector<ParamVector> mean_;
  std::vector<ParamVector> m2_;
};

double DecayAt(const UnacceleratedConfig& cfg, int t) {
  return cfg.decay.size() == 1 ? cfg.decay[0] : cfg.decay[t];
}

// One unaccelerated SRG run; `on_step(t, grad_t)` observes each estimate.
template <typename OnStep>
absl::StatusOr<RunRecord> UnacceleratedBody(const LossProblem& problem,
                                            const BatchList& batches,
                                            const UnacceleratedConfig& cfg,
                                            OnStep on_step) {
  const Eigen::Index d = problem.dim();
  ParamVector x = ParamVector::Zero(d), x_prev = x;
  ParamVector sum = ParamVector::Zero(d);
  RunRecord record;
  for (int t = 0; t < cfg.steps; ++t) {
    const double c_t = DecayAt(cfg, t);
    const double c_prev = t == 0 ? 0.0 : DecayAt(cfg, t - 1);
    StepRecord step;
    ASSIGN_OR_RETURN(step.loss, BatchLoss(problem, x, batches[t]));
    ASSIGN_OR_RETURN(
        ParamVector delta,
        SrgIncrement(problem, x, x_prev, c_t, c_prev, batches[t],
                     std::numeric_limits<double>::infinity()));
    sum += delta;
    const ParamVector grad = sum / c_t;
    on_step(t, grad);
    step.grad_norm = grad.norm();
    step.q_norm = QNorm(problem, grad, x);
    ASSIGN_OR_RETURN(ParamVector x_next, ProjectBall(x - cfg.lr * grad, cfg.ball));
    if (!AllFinite(x_next)) return NonFinite(t);
    x_prev = std::move(x);
    x = std::move(x_next);
    step.excess = problem.ExactExcess(x);
    record.steps.push_back(std::move(step));
  }
  record.output = x;
  Finalize(problem, record);
  return record;
}

}  // namespace

absl::StatusOr<RunRecord> RunUnacceleratedSrgd(const LossProblem& problem,
                                               const BatchList& batches,
                                               const UnacceleratedConfig& cfg,
                                               VarianceProbe* probe) {
  if (cfg.steps < 1 || cfg.batch < 1) {
    return absl::InvalidArgumentError("T and B must be >= 1");
  }
  if (cfg.decay.empty() ||
      (cfg.decay.size() != 1 &&
       cfg.decay.size() != static_cast<size_t>(cfg.steps))) {
    return absl::InvalidArgumentError("decay needs 1 or T entries");
  }
  for (double c : cfg.decay) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      return absl::InvalidArgumentError("decay entries must be positive");
    }
  }
  if (!(cfg.lr >= 0.0)) return absl::InvalidArgumentError("lr must be >= 0");
  RETURN_IF_ERROR(CheckBatchCount(batches, cfg.steps));
  ASSIGN_OR_RETURN(RunRecord record,
                   UnacceleratedBody(problem, batches, cfg,
                                     [](int, const ParamVector&) {}));
  if (probe == nullptr || cfg.probe_seeds < 2) return record;

  probe->checkpoints.clear();
  for (int q = 1; q <= 4; ++q) {
    probe->checkpoints.push_back(std::max(1, q * cfg.steps / 4));
  }
  TraceVariance acc(probe->checkpoints.size(), problem.dim());
  for (int s = 0; s < cfg.probe_seeds; ++s) {
    SplitMix64 engine(
        DeriveSeed(cfg.seed, {kProbeKey, static_cast<uint64_t>(s)}));
    BatchList draws(cfg.steps);
    for (auto& b : draws) {
      b = SampleWithReplacement(engine, problem.num_examples(), cfg.batch);
    }
    RETURN_IF_ERROR(
        UnacceleratedBody(problem, draws, cfg,
                          [&](int t, const ParamVector& grad) {
                            for (size_t k = 0; k < probe->checkpoints.size();
                                 ++k) {
                              if (probe->checkpoints[k] == t + 1) {
                                acc.Add(k, grad);
                              }
                            }
                          })
            .status());
  }
  probe->variance.clear();
  std::vector<double> ts;
  for (size_t k = 0; k < probe->checkpoints.size(); ++k) {
    probe->variance.push_back(acc.Variance(k));
    ts.push_back(probe->checkpoints[k]);
  }
  probe->fit = FitLine(ts, probe->variance);
  return record;
}

absl::StatusOr<VarianceProbe> FrozenPathVarianceProbe(
    const LossProblem& problem, const ParamVector& start,
    const ParamVector& velocity, double decay, int batch, int steps,
    int seeds, uint64_t seed) {
  if (start.size() != problem.dim() || velocity.size() != problem.dim()) {
    return absl::InvalidArgumentError("path dimension mismatch");
  }
  if (!(decay > 0.0) || batch < 1 || steps < 2 || seeds < 2) {
    return absl::InvalidArgumentError(
        "need decay > 0, B >= 1, T >= 2 and at least 2 seeds");
  }
  TraceVariance acc(steps, problem.dim());
  const double inf = std::numeric_limits<double>::infinity();
  for (int s = 0; s < seeds; ++s) {
    SplitMix64 engine(DeriveSeed(seed, {kProbeKey, static_cast<uint64_t>(s)}));
    ParamVector sum = ParamVector::Zero(problem.dim());
    for (int t = 0; t < steps; ++t) {
      const Batch b =
          SampleWithReplacement(engine, problem.num_examples(), batch);
      const ParamVector x_t = start + static_cast<double>(t) * velocity;
      const ParamVector x_prev = start + static_cast<double>(t - 1) * velocity;
      ASSIGN_OR_RETURN(ParamVector delta,
                       SrgIncrement(problem, x_t, x_prev, decay,
                                    t == 0 ? 0.0 : decay, b, inf));
      sum += delta;
      acc.Add(t, sum / decay);
    }
  }
  VarianceProbe probe;
  std::vector<double> ts;
  for (int t = 0; t < steps; ++t) {
    probe.checkpoints.push_back(t);
    probe.variance.push_back(acc.Variance(t));
    ts.push_back(t);
  }
  probe.fit = FitLine(ts, probe.variance);
  return probe;
}

namespace {

// Noise source for the SGD-style baselines: returns b_t for a batch size.
struct NoiseSource {
  virtual ~NoiseSource() = default;
  virtual absl::StatusOr<std::optional<ParamVector>> Next(int t,
                                                          size_t batch) = 0;
};

absl::StatusOr<RunRecord> RunNoisySgd(const LossProblem& problem,
                                      const BatchList& batches, int steps,
                                      double lr, double clip,
                                      const ConstraintBall& ball,
                                      NoiseSource& noise) {
  if (!(lr >= 0.0)) return absl::InvalidArgumentError("lr must be >= 0");
  if (!(clip > 0.0)) return absl::InvalidArgumentError("clip must be > 0");
  RETURN_IF_ERROR(CheckBatchCount(batches, steps));
  ParamVector x = ParamVector::Zero(problem.dim());
  RunRecord record;
  for (int t = 0; t < steps; ++t) {
    StepRecord step;
    ASSIGN_OR_RETURN(step.loss, BatchLoss(problem, x, batches[t]));
    ASSIGN_OR_RETURN(ParamVector g,
                     ClippedBatchGrad(problem, x, batches[t], clip));
    ASSIGN_OR_RETURN(std::optional<ParamVector> b,
                     noise.Next(t, batches[t].size()));
    if (b) {
      g += *b;
      step.noise_norm = b->norm();
      record.max_noise_norm = std::max(record.max_noise_norm, b->norm());
    }
    step.grad_norm = g.norm();
    ASSIGN_OR_RETURN(ParamVector x_next, ProjectBall(x - lr * g, ball));
    if (!AllFinite(x_next)) return NonFinite(t);
    x = std::move(x_next);
    step.excess = problem.ExactExcess(x);
    record.steps.push_back(std::move(step));
  }
  record.output = x;
  Finalize(problem, record);
  return record;
}

class IndependentNoise : public NoiseSource {
 public:
  IndependentNoise(double sigma, Eigen::Index dim, uint64_t seed)
      : sigma_(sigma), dim_(dim), seed_(seed) {}
  absl::StatusOr<std::optional<ParamVector>> Next(int t, size_t) override {
    if (sigma_ == 0.0) return std::optional<ParamVector>();
    return std::optional<ParamVector>(
        sigma_ * KeyedGaussian(seed_, {static_cast<uint64_t>(t)}, dim_));
  }

 private:
  double sigma_;
  Eigen::Index dim_;
  uint64_t seed_;
};

// (clip / B) rows of C^{-1} Z; absent when rho is infinite.
class CorrelatedNoise : public NoiseSource {
 public:
  static absl::StatusOr<CorrelatedNoise> Create(const StrategyMatrix& strategy,
                                                double rho, double clip,
                                                Eigen::Index dim,
                                                uint64_t seed) {
    if (std::isinf(rho) && rho > 0.0) {
      return CorrelatedNoise(std::nullopt, clip);
    }
    if (std::isinf(clip)) {
      return absl::InvalidArgumentError(
          "finite privacy budget requires a finite clip norm");
    }
    ASSIGN_OR_RETURN(MfNoiseStream stream,
                     MfNoiseStream::Create(strategy, rho, dim, seed));
    return CorrelatedNoise(std::move(stream), clip);
  }

  absl::StatusOr<std::optional<ParamVector>> Next(int, size_t batch) override {
    if (!stream_) return std::optional<ParamVector>();
    ASSIGN_OR_RETURN(ParamVector row, stream_->Next());
    return std::optional<ParamVector>((clip_ / static_cast<double>(batch)) *
                                      row);
  }

 private:
  CorrelatedNoise(std::optional<MfNoiseStream> stream, double clip)
      : stream_(std::move(stream)), clip_(clip) {}
  std::optional<MfNoiseStream> stream_;
  double clip_;
};

}  // namespace

absl::StatusOr<RunRecord> RunDpSgd(const LossProblem& problem,
                                   const BatchList& batches, double lr,
                                   double clip, double sigma,
                                   const ConstraintBall& ball, uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError("sigma must be finite and >= 0");
  }
  IndependentNoise noise(sigma, problem.dim(), seed);
  return RunNoisySgd(problem, batches, static_cast<int>(batches.size()), lr,
                     clip, ball, noise);
}

absl::StatusOr<RunRecord> RunDpFtrl(const LossProblem& problem,
                                    const BatchList& batches, double lr,
                                    double clip, const StrategyMatrix& strategy,
                                    double rho, const ConstraintBall& ball,
                                    uint64_t seed) {
  if (static_cast<int>(batches.size()) != strategy.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "strategy of size ", strategy.size(), " cannot drive ",
        batches.size(), " steps"));
  }
  ASSIGN_OR_RETURN(CorrelatedNoise noise,
                   CorrelatedNoise::Create(strategy, rho, clip, problem.dim(),
                                           seed));
  return RunNoisySgd(problem, batches, strategy.size(), lr, clip, ball, noise);
}

absl::Status ValidateMemfConfig(const MemfConfig& cfg) {
  if (cfg.strategy == nullptr) {
    return absl::InvalidArgumentError("MEMF needs a strategy matrix");
  }
  if (cfg.epochs < 1 || cfg.batches < 1) {
    return absl::InvalidArgumentError("epochs and batches must be >= 1");
  }
  if (cfg.strategy->size() != cfg.epochs * cfg.batches ||
      cfg.strategy->meta().epochs != cfg.epochs ||
      cfg.strategy->meta().batches != cfg.batches) {
    return absl::InvalidArgumentError(absl::StrCat(
        "strategy shape (k=", cfg.strategy->meta().epochs,
        ", b=", cfg.strategy->meta().batches, ") does not match run (k=",
        cfg.epochs, ", b=", cfg.batches, ")"));
  }
  if (cfg.strategy->sensitivity() > 1.0 + 1e-9) {
    return absl::InvalidArgumentError(absl::StrCat(
        "strategy sensitivity ", cfg.strategy->sensitivity(), " exceeds 1"));
  }
  if (!(cfg.rho > 0.0)) return absl::InvalidArgumentError("rho must be > 0");
  if (!(cfg.clip > 0.0)) return absl::InvalidArgumentError("clip must be > 0");
  if (!(cfg.decay >= 0.0 && cfg.decay <= 1.0)) {
    return absl::InvalidArgumentError("decay must lie in [0, 1]");
  }
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    return absl::InvalidArgumentError("momentum must lie in [0, 1)");
  }
  if (!(cfg.lr >= 0.0) || !std::isfinite(cfg.lr)) {
    return absl::InvalidArgumentError("lr must be finite and >= 0");
  }
  return absl::OkStatus();
}

namespace {

absl::StatusOr<RunRecord> RunMemf(const LossProblem& problem,
                                  const BatchList& batches,
                                  const MemfConfig& cfg, bool srg) {
  RETURN_IF_ERROR(ValidateMemfConfig(cfg));
  if (static_cast<int>(batches.size()) != cfg.batches) {
    return absl::InvalidArgumentError(absl::StrCat(
        "expected ", cfg.batches, " batches per epoch, got ", batches.size()));
  }
  ASSIGN_OR_RETURN(CorrelatedNoise noise,
                   CorrelatedNoise::Create(*cfg.strategy, cfg.rho, cfg.clip,
                                           problem.dim(), cfg.seed));
  const Eigen::Index d = problem.dim();
  ParamVector x = ParamVector::Zero(d), x_prev = x;
  ParamVector velocity = ParamVector::Zero(d);
  ParamVector grad = ParamVector::Zero(d);  // SRG recursion state
  RunRecord record;
  const int steps = cfg.epochs * cfg.batches;
  for (int t = 0; t < steps; ++t) {
    const Batch& batch = batches[t % cfg.batches];
    StepRecord step;
    ASSIGN_OR_RETURN(step.loss, BatchLoss(problem, x, batch));
    ASSIGN_OR_RETURN(std::optional<ParamVector> b, noise.Next(t, batch.size()));
    ParamVector update;
    if (srg) {
      ASSIGN_OR_RETURN(ParamVector delta,
                       SrgIncrement(problem, x, x_prev, 1.0,
                                    t == 0 ? 0.0 : cfg.decay, batch, cfg.clip));
      if (b) delta += *b;
      grad = cfg.decay * grad + delta;
      update = grad;
      if (b && cfg.add_noise_twice) update += *b;
    } else {
      ASSIGN_OR_RETURN(update, ClippedBatchGrad(problem, x, batch, cfg.clip));
      if (b) update += *b;
    }
    if (b) {
      step.noise_norm = b->norm();
      record.max_noise_norm = std::max(record.max_noise_norm, b->norm());
    }
    step.grad_norm = update.norm();
    velocity = cfg.momentum * velocity + update;
    ASSIGN_OR_RETURN(ParamVector x_next,
                     ProjectBall(x - cfg.lr * velocity, cfg.ball));
    if (!AllFinite(x_next)) return NonFinite(t);
    x_prev = std::move(x);
    x = std::move(x_next);
    step.excess = problem.ExactExcess(x);
    record.steps.push_back(std::move(step));
  }
  record.output = x;
  Finalize(problem, record);
  return record;
}

}  // namespace

absl::StatusOr<RunRecord> RunDpMemf(const LossProblem& problem,
                                    const BatchList& batches,
                                    const MemfConfig& cfg) {
  return RunMemf(problem, batches, cfg, /*srg=*/false);
}

absl::StatusOr<RunRecord> RunDpSrgMemf(const LossProblem& problem,
                                       const BatchList& batches,
                                       const MemfConfig& cfg) {
  return RunMemf(problem, batches, cfg, /*srg=*/true);
}

}  // namespace dpsrg
