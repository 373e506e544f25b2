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

#ifndef DPSRG_OPTIM_H_
#define DPSRG_OPTIM_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsrg/geometry.h"
#include "dpsrg/matrix_mechanism.h"
#include "dpsrg/objectives.h"

namespace dpsrg {

using Batch = std::vector<size_t>;
using BatchList = std::vector<Batch>;

// T consecutive disjoint batches of size B over examples [0, n), optionally
// after a seeded shuffle. Requires B * T <= n.
absl::StatusOr<BatchList> DisjointBatches(size_t n, int batch, int steps,
                                          std::optional<uint64_t> shuffle_seed);
// The b batches of one epoch covering all n examples in fixed order; the
// last batch absorbs the remainder.
absl::StatusOr<BatchList> EpochBatches(size_t n, int batches);

struct StepRecord {
  double loss = 0.0;                  // mean training loss on the step batch
  std::optional<double> phi;          // potential after the step
  std::optional<double> noise_norm;   // ||b_t||
  double grad_norm = 0.0;             // norm of the gradient handed to update
  std::optional<double> q_norm;       // ||grad_t - grad F(x_t)|| (noise-free)
  std::optional<double> excess;       // excess risk of the output iterate
};

struct RunRecord {
  std::vector<StepRecord> steps;
  std::optional<double> initial_phi;
  ParamVector output;  // y_T for the accelerated methods, x_T otherwise
  std::optional<double> excess;
  std::optional<double> accuracy;
  // max_t ||b_t|| over the run (0 for noise-free runs).
  double max_noise_norm = 0.0;
  // Iterates x_0..x_{T-1} at which gradients were taken (kept on request).
  std::vector<ParamVector> gradient_points;
};

// Fills excess/accuracy of `record` from the problem's evaluation hooks.
void Finalize(const LossProblem& problem, RunRecord& record);

struct SrgdConfig {
  int steps = 1;  // T
  int batch = 1;  // B
  // eta_0..eta_T; empty selects eta_t = t + 1.
  std::vector<double> eta;
  double beta = 1.0;
  // tau_0..tau_T; empty selects tau_t = eta_t / eta_{0:t}.
  std::vector<double> tau;
  // Std of the tree node noise on the mean-increment scale (the prefix
  // noise xi_t is in units of sum_i Delta_i).
  double sigma = 0.0;
  double clip = std::numeric_limits<double>::infinity();
  ConstraintBall ball = ConstraintBall::Unbounded();
  uint64_t seed = 0;
  bool keep_gradient_points = false;
};

// Schedules with defaults resolved (length T + 1).
std::vector<double> ResolvedEta(const SrgdConfig& cfg);
std::vector<double> ResolvedTau(const SrgdConfig& cfg);
// eta nondecreasing and positive, eta_t^2 <= 4 eta_{0:t}, tau in [0, 1],
// beta >= M, and shape checks.
absl::Status ValidateSrgdConfig(const SrgdConfig& cfg,
                                const LossProblem& problem);

// Phi_t = eta_{0:t-1} (F(y_t) - F*) + 2 beta ||z_t - x*||^2. Absent when the
// problem has no closed-form minimiser.
std::optional<double> Potential(const LossProblem& problem,
                                const ParamVector& y, const ParamVector& z,
                                double eta_prefix_sum, double beta);

// Accelerated DP-SRGD with binary-tree prefix noise. `batches` must hold at
// least T disjoint batches; batch t feeds step t.
absl::StatusOr<RunRecord> RunAcceleratedDpSrgd(const LossProblem& problem,
                                               const BatchList& batches,
                                               const SrgdConfig& cfg);

// Same updates with the fresh minibatch gradient at x_t in place of the SRG
// estimate, and independent N(0, sigma^2 I) noise per step.
absl::StatusOr<RunRecord> RunIndependentVariant(const LossProblem& problem,
                                                const BatchList& batches,
                                                const SrgdConfig& cfg);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit FitLine(const std::vector<double>& x, const std::vector<double>& y);

struct VarianceProbe {
  std::vector<int> checkpoints;
  std::vector<double> variance;  // trace covariance of grad_t across seeds
  LinearFit fit;
};

struct UnacceleratedConfig {
  int steps = 1;
  int batch = 1;
  double lr = 0.0;
  // c_0..c_{T-1}; a single entry means constant.
  std::vector<double> decay = {1.0};
  ConstraintBall ball = ConstraintBall::Unbounded();
  uint64_t seed = 0;
  // Seeds for the variance probe at t in {T/4, T/2, 3T/4, T}; each seed
  // redraws i.i.d. batches with replacement and reruns the method.
  int probe_seeds = 0;
};

// Projected SGD on SRG estimates grad_t = sum_{i<=t} Delta_i / c_t with
// Delta_t = c_t grad f(x_t, B_t) - c_{t-1} grad f(x_{t-1}, B_t).
absl::StatusOr<RunRecord> RunUnacceleratedSrgd(const LossProblem& problem,
                                               const BatchList& batches,
                                               const UnacceleratedConfig& cfg,
                                               VarianceProbe* probe);

// SRG estimator along a fixed path x_t = x_0 + t v shared by all seeds, with
// i.i.d. with-replacement batches per seed. Returns Var(grad_t) for every
// t in [0, T) and its linear fit.
absl::StatusOr<VarianceProbe> FrozenPathVarianceProbe(
    const LossProblem& problem, const ParamVector& start,
    const ParamVector& velocity, double decay, int batch, int steps,
    int seeds, uint64_t seed);

// DP-SGD: x_{t+1} = Pi(x_t - lr (g_t + b_t)), g_t the clipped mean gradient,
// b_t = sigma * (standard normal from the stream keyed by (seed, t)).
absl::StatusOr<RunRecord> RunDpSgd(const LossProblem& problem,
                                   const BatchList& batches, double lr,
                                   double clip, double sigma,
                                   const ConstraintBall& ball, uint64_t seed);

// As RunDpSgd with b_t = (clip / B) (C^{-1} Z)_t, Z ~ N(0, 1/(2 rho)).
absl::StatusOr<RunRecord> RunDpFtrl(const LossProblem& problem,
                                    const BatchList& batches, double lr,
                                    double clip, const StrategyMatrix& strategy,
                                    double rho, const ConstraintBall& ball,
                                    uint64_t seed);

struct MemfConfig {
  int epochs = 1;   // k
  int batches = 1;  // b
  const StrategyMatrix* strategy = nullptr;  // size k b, sens <= 1
  double rho = std::numeric_limits<double>::infinity();
  double clip = std::numeric_limits<double>::infinity();
  double decay = 1.0;     // c
  double momentum = 0.9;  // gamma
  double lr = 0.1;
  ConstraintBall ball = ConstraintBall::Unbounded();
  uint64_t seed = 0;
  // Hand grad_t + (C^{-1}Z)_t to the optimiser (the noise appears twice);
  // false hands grad_t alone.
  bool add_noise_twice = true;
};

absl::Status ValidateMemfConfig(const MemfConfig& cfg);

// Multi-epoch matrix factorisation with SGD + momentum. `batches` holds the
// b batches of one epoch, replayed in order k times; step t = i b + j.
absl::StatusOr<RunRecord> RunDpMemf(const LossProblem& problem,
                                    const BatchList& batches,
                                    const MemfConfig& cfg);
// SRG variant: Delta_t = mean clip(grad(x_t) - c grad(x_{t-1})) + noise_t,
// grad_t = c grad_{t-1} + Delta_t.
absl::StatusOr<RunRecord> RunDpSrgMemf(const LossProblem& problem,
                                       const BatchList& batches,
                                       const MemfConfig& cfg);

}  // namespace dpsrg

#endif  // DPSRG_OPTIM_H_
