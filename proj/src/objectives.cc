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

#include "dpsrg/objectives.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <utility>

#include "absl/strings/str_cat.h"
#include "dpsrg/random.h"
#include "dpsrg/status_macros.h"

namespace dpsrg {
namespace {

constexpr size_t kChunk = 64;
std::atomic<int> g_workers{1};

absl::Status CheckPoint(const LossProblem& problem, const ParamVector& x) {
  if (x.size() != problem.dim()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "parameter dimension ", x.size(), " does not match problem dimension ",
        problem.dim()));
  }
  if (!x.allFinite()) {
    return absl::OutOfRangeError("non-finite parameter vector");
  }
  return absl::OkStatus();
}

absl::Status CheckBatch(const LossProblem& problem,
                        std::span<const size_t> batch) {
  if (batch.empty()) return absl::InvalidArgumentError("empty batch");
  for (size_t i : batch) {
    if (i >= problem.num_examples()) {
      return absl::OutOfRangeError(absl::StrCat(
          "example index ", i, " out of range [0, ", problem.num_examples(),
          ")"));
    }
  }
  return absl::OkStatus();
}

// Sums fn(example, accumulator) over the batch in fixed chunks and combines
// chunk partials in order.
template <typename PerExample>
ParamVector ChunkedSum(Eigen::Index dim, std::span<const size_t> batch,
                       const PerExample& fn) {
  const size_t num_chunks = (batch.size() + kChunk - 1) / kChunk;
  std::vector<ParamVector> partial(num_chunks, ParamVector::Zero(dim));
  auto run_chunk = [&](size_t c) {
    const size_t end = std::min(batch.size(), (c + 1) * kChunk);
    for (size_t k = c * kChunk; k < end; ++k) fn(batch[k], partial[c]);
  };
  const int workers =
      std::min<int>(g_workers.load(), static_cast<int>(num_chunks));
  if (workers <= 1) {
    for (size_t c = 0; c < num_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (size_t c = w; c < num_chunks; c += workers) run_chunk(c);
      });
    }
    for (auto& th : pool) th.join();
  }
  ParamVector total = ParamVector::Zero(dim);
  for (const auto& p : partial) total += p;
  return total;
}

}  // namespace

void SetGradientWorkers(int workers) { g_workers = std::max(1, workers); }
int GradientWorkers() { return g_workers.load(); }

absl::StatusOr<ParamVector> Grad(const LossProblem& problem,
                                 const ParamVector& x, size_t example) {
  RETURN_IF_ERROR(CheckPoint(problem, x));
  if (example >= problem.num_examples()) {
    return absl::OutOfRangeError(
        absl::StrCat("example index ", example, " out of range"));
  }
  ParamVector g = ParamVector::Zero(problem.dim());
  problem.AccumulateGradient(x, example, 1.0, g);
  return g;
}

absl::StatusOr<double> Value(const LossProblem& problem, const ParamVector& x,
                             size_t example) {
  RETURN_IF_ERROR(CheckPoint(problem, x));
  if (example >= problem.num_examples()) {
    return absl::OutOfRangeError(
        absl::StrCat("example index ", example, " out of range"));
  }
  return problem.ValueUnchecked(x, example);
}

absl::StatusOr<ParamVector> BatchGrad(const LossProblem& problem,
                                      const ParamVector& x,
                                      std::span<const size_t> batch) {
  return ClippedBatchGrad(problem, x, batch,
                          std::numeric_limits<double>::infinity());
}

absl::StatusOr<ParamVector> ClippedBatchGrad(const LossProblem& problem,
                                             const ParamVector& x,
                                             std::span<const size_t> batch,
                                             double c_clip) {
  RETURN_IF_ERROR(CheckPoint(problem, x));
  RETURN_IF_ERROR(CheckBatch(problem, batch));
  if (!(c_clip > 0.0)) return absl::InvalidArgumentError("clip must be > 0");
  const Eigen::Index dim = problem.dim();
  ParamVector sum;
  if (std::isinf(c_clip)) {
    sum = ChunkedSum(dim, batch, [&](size_t i, ParamVector& acc) {
      problem.AccumulateGradient(x, i, 1.0, acc);
    });
  } else {
    sum = ChunkedSum(dim, batch, [&](size_t i, ParamVector& acc) {
      ParamVector g = ParamVector::Zero(dim);
      problem.AccumulateGradient(x, i, 1.0, g);
      ClipInPlace(g, c_clip);
      acc += g;
    });
  }
  return ParamVector(sum / static_cast<double>(batch.size()));
}

absl::StatusOr<ParamVector> SrgIncrement(const LossProblem& problem,
                                         const ParamVector& x_t,
                                         const ParamVector& x_prev,
                                         double eta_t, double eta_prev,
                                         std::span<const size_t> batch,
                                         double c_clip) {
  RETURN_IF_ERROR(CheckPoint(problem, x_t));
  if (eta_prev != 0.0) RETURN_IF_ERROR(CheckPoint(problem, x_prev));
  RETURN_IF_ERROR(CheckBatch(problem, batch));
  if (!(c_clip > 0.0)) return absl::InvalidArgumentError("clip must be > 0");
  const Eigen::Index dim = problem.dim();
  ParamVector sum = ChunkedSum(dim, batch, [&](size_t i, ParamVector& acc) {
    if (std::isinf(c_clip)) {
      problem.AccumulateGradient(x_t, i, eta_t, acc);
      if (eta_prev != 0.0) problem.AccumulateGradient(x_prev, i, -eta_prev, acc);
      return;
    }
    ParamVector v = ParamVector::Zero(dim);
    problem.AccumulateGradient(x_t, i, eta_t, v);
    if (eta_prev != 0.0) problem.AccumulateGradient(x_prev, i, -eta_prev, v);
    ClipInPlace(v, c_clip);
    acc += v;
  });
  return ParamVector(sum / static_cast<double>(batch.size()));
}

absl::StatusOr<double> BatchLoss(const LossProblem& problem,
                                 const ParamVector& x,
                                 std::span<const size_t> batch) {
  RETURN_IF_ERROR(CheckPoint(problem, x));
  RETURN_IF_ERROR(CheckBatch(problem, batch));
  double total = 0.0;
  for (size_t i : batch) total += problem.ValueUnchecked(x, i);
  return total / static_cast<double>(batch.size());
}

absl::StatusOr<double> PopulationExcess(const LossProblem& problem,
                                        const ParamVector& x) {
  RETURN_IF_ERROR(CheckPoint(problem, x));
  if (auto exact = problem.ExactExcess(x)) return *exact;
  if (auto held_out = problem.HeldOutLoss(x)) return *held_out;
  return absl::FailedPreconditionError(
      "problem has neither a closed-form population loss nor a held-out set");
}

// ---------------------------------------------------------------------------
// SyntheticQuadratic

absl::StatusOr<std::unique_ptr<SyntheticQuadratic>> SyntheticQuadratic::Create(
    const SyntheticQuadraticOptions& o) {
  if (o.dim <= 0 || o.num_examples == 0) {
    return absl::InvalidArgumentError("dim and num_examples must be positive");
  }
  ASSIGN_OR_RETURN(ConstraintBall ball, ConstraintBall::Create(o.radius));
  if (!(o.condition >= 1.0)) {
    return absl::InvalidArgumentError("condition must be >= 1");
  }
  if (!(o.target_norm >= 0.0 && o.target_norm <= o.radius)) {
    return absl::InvalidArgumentError("target must lie inside the ball");
  }
  if (!(o.curvature_spread >= 0.0 && o.curvature_spread < 1.0)) {
    return absl::InvalidArgumentError("curvature_spread must be in [0, 1)");
  }
  if (!(o.noise_scale >= 0.0)) {
    return absl::InvalidArgumentError("noise_scale must be >= 0");
  }

  SplitMix64 rng(DeriveSeed(o.seed, {0x5157}));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  ParamVector direction(o.dim);
  for (Eigen::Index k = 0; k < o.dim; ++k) direction[k] = normal(rng);
  ParamVector target = direction.normalized() * o.target_norm;

  const size_t n = o.num_examples;
  Eigen::VectorXd weights(n);
  Eigen::MatrixXd centres(o.dim, n);
  for (size_t i = 0; i < n; ++i) {
    weights[i] = 1.0 + o.curvature_spread * (2.0 * uniform(rng) - 1.0);
    ParamVector offset(o.dim);
    for (Eigen::Index k = 0; k < o.dim; ++k) offset[k] = normal(rng);
    const double r = o.noise_scale *
                     std::pow(uniform(rng), 1.0 / static_cast<double>(o.dim));
    const double norm = offset.norm();
    if (norm > 0.0) offset *= r / norm;
    centres.col(i) = target + offset;
  }
  // Re-centre so the weighted mean of the centres is exactly the target.
  const Eigen::VectorXd weighted_mean = centres * weights / weights.sum();
  centres.colwise() += target - weighted_mean;

  double max_weight = weights.maxCoeff();
  double max_reach = 0.0;
  for (size_t i = 0; i < n; ++i) {
    max_reach = std::max(max_reach,
                         weights[i] * (o.radius + centres.col(i).norm()));
  }
  const double allowed =
      std::min(o.smoothness / max_weight, o.lipschitz / max_reach);
  double top = o.curvature > 0.0 ? o.curvature : allowed;
  if (!(top > 0.0)) {
    return absl::InvalidArgumentError(
        "declared Lipschitz/smoothness constants admit no positive curvature");
  }
  if (top > allowed * (1.0 + 1e-12)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "curvature ", top, " violates the declared constants (max ", allowed,
        ")"));
  }
  Eigen::VectorXd hessian(o.dim);
  for (Eigen::Index k = 0; k < o.dim; ++k) {
    const double frac =
        o.dim == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(o.dim - 1);
    hessian[k] = top * std::pow(o.condition, -frac);
  }
  return std::unique_ptr<SyntheticQuadratic>(new SyntheticQuadratic(
      std::move(target), std::move(hessian), std::move(centres),
      std::move(weights), o.lipschitz, o.smoothness, ball));
}

SyntheticQuadratic::SyntheticQuadratic(ParamVector target,
                                       Eigen::VectorXd hessian,
                                       Eigen::MatrixXd centres,
                                       Eigen::VectorXd weights,
                                       double lipschitz, double smoothness,
                                       ConstraintBall ball)
    : target_(std::move(target)),
      hessian_(std::move(hessian)),
      centres_(std::move(centres)),
      weights_(std::move(weights)),
      mean_weight_(weights_.mean()),
      lipschitz_(lipschitz),
      smoothness_(smoothness),
      ball_(ball) {}

double SyntheticQuadratic::ValueUnchecked(const ParamVector& x,
                                          size_t example) const {
  const Eigen::VectorXd diff = x - centres_.col(example);
  return 0.5 * weights_[example] *
         diff.dot(hessian_.cwiseProduct(diff));
}

void SyntheticQuadratic::AccumulateGradient(const ParamVector& x,
                                            size_t example, double weight,
                                            Eigen::Ref<ParamVector> out) const {
  out.noalias() += (weight * weights_[example]) *
                   hessian_.cwiseProduct(x - centres_.col(example));
}

std::optional<double> SyntheticQuadratic::ExactExcess(
    const ParamVector& x) const {
  const Eigen::VectorXd diff = x - target_;
  return 0.5 * mean_weight_ * diff.dot(hessian_.cwiseProduct(diff));
}

std::optional<ParamVector> SyntheticQuadratic::PopulationGradient(
    const ParamVector& x) const {
  return ParamVector(mean_weight_ * hessian_.cwiseProduct(x - target_));
}

// ---------------------------------------------------------------------------
// LogisticTask

absl::StatusOr<std::unique_ptr<LogisticTask>> LogisticTask::Create(
    LabeledSet train, LabeledSet test, int num_classes) {
  if (num_classes < 2) {
    return absl::InvalidArgumentError("need at least two classes");
  }
  if (train.size() == 0) return absl::InvalidArgumentError("empty train set");
  for (const LabeledSet* set : {&train, &test}) {
    if (static_cast<size_t>(set->features.cols()) != set->labels.size()) {
      return absl::InvalidArgumentError(
          "feature columns and label count disagree");
    }
    if (set->size() > 0 && set->features.rows() != train.features.rows()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "feature dimension mismatch: ", set->features.rows(), " vs ",
          train.features.rows()));
    }
    for (int label : set->labels) {
      if (label < 0 || label >= num_classes) {
        return absl::OutOfRangeError(
            absl::StrCat("label ", label, " outside [0, ", num_classes, ")"));
      }
    }
    if (!set->features.allFinite()) {
      return absl::InvalidArgumentError("non-finite feature values");
    }
  }
  return std::unique_ptr<LogisticTask>(
      new LogisticTask(std::move(train), std::move(test), num_classes));
}

LogisticTask::LogisticTask(LabeledSet train, LabeledSet test, int num_classes)
    : train_(std::move(train)), test_(std::move(test)),
      num_classes_(num_classes) {
  const double max_norm = train_.features.colwise().norm().maxCoeff();
  lipschitz_ = std::sqrt(2.0) * max_norm;
  smoothness_ = 0.5 * max_norm * max_norm;
}

Eigen::VectorXd LogisticTask::Probabilities(
    const ParamVector& x, const Eigen::Ref<const Eigen::VectorXd>& a) const {
  Eigen::Map<const Eigen::MatrixXd> w(x.data(), num_features(), num_classes_);
  Eigen::VectorXd logits = w.transpose() * a;
  logits.array() -= logits.maxCoeff();
  Eigen::VectorXd p = logits.array().exp();
  return p / p.sum();
}

double LogisticTask::ValueUnchecked(const ParamVector& x,
                                    size_t example) const {
  Eigen::Map<const Eigen::MatrixXd> w(x.data(), num_features(), num_classes_);
  const Eigen::VectorXd logits = w.transpose() * train_.features.col(example);
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits[train_.labels[example]];
}

void LogisticTask::AccumulateGradient(const ParamVector& x, size_t example,
                                      double weight,
                                      Eigen::Ref<ParamVector> out) const {
  const auto a = train_.features.col(example);
  Eigen::VectorXd residual = Probabilities(x, a);
  residual[train_.labels[example]] -= 1.0;
  const Eigen::Index p = num_features();
  for (int k = 0; k < num_classes_; ++k) {
    out.segment(k * p, p).noalias() += (weight * residual[k]) * a;
  }
}

double LogisticTask::MeanLoss(const ParamVector& x,
                              const LabeledSet& set) const {
  if (set.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  Eigen::Map<const Eigen::MatrixXd> w(x.data(), num_features(), num_classes_);
  const Eigen::MatrixXd logits = w.transpose() * set.features;  // K x n
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.cols(); ++i) {
    const double m = logits.col(i).maxCoeff();
    const double lse = m + std::log((logits.col(i).array() - m).exp().sum());
    total += lse - logits(set.labels[i], i);
  }
  return total / static_cast<double>(set.size());
}

double LogisticTask::Accuracy(const ParamVector& x,
                              const LabeledSet& set) const {
  if (set.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  Eigen::Map<const Eigen::MatrixXd> w(x.data(), num_features(), num_classes_);
  const Eigen::MatrixXd logits = w.transpose() * set.features;
  size_t correct = 0;
  for (Eigen::Index i = 0; i < logits.cols(); ++i) {
    Eigen::Index best;
    logits.col(i).maxCoeff(&best);
    if (best == set.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.size());
}

std::optional<double> LogisticTask::HeldOutLoss(const ParamVector& x) const {
  if (test_.size() == 0) return std::nullopt;
  return MeanLoss(x, test_);
}

std::optional<double> LogisticTask::HeldOutAccuracy(
    const ParamVector& x) const {
  if (test_.size() == 0) return std::nullopt;
  return Accuracy(x, test_);
}

// ---------------------------------------------------------------------------
// Decorators

CountingProblem::CountingProblem(const LossProblem& inner)
    : inner_(inner), counts_(inner.num_examples()) {}

void CountingProblem::AccumulateGradient(const ParamVector& x, size_t example,
                                         double weight,
                                         Eigen::Ref<ParamVector> out) const {
  counts_[example].fetch_add(1);
  inner_.AccumulateGradient(x, example, weight, out);
}

ZeroedProblem::ZeroedProblem(const LossProblem& inner,
                             std::vector<size_t> zeroed)
    : inner_(inner), zeroed_(std::move(zeroed)) {
  std::sort(zeroed_.begin(), zeroed_.end());
}

bool ZeroedProblem::IsZeroed(size_t example) const {
  return std::binary_search(zeroed_.begin(), zeroed_.end(), example);
}

double ZeroedProblem::ValueUnchecked(const ParamVector& x,
                                     size_t example) const {
  return IsZeroed(example) ? 0.0 : inner_.ValueUnchecked(x, example);
}

void ZeroedProblem::AccumulateGradient(const ParamVector& x, size_t example,
                                       double weight,
                                       Eigen::Ref<ParamVector> out) const {
  if (!IsZeroed(example)) inner_.AccumulateGradient(x, example, weight, out);
}

}  // namespace dpsrg
