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

#ifndef DPSRG_OBJECTIVES_H_
#define DPSRG_OBJECTIVES_H_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "dpsrg/geometry.h"

namespace dpsrg {

// A per-example convex loss f(x, d) over a finite pool of training examples.
// Examples are addressed by index into the pool. The declared constants
// satisfy ||grad f(x,d)|| <= lipschitz() and grad f is smoothness()-Lipschitz
// for every example and every x in the problem's ball.
class LossProblem {
 public:
  virtual ~LossProblem() = default;

  virtual Eigen::Index dim() const = 0;
  virtual size_t num_examples() const = 0;
  virtual double lipschitz() const = 0;
  virtual double smoothness() const = 0;

  // Unchecked hot-path accessors. Callers validate `x.size()` and `example`.
  virtual double ValueUnchecked(const ParamVector& x, size_t example) const = 0;
  // out += weight * grad f(x, example).
  virtual void AccumulateGradient(const ParamVector& x, size_t example,
                                  double weight,
                                  Eigen::Ref<ParamVector> out) const = 0;

  // Closed-form population quantities (synthetic problems only).
  virtual std::optional<ParamVector> minimizer() const { return std::nullopt; }
  virtual std::optional<double> ExactExcess(const ParamVector&) const {
    return std::nullopt;
  }
  virtual std::optional<ParamVector> PopulationGradient(
      const ParamVector&) const {
    return std::nullopt;
  }
  // Held-out evaluation (empirical tasks only).
  virtual std::optional<double> HeldOutLoss(const ParamVector&) const {
    return std::nullopt;
  }
  virtual std::optional<double> HeldOutAccuracy(const ParamVector&) const {
    return std::nullopt;
  }
};

// Per-example gradient with argument validation.
absl::StatusOr<ParamVector> Grad(const LossProblem& problem,
                                 const ParamVector& x, size_t example);
absl::StatusOr<double> Value(const LossProblem& problem, const ParamVector& x,
                             size_t example);

// Mean of per-example gradients over `batch`. Summation runs over fixed
// 64-example chunks whose partials are combined in index order, so the result
// does not depend on the worker count.
absl::StatusOr<ParamVector> BatchGrad(const LossProblem& problem,
                                      const ParamVector& x,
                                      std::span<const size_t> batch);

// Mean over the batch of clip(eta_t grad f(x_t,d) - eta_prev grad f(x_prev,d)).
// eta_prev == 0 skips the second evaluation (first step). An infinite
// `c_clip` disables clipping.
absl::StatusOr<ParamVector> SrgIncrement(const LossProblem& problem,
                                         const ParamVector& x_t,
                                         const ParamVector& x_prev,
                                         double eta_t, double eta_prev,
                                         std::span<const size_t> batch,
                                         double c_clip);

// Mean of clip(grad f(x, d), c_clip) over the batch.
absl::StatusOr<ParamVector> ClippedBatchGrad(const LossProblem& problem,
                                             const ParamVector& x,
                                             std::span<const size_t> batch,
                                             double c_clip);

// Mean training loss over a batch.
absl::StatusOr<double> BatchLoss(const LossProblem& problem,
                                 const ParamVector& x,
                                 std::span<const size_t> batch);

// F(x) - F(x*) for synthetic problems; mean held-out loss for empirical ones.
absl::StatusOr<double> PopulationExcess(const LossProblem& problem,
                                        const ParamVector& x);

// Worker threads used for per-example gradient evaluation (default 1).
void SetGradientWorkers(int workers);
int GradientWorkers();

struct SyntheticQuadraticOptions {
  Eigen::Index dim = 20;
  size_t num_examples = 256;
  double radius = 1.0;
  // Declared constants; construction fails if the data cannot honour them.
  double lipschitz = 1.0;
  double smoothness = 1.0;
  // Top eigenvalue of the shared Hessian; 0 picks the largest value allowed
  // by the declared constants.
  double curvature = 0.0;
  // Hessian eigenvalues are log-spaced on [curvature / condition, curvature].
  double condition = 1.0;
  double target_norm = 0.5;
  // Example centres are x* plus a uniform draw from a ball of this radius.
  double noise_scale = 0.0;
  // Per-example curvature multipliers are uniform on [1 - s, 1 + s].
  double curvature_spread = 0.0;
  uint64_t seed = 0;
};

// f(x, d_i) = (a_i / 2) (x - u_i)^T H (x - u_i) with H diagonal. The pool is
// re-centred so that sum_i a_i u_i = x* sum_i a_i, which makes the
// population (uniform over the pool) minimiser exactly x* and
// F(x) - F(x*) = (mean a / 2) (x - x*)^T H (x - x*).
class SyntheticQuadratic : public LossProblem {
 public:
  static absl::StatusOr<std::unique_ptr<SyntheticQuadratic>> Create(
      const SyntheticQuadraticOptions& options);

  Eigen::Index dim() const override { return target_.size(); }
  size_t num_examples() const override { return weights_.size(); }
  double lipschitz() const override { return lipschitz_; }
  double smoothness() const override { return smoothness_; }
  double ValueUnchecked(const ParamVector& x, size_t example) const override;
  void AccumulateGradient(const ParamVector& x, size_t example, double weight,
                          Eigen::Ref<ParamVector> out) const override;
  std::optional<ParamVector> minimizer() const override { return target_; }
  std::optional<double> ExactExcess(const ParamVector& x) const override;
  std::optional<ParamVector> PopulationGradient(
      const ParamVector& x) const override;

  const Eigen::VectorXd& hessian_diagonal() const { return hessian_; }
  const Eigen::MatrixXd& centres() const { return centres_; }
  const Eigen::VectorXd& example_weights() const { return weights_; }
  double mean_weight() const { return mean_weight_; }
  const ConstraintBall& ball() const { return ball_; }

 private:
  SyntheticQuadratic(ParamVector target, Eigen::VectorXd hessian,
                     Eigen::MatrixXd centres, Eigen::VectorXd weights,
                     double lipschitz, double smoothness, ConstraintBall ball);

  ParamVector target_;
  Eigen::VectorXd hessian_;
  Eigen::MatrixXd centres_;  // dim x n, column i is u_i
  Eigen::VectorXd weights_;  // a_i
  double mean_weight_;
  double lipschitz_;
  double smoothness_;
  ConstraintBall ball_;
};

// Labelled examples stored column-wise: features is p x n.
struct LabeledSet {
  Eigen::MatrixXd features;
  std::vector<int> labels;

  size_t size() const { return labels.size(); }
};

// Multiclass logistic regression (softmax cross-entropy). The model is a
// p x K matrix stored column-major in a ParamVector of length p*K.
class LogisticTask : public LossProblem {
 public:
  static absl::StatusOr<std::unique_ptr<LogisticTask>> Create(
      LabeledSet train, LabeledSet test, int num_classes);

  Eigen::Index dim() const override { return num_features() * num_classes_; }
  size_t num_examples() const override { return train_.size(); }
  // sqrt(2) * max example norm.
  double lipschitz() const override { return lipschitz_; }
  // max example norm^2 / 2 (softmax Jacobian has spectral norm <= 1/2).
  double smoothness() const override { return smoothness_; }
  double ValueUnchecked(const ParamVector& x, size_t example) const override;
  void AccumulateGradient(const ParamVector& x, size_t example, double weight,
                          Eigen::Ref<ParamVector> out) const override;
  std::optional<double> HeldOutLoss(const ParamVector& x) const override;
  std::optional<double> HeldOutAccuracy(const ParamVector& x) const override;

  Eigen::Index num_features() const { return train_.features.rows(); }
  int num_classes() const { return num_classes_; }
  const LabeledSet& train() const { return train_; }
  const LabeledSet& test() const { return test_; }

  // Accuracy of x on an arbitrary labelled set.
  double Accuracy(const ParamVector& x, const LabeledSet& set) const;
  double MeanLoss(const ParamVector& x, const LabeledSet& set) const;

 private:
  LogisticTask(LabeledSet train, LabeledSet test, int num_classes);
  Eigen::VectorXd Probabilities(const ParamVector& x,
                                const Eigen::Ref<const Eigen::VectorXd>& a) const;

  LabeledSet train_;
  LabeledSet test_;
  int num_classes_;
  double lipschitz_;
  double smoothness_;
};

// Decorator counting per-example gradient evaluations.
class CountingProblem : public LossProblem {
 public:
  explicit CountingProblem(const LossProblem& inner);

  Eigen::Index dim() const override { return inner_.dim(); }
  size_t num_examples() const override { return inner_.num_examples(); }
  double lipschitz() const override { return inner_.lipschitz(); }
  double smoothness() const override { return inner_.smoothness(); }
  double ValueUnchecked(const ParamVector& x, size_t example) const override {
    return inner_.ValueUnchecked(x, example);
  }
  void AccumulateGradient(const ParamVector& x, size_t example, double weight,
                          Eigen::Ref<ParamVector> out) const override;
  std::optional<ParamVector> minimizer() const override {
    return inner_.minimizer();
  }
  std::optional<double> ExactExcess(const ParamVector& x) const override {
    return inner_.ExactExcess(x);
  }
  std::optional<ParamVector> PopulationGradient(
      const ParamVector& x) const override {
    return inner_.PopulationGradient(x);
  }

  int count(size_t example) const { return counts_[example].load(); }

 private:
  const LossProblem& inner_;
  mutable std::vector<std::atomic<int>> counts_;
};

// Problem whose examples in `zeroed` have identically zero gradient and loss
// (zero-out adjacency).
class ZeroedProblem : public LossProblem {
 public:
  ZeroedProblem(const LossProblem& inner, std::vector<size_t> zeroed);

  Eigen::Index dim() const override { return inner_.dim(); }
  size_t num_examples() const override { return inner_.num_examples(); }
  double lipschitz() const override { return inner_.lipschitz(); }
  double smoothness() const override { return inner_.smoothness(); }
  double ValueUnchecked(const ParamVector& x, size_t example) const override;
  void AccumulateGradient(const ParamVector& x, size_t example, double weight,
                          Eigen::Ref<ParamVector> out) const override;

 private:
  bool IsZeroed(size_t example) const;
  const LossProblem& inner_;
  std::vector<size_t> zeroed_;
};

}  // namespace dpsrg

#endif  // DPSRG_OBJECTIVES_H_
