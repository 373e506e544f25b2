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

#ifndef DPSRG_MATRIX_MECHANISM_H_
#define DPSRG_MATRIX_MECHANISM_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "dpsrg/geometry.h"

namespace dpsrg {

enum class WorkloadKind : uint32_t {
  kOnes = 0,           // A: lower-triangular all ones (prefix sums)
  kMomentum = 1,       // M A, SGD with heavy-ball momentum
  kMomentumDecay = 2,  // M A L, momentum on SRG increments with decay c
};

std::string_view WorkloadName(WorkloadKind kind);
absl::StatusOr<WorkloadKind> ParseWorkload(std::string_view name);

// Builds the kb x kb workload. M_{ij} = gamma^{i-j} and L_{ij} = c^{i-j}
// for i >= j (0^0 = 1), so (M A)_{ij} = sum_{r=0}^{i-j} gamma^r.
// Requires gamma in [0, 1) and c in [0, 1].
absl::StatusOr<Eigen::MatrixXd> BuildWorkload(WorkloadKind kind, int epochs,
                                              int batches, double gamma,
                                              double decay);

// max_j || sum_{i<k} C[:, i b + j] ||_2.
double ColumnGroupSensitivity(const Eigen::MatrixXd& strategy, int epochs,
                              int batches);

// ||W C^{-1}||_F for lower-triangular invertible C.
double FactorizationObjective(const Eigen::MatrixXd& workload,
                              const Eigen::MatrixXd& strategy);

struct StrategyMetadata {
  WorkloadKind kind = WorkloadKind::kOnes;
  int epochs = 1;
  int batches = 1;
  double gamma = 0.0;
  double decay = 1.0;
};

// Lower-triangular strategy C with strictly positive diagonal, paired with
// the workload it was optimised for.
class StrategyMatrix {
 public:
  static absl::StatusOr<StrategyMatrix> Create(Eigen::MatrixXd strategy,
                                               Eigen::MatrixXd workload,
                                               StrategyMetadata meta);
  // C = I on the ones workload with the given shape.
  static StrategyMatrix Identity(int epochs, int batches);

  const Eigen::MatrixXd& matrix() const { return c_; }
  const Eigen::MatrixXd& workload() const { return w_; }
  const StrategyMetadata& meta() const { return meta_; }
  int size() const { return static_cast<int>(c_.rows()); }
  double sensitivity() const { return sens_; }
  double objective() const { return FactorizationObjective(w_, c_); }

  bool converged() const { return converged_; }
  int iterations() const { return iterations_; }
  void set_convergence(bool converged, int iterations) {
    converged_ = converged;
    iterations_ = iterations;
  }

 private:
  StrategyMatrix(Eigen::MatrixXd c, Eigen::MatrixXd w, StrategyMetadata meta);

  Eigen::MatrixXd c_;
  Eigen::MatrixXd w_;
  StrategyMetadata meta_;
  double sens_;
  bool converged_ = true;
  int iterations_ = 0;
};

// The binary tree mechanism as an explicit rectangular factorisation
// A = decoder * encoder over n steps: encoder rows are node memberships,
// decoder rows select the dyadic decomposition of each prefix.
struct TreeFactorization {
  Eigen::MatrixXd encoder;  // nodes x n, entries in {0, 1}
  Eigen::MatrixXd decoder;  // n x nodes
};
TreeFactorization BinaryTreeFactorization(int steps);

// Objective of the tree factorisation for `workload` scaled to unit
// column-group sensitivity: ||W A^{-1} decoder||_F * sens(encoder).
double TreeBaselineObjective(const Eigen::MatrixXd& workload, int epochs,
                             int batches);

// Square lower-triangular C with (C^T C)^{-1} = A^{-1} D D^T A^{-T}, where D
// is the tree decoder. Releasing A(x + C^{-1} z) then has exactly the tree's
// prefix noise covariance, and its sensitivity is at most the tree's.
Eigen::MatrixXd SquareTreeStrategy(int steps);

struct FactorizeOptions {
  int iterations = 500;
  double tolerance = 1e-8;
  uint64_t seed = 0;
};

// Projected gradient descent on lower-triangular C minimising ||W C^{-1}||_F^2
// subject to column-group sensitivity <= 1, started from the square tree
// strategy. Returns the best iterate; converged() reports whether the
// relative objective change fell below the tolerance.
absl::StatusOr<StrategyMatrix> Factorize(const Eigen::MatrixXd& workload,
                                         const StrategyMetadata& meta,
                                         const FactorizeOptions& options);

// Flat little-endian file: "DPSRGSM1", u32 kb, u32 k, u32 b, u32 kind,
// f64 gamma, f64 c, then the lower triangle of C row-major as f64.
absl::Status SaveStrategy(const StrategyMatrix& strategy,
                          const std::string& path);
absl::StatusOr<StrategyMatrix> LoadStrategy(const std::string& path);

// Streams rows of C^{-1} Z where Z has i.i.d. N(0, 1/(2 rho)) entries; row t
// of Z is drawn from the stream keyed by (seed, t) and row t of the output
// depends only on Z rows 0..t. rho = +inf yields zeros.
class MfNoiseStream {
 public:
  static absl::StatusOr<MfNoiseStream> Create(const StrategyMatrix& strategy,
                                              double rho, Eigen::Index dim,
                                              uint64_t seed);
  // Same, with Z supplied explicitly (kb x dim); used for causality checks.
  static absl::StatusOr<MfNoiseStream> FromNoise(const Eigen::MatrixXd& strategy,
                                                 Eigen::MatrixXd z);

  bool done() const { return next_ >= size_; }
  int position() const { return next_; }
  absl::StatusOr<ParamVector> Next();

 private:
  MfNoiseStream(Eigen::MatrixXd c, double stddev, Eigen::Index dim,
                uint64_t seed);

  Eigen::MatrixXd c_;
  double stddev_;
  Eigen::Index dim_;
  uint64_t seed_;
  int size_;
  int next_ = 0;
  Eigen::MatrixXd outputs_;  // dim x kb
  Eigen::MatrixXd explicit_z_;  // kb x dim when supplied
};

}  // namespace dpsrg

#endif  // DPSRG_MATRIX_MECHANISM_H_
