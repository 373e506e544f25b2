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

#include "dpsrg/matrix_mechanism.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <utility>

#include "Eigen/Cholesky"
#include "Eigen/LU"
#include "absl/strings/str_cat.h"
#include "dpsrg/random.h"
#include "dpsrg/status_macros.h"
#include "dpsrg/tree_mechanism.h"

namespace dpsrg {
namespace {

constexpr char kMagic[8] = {'D', 'P', 'S', 'R', 'G', 'S', 'M', '1'};

double PowZero(double base, int exponent) {
  return exponent == 0 ? 1.0 : std::pow(base, exponent);
}

Eigen::MatrixXd LowerToeplitz(int n, double ratio) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) m(i, j) = PowZero(ratio, i - j);
  }
  return m;
}

Eigen::MatrixXd TriangularInverse(const Eigen::MatrixXd& c) {
  return c.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(c.rows(), c.cols()));
}

// Rescales column groups whose summed norm exceeds 1.
void ProjectGroups(Eigen::MatrixXd& c, int epochs, int batches) {
  for (int j = 0; j < batches; ++j) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(c.rows());
    for (int i = 0; i < epochs; ++i) sum += c.col(i * batches + j);
    const double norm = sum.norm();
    if (norm > 1.0) {
      for (int i = 0; i < epochs; ++i) c.col(i * batches + j) /= norm;
    }
  }
}

absl::Status CheckStrategy(const Eigen::MatrixXd& c) {
  if (c.rows() != c.cols() || c.rows() == 0) {
    return absl::InvalidArgumentError("strategy must be square and non-empty");
  }
  if (!c.allFinite()) return absl::InvalidArgumentError("non-finite strategy");
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    if (!(c(i, i) > 0.0)) {
      return absl::FailedPreconditionError(
          absl::StrCat("strategy is singular: diagonal entry ", i, " is ",
                       c(i, i)));
    }
    for (Eigen::Index j = i + 1; j < c.cols(); ++j) {
      if (c(i, j) != 0.0) {
        return absl::InvalidArgumentError("strategy must be lower-triangular");
      }
    }
  }
  return absl::OkStatus();
}

}  // namespace

std::string_view WorkloadName(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::kOnes:
      return "ones";
    case WorkloadKind::kMomentum:
      return "momentum";
    case WorkloadKind::kMomentumDecay:
      return "momentum_decay";
  }
  return "unknown";
}

absl::StatusOr<WorkloadKind> ParseWorkload(std::string_view name) {
  if (name == "ones") return WorkloadKind::kOnes;
  if (name == "momentum") return WorkloadKind::kMomentum;
  if (name == "momentum_decay") return WorkloadKind::kMomentumDecay;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown workload '", std::string(name), "'"));
}

absl::StatusOr<Eigen::MatrixXd> BuildWorkload(WorkloadKind kind, int epochs,
                                              int batches, double gamma,
                                              double decay) {
  if (epochs < 1 || batches < 1) {
    return absl::InvalidArgumentError("epochs and batches must be >= 1");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("momentum must lie in [0, 1), got ", gamma));
  }
  if (!(decay >= 0.0 && decay <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("decay must lie in [0, 1], got ", decay));
  }
  const int n = epochs * batches;
  const Eigen::MatrixXd ones = LowerToeplitz(n, 1.0);
  switch (kind) {
    case WorkloadKind::kOnes:
      return ones;
    case WorkloadKind::kMomentum:
      return Eigen::MatrixXd(LowerToeplitz(n, gamma) * ones);
    case WorkloadKind::kMomentumDecay:
      return Eigen::MatrixXd(LowerToeplitz(n, gamma) * ones *
                             LowerToeplitz(n, decay));
  }
  return absl::InvalidArgumentError("unknown workload kind");
}

double ColumnGroupSensitivity(const Eigen::MatrixXd& strategy, int epochs,
                              int batches) {
  double worst = 0.0;
  for (int j = 0; j < batches; ++j) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(strategy.rows());
    for (int i = 0; i < epochs; ++i) sum += strategy.col(i * batches + j);
    worst = std::max(worst, sum.norm());
  }
  return worst;
}

double FactorizationObjective(const Eigen::MatrixXd& workload,
                              const Eigen::MatrixXd& strategy) {
  return (workload * TriangularInverse(strategy)).norm();
}

StrategyMatrix::StrategyMatrix(Eigen::MatrixXd c, Eigen::MatrixXd w,
                               StrategyMetadata meta)
    : c_(std::move(c)), w_(std::move(w)), meta_(meta) {
  sens_ = ColumnGroupSensitivity(c_, meta_.epochs, meta_.batches);
}

absl::StatusOr<StrategyMatrix> StrategyMatrix::Create(Eigen::MatrixXd strategy,
                                                      Eigen::MatrixXd workload,
                                                      StrategyMetadata meta) {
  RETURN_IF_ERROR(CheckStrategy(strategy));
  if (meta.epochs < 1 || meta.batches < 1 ||
      strategy.rows() != static_cast<Eigen::Index>(meta.epochs) * meta.batches) {
    return absl::InvalidArgumentError(absl::StrCat(
        "strategy size ", strategy.rows(), " does not match epochs*batches = ",
        meta.epochs * meta.batches));
  }
  if (workload.rows() != strategy.rows() || workload.cols() != strategy.cols()) {
    return absl::InvalidArgumentError("workload/strategy shape mismatch");
  }
  return StrategyMatrix(std::move(strategy), std::move(workload), meta);
}

StrategyMatrix StrategyMatrix::Identity(int epochs, int batches) {
  const int n = epochs * batches;
  StrategyMetadata meta;
  meta.epochs = epochs;
  meta.batches = batches;
  return StrategyMatrix(Eigen::MatrixXd::Identity(n, n), LowerToeplitz(n, 1.0),
                        meta);
}

TreeFactorization BinaryTreeFactorization(int steps) {
  std::vector<TreeNode> nodes;
  const int depth = TreeDepth(steps);
  for (int k = 0; k <= depth; ++k) {
    for (int64_t j = 1; (j << k) <= steps; j += 2) nodes.push_back({k, j});
  }
  auto node_row = [&](const TreeNode& node) {
    for (size_t r = 0; r < nodes.size(); ++r) {
      if (nodes[r] == node) return static_cast<Eigen::Index>(r);
    }
    return Eigen::Index{-1};
  };
  TreeFactorization f;
  f.encoder = Eigen::MatrixXd::Zero(nodes.size(), steps);
  for (size_t r = 0; r < nodes.size(); ++r) {
    for (int64_t s = nodes[r].first(); s <= nodes[r].last(); ++s) {
      f.encoder(r, s - 1) = 1.0;
    }
  }
  f.decoder = Eigen::MatrixXd::Zero(steps, nodes.size());
  for (int i = 1; i <= steps; ++i) {
    for (const TreeNode& node : PrefixNodes(i)) {
      f.decoder(i - 1, node_row(node)) = 1.0;
    }
  }
  return f;
}

double TreeBaselineObjective(const Eigen::MatrixXd& workload, int epochs,
                             int batches) {
  const int n = epochs * batches;
  const TreeFactorization tree = BinaryTreeFactorization(n);
  // W A^{-1} D: A^{-1} is the first-difference operator.
  Eigen::MatrixXd diff = tree.decoder;
  for (int i = n - 1; i >= 1; --i) diff.row(i) -= tree.decoder.row(i - 1);
  const double sens = ColumnGroupSensitivity(tree.encoder, epochs, batches);
  return (workload * diff).norm() * sens;
}

Eigen::MatrixXd SquareTreeStrategy(int steps) {
  const TreeFactorization tree = BinaryTreeFactorization(steps);
  Eigen::MatrixXd diff = tree.decoder;
  for (int i = steps - 1; i >= 1; --i) diff.row(i) -= tree.decoder.row(i - 1);
  const Eigen::MatrixXd cov = diff * diff.transpose();
  const Eigen::MatrixXd precision =
      cov.llt().solve(Eigen::MatrixXd::Identity(steps, steps));
  // Reverse-order Cholesky: J P J = L L^T  =>  C = J L^T J, C^T C = P.
  const Eigen::MatrixXd flipped = precision.reverse();
  const Eigen::MatrixXd lower = flipped.llt().matrixL();
  Eigen::MatrixXd c = lower.transpose().reverse();
  return c.triangularView<Eigen::Lower>();
}

absl::StatusOr<StrategyMatrix> Factorize(const Eigen::MatrixXd& workload,
                                         const StrategyMetadata& meta,
                                         const FactorizeOptions& options) {
  const int n = meta.epochs * meta.batches;
  if (workload.rows() != n || workload.cols() != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "workload must be ", n, "x", n, ", got ", workload.rows(), "x",
        workload.cols()));
  }
  if (workload.triangularView<Eigen::StrictlyUpper>().toDenseMatrix()
          .cwiseAbs().maxCoeff() > 0.0) {
    return absl::InvalidArgumentError("workload must be lower-triangular");
  }
  if (options.iterations < 0) {
    return absl::InvalidArgumentError("iterations must be >= 0");
  }

  Eigen::MatrixXd c = SquareTreeStrategy(n);
  c /= ColumnGroupSensitivity(c, meta.epochs, meta.batches);
  ProjectGroups(c, meta.epochs, meta.batches);
  const Eigen::MatrixXd gram = workload.transpose() * workload;

  auto objective_sq = [&](const Eigen::MatrixXd& m) {
    return (workload * TriangularInverse(m)).squaredNorm();
  };
  double value = objective_sq(c);
  double step = 0.05;
  bool converged = false;
  int iter = 0;
  for (; iter < options.iterations; ++iter) {
    const Eigen::MatrixXd inv = TriangularInverse(c);
    Eigen::MatrixXd grad =
        -2.0 * inv.transpose() * gram * inv * inv.transpose();
    grad = grad.triangularView<Eigen::Lower>();
    const double grad_norm = grad.norm();
    if (grad_norm == 0.0 || !std::isfinite(grad_norm)) {
      converged = true;
      break;
    }
    const double scale = c.norm() / grad_norm;
    bool accepted = false;
    while (step > 1e-14) {
      Eigen::MatrixXd trial = c - (step * scale) * grad;
      ProjectGroups(trial, meta.epochs, meta.batches);
      if ((trial.diagonal().array() > 0.0).all()) {
        const double trial_value = objective_sq(trial);
        if (std::isfinite(trial_value) && trial_value < value) {
          const double rel = (value - trial_value) / value;
          c = std::move(trial);
          value = trial_value;
          accepted = true;
          step = std::min(step * 1.5, 1.0);
          if (rel < options.tolerance) converged = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      converged = true;
      break;
    }
    if (converged) {
      ++iter;
      break;
    }
  }

  ASSIGN_OR_RETURN(StrategyMatrix result,
                   StrategyMatrix::Create(std::move(c), workload, meta));
  result.set_convergence(converged, iter);
  return result;
}

absl::Status SaveStrategy(const StrategyMatrix& strategy,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot open ", path));
  const StrategyMetadata& meta = strategy.meta();
  const uint32_t header[4] = {static_cast<uint32_t>(strategy.size()),
                              static_cast<uint32_t>(meta.epochs),
                              static_cast<uint32_t>(meta.batches),
                              static_cast<uint32_t>(meta.kind)};
  const double params[2] = {meta.gamma, meta.decay};
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(params), sizeof(params));
  const Eigen::MatrixXd& c = strategy.matrix();
  for (int i = 0; i < strategy.size(); ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = c(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  if (!out) return absl::DataLossError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

absl::StatusOr<StrategyMatrix> LoadStrategy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  char magic[8];
  uint32_t header[4];
  double params[2];
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  in.read(reinterpret_cast<char*>(params), sizeof(params));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    return absl::DataLossError(
        absl::StrCat(path, " is not a strategy matrix file"));
  }
  const int n = static_cast<int>(header[0]);
  StrategyMetadata meta;
  meta.epochs = static_cast<int>(header[1]);
  meta.batches = static_cast<int>(header[2]);
  if (header[3] > 2) return absl::DataLossError("unknown workload kind");
  meta.kind = static_cast<WorkloadKind>(header[3]);
  meta.gamma = params[0];
  meta.decay = params[1];
  if (n <= 0 || n != meta.epochs * meta.batches) {
    return absl::DataLossError("inconsistent strategy header");
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      in.read(reinterpret_cast<char*>(&c(i, j)), sizeof(double));
    }
  }
  if (!in) return absl::DataLossError(absl::StrCat("truncated file ", path));
  ASSIGN_OR_RETURN(Eigen::MatrixXd workload,
                   BuildWorkload(meta.kind, meta.epochs, meta.batches,
                                 meta.gamma, meta.decay));
  return StrategyMatrix::Create(std::move(c), std::move(workload), meta);
}

MfNoiseStream::MfNoiseStream(Eigen::MatrixXd c, double stddev,
                             Eigen::Index dim, uint64_t seed)
    : c_(std::move(c)),
      stddev_(stddev),
      dim_(dim),
      seed_(seed),
      size_(static_cast<int>(c_.rows())),
      outputs_(Eigen::MatrixXd::Zero(dim, c_.rows())) {}

absl::StatusOr<MfNoiseStream> MfNoiseStream::Create(
    const StrategyMatrix& strategy, double rho, Eigen::Index dim,
    uint64_t seed) {
  if (!(rho > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("zCDP rho must be positive, got ", rho));
  }
  if (dim < 1) return absl::InvalidArgumentError("dim must be >= 1");
  RETURN_IF_ERROR(CheckStrategy(strategy.matrix()));
  const double stddev = std::isinf(rho) ? 0.0 : 1.0 / std::sqrt(2.0 * rho);
  return MfNoiseStream(strategy.matrix(), stddev, dim, seed);
}

absl::StatusOr<MfNoiseStream> MfNoiseStream::FromNoise(
    const Eigen::MatrixXd& strategy, Eigen::MatrixXd z) {
  RETURN_IF_ERROR(CheckStrategy(strategy));
  if (z.rows() != strategy.rows()) {
    return absl::InvalidArgumentError("noise rows must match strategy size");
  }
  MfNoiseStream stream(strategy, 1.0, z.cols(), 0);
  stream.explicit_z_ = std::move(z);
  return stream;
}

absl::StatusOr<ParamVector> MfNoiseStream::Next() {
  if (done()) {
    return absl::OutOfRangeError(
        absl::StrCat("noise stream exhausted after ", size_, " rows"));
  }
  const int t = next_;
  ParamVector row;
  if (explicit_z_.size() > 0) {
    row = explicit_z_.row(t).transpose();
  } else if (stddev_ == 0.0) {
    row = ParamVector::Zero(dim_);
  } else {
    row = KeyedGaussian(seed_, {static_cast<uint64_t>(t)}, dim_, stddev_);
  }
  for (int j = 0; j < t; ++j) {
    const double coeff = c_(t, j);
    if (coeff != 0.0) row.noalias() -= coeff * outputs_.col(j);
  }
  row /= c_(t, t);
  outputs_.col(t) = row;
  ++next_;
  return row;
}

}  // namespace dpsrg
