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

#include "dpsrg/tree_mechanism.h"

#include <bit>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "dpsrg/random.h"

namespace dpsrg {

int TreeDepth(int64_t horizon) {
  if (horizon <= 1) return 0;
  return static_cast<int>(std::bit_width(static_cast<uint64_t>(horizon - 1)));
}

std::vector<TreeNode> CoveringNodes(int64_t horizon, int64_t step) {
  std::vector<TreeNode> nodes;
  const int depth = TreeDepth(horizon);
  for (int k = 0; k <= depth; ++k) {
    const int64_t j = ((step - 1) >> k) + 1;
    if ((j & 1) == 1 && (j << k) <= horizon) nodes.push_back({k, j});
  }
  return nodes;
}

std::vector<TreeNode> PrefixNodes(int64_t step) {
  std::vector<TreeNode> nodes;
  int64_t start = 0;
  for (int k = 62; k >= 0; --k) {
    if ((step >> k) & 1) {
      nodes.push_back({k, (start >> k) + 1});
      start += int64_t{1} << k;
    }
  }
  return nodes;
}

absl::StatusOr<TreeState> TreeState::Create(int64_t horizon, Eigen::Index dim,
                                            double sigma, uint64_t seed) {
  if (horizon < 1) return absl::InvalidArgumentError("horizon must be >= 1");
  if (dim < 1) return absl::InvalidArgumentError("dim must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError(
        absl::StrCat("tree sigma must be finite and >= 0, got ", sigma));
  }
  return TreeState(horizon, dim, sigma, seed);
}

TreeState::TreeState(int64_t horizon, Eigen::Index dim, double sigma,
                     uint64_t seed)
    : horizon_(horizon), dim_(dim), sigma_(sigma), seed_(seed) {
  const int depth = TreeDepth(horizon);
  for (int k = 0; k <= depth; ++k) {
    const Eigen::Index slots = horizon >> k;
    exact_.emplace_back(Eigen::MatrixXd::Zero(dim, slots));
    noise_.emplace_back(Eigen::MatrixXd::Zero(dim, slots));
  }
}

absl::Status TreeState::Ingest(int64_t step, const ParamVector& delta) {
  if (step != ingested_ + 1) {
    return absl::FailedPreconditionError(absl::StrCat(
        "tree steps must be ingested in order: expected ", ingested_ + 1,
        ", got ", step));
  }
  if (step > horizon_) {
    return absl::OutOfRangeError(
        absl::StrCat("step ", step, " exceeds horizon ", horizon_));
  }
  if (delta.size() != dim_) {
    return absl::InvalidArgumentError("increment dimension mismatch");
  }
  if (!delta.allFinite()) {
    return absl::OutOfRangeError(
        absl::StrCat("non-finite increment at step ", step));
  }
  for (const TreeNode& node : CoveringNodes(horizon_, step)) {
    const Eigen::Index slot = Slot(node);
    if (node.first() == step && sigma_ > 0.0) {
      SplitMix64 engine(DeriveSeed(
          seed_, {static_cast<uint64_t>(node.level),
                  static_cast<uint64_t>(node.index)}));
      FillGaussian(engine, sigma_, noise_[node.level].col(slot));
    }
    exact_[node.level].col(slot) += delta;
  }
  ingested_ = step;
  return absl::OkStatus();
}

absl::StatusOr<TreeState::Prefix> TreeState::PrefixSum(int64_t step) const {
  if (step < 1 || step > ingested_) {
    return absl::FailedPreconditionError(absl::StrCat(
        "prefix ", step, " requested but only ", ingested_,
        " steps ingested"));
  }
  Prefix out{ParamVector::Zero(dim_), ParamVector::Zero(dim_)};
  for (const TreeNode& node : PrefixNodes(step)) {
    out.estimate += exact_[node.level].col(Slot(node));
    out.noise_only += noise_[node.level].col(Slot(node));
  }
  out.estimate += out.noise_only;
  return out;
}

ParamVector TreeState::NodeExactSum(const TreeNode& node) const {
  return exact_[node.level].col(Slot(node));
}

ParamVector TreeState::NodeNoise(const TreeNode& node) const {
  return noise_[node.level].col(Slot(node));
}

absl::StatusOr<double> CalibrateTreeSigma(double c_clip, double mu,
                                          int64_t horizon) {
  if (!(mu > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("mu must be positive, got ", mu));
  }
  if (horizon < 2) return absl::InvalidArgumentError("horizon must be >= 2");
  if (!(c_clip >= 0.0)) return absl::InvalidArgumentError("clip must be >= 0");
  return c_clip * std::sqrt(1.0 + TreeDepth(horizon)) / mu;
}

double TreeErrorBound(double c_clip, double mu, int64_t horizon,
                      Eigen::Index dim, double delta) {
  const double log_t = std::log2(static_cast<double>(horizon));
  return 4.0 * c_clip * std::pow(log_t, 1.5) *
         std::sqrt(static_cast<double>(dim) *
                   std::log(2.0 * static_cast<double>(horizon) / delta)) /
         mu;
}

}  // namespace dpsrg
