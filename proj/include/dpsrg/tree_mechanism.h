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

#ifndef DPSRG_TREE_MECHANISM_H_
#define DPSRG_TREE_MECHANISM_H_

#include <cstdint>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "dpsrg/geometry.h"

namespace dpsrg {

// A dyadic node s_{j,k} covering steps [(j-1) 2^k + 1, j 2^k]. Only odd j
// with j 2^k <= T are ever materialised.
struct TreeNode {
  int level;  // k
  int64_t index;  // j (odd)

  int64_t first() const { return ((index - 1) << level) + 1; }
  int64_t last() const { return index << level; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// ceil(log2 T) for T >= 1.
int TreeDepth(int64_t horizon);

// Nodes that step i feeds into (at most 1 + ceil(log2 T)).
std::vector<TreeNode> CoveringNodes(int64_t horizon, int64_t step);
// Nodes summed to estimate the prefix ending at step i (at most
// ceil(log2 T)); the binary expansion of i from the high bit down.
std::vector<TreeNode> PrefixNodes(int64_t step);

// Binary tree mechanism for streaming prefix sums of d-dimensional vectors.
// Each node carries N(0, sigma^2 I) noise drawn once, the first time a step
// inside it is ingested, from a stream keyed by (seed, level, index).
// Single writer; prefix reads of completed steps may run concurrently with
// later ingestion.
class TreeState {
 public:
  static absl::StatusOr<TreeState> Create(int64_t horizon, Eigen::Index dim,
                                          double sigma, uint64_t seed);

  // Adds delta for step i; steps must arrive as 1, 2, ..., T.
  absl::Status Ingest(int64_t step, const ParamVector& delta);

  struct Prefix {
    ParamVector estimate;    // sum_{j<=i} delta_j + noise
    ParamVector noise_only;  // the noise part of `estimate`
  };
  absl::StatusOr<Prefix> PrefixSum(int64_t step) const;

  int64_t horizon() const { return horizon_; }
  Eigen::Index dim() const { return dim_; }
  double sigma() const { return sigma_; }
  int64_t ingested() const { return ingested_; }

  // Exact (noise-free) node sum and node noise, for inspection.
  ParamVector NodeExactSum(const TreeNode& node) const;
  ParamVector NodeNoise(const TreeNode& node) const;

 private:
  TreeState(int64_t horizon, Eigen::Index dim, double sigma, uint64_t seed);

  Eigen::Index Slot(const TreeNode& node) const { return node.index - 1; }

  int64_t horizon_;
  Eigen::Index dim_;
  double sigma_;
  uint64_t seed_;
  int64_t ingested_ = 0;
  // Per level: dim x floor(T / 2^k) matrices of exact sums and noise.
  std::vector<Eigen::MatrixXd> exact_;
  std::vector<Eigen::MatrixXd> noise_;
};

// Per-node noise std giving mu-GDP when each step has l2 sensitivity c_clip:
// c_clip * sqrt(1 + ceil(log2 T)) / mu.
absl::StatusOr<double> CalibrateTreeSigma(double c_clip, double mu,
                                          int64_t horizon);

// High-probability (1 - delta) bound on the max prefix l2 error:
// 4 C log2(T)^1.5 sqrt(d ln(2T/delta)) / mu.
double TreeErrorBound(double c_clip, double mu, int64_t horizon,
                      Eigen::Index dim, double delta);

}  // namespace dpsrg

#endif  // DPSRG_TREE_MECHANISM_H_
