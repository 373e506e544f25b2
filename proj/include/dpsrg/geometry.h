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

#ifndef DPSRG_GEOMETRY_H_
#define DPSRG_GEOMETRY_H_

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dpsrg {

// Dense model-space vector (iterates, gradients, increments, noise).
using ParamVector = Eigen::VectorXd;

// The l2 ball {x : ||x|| <= radius} centred at the origin.
class ConstraintBall {
 public:
  static absl::StatusOr<ConstraintBall> Create(double radius);

  // Unbounded "ball": projection is the identity.
  static ConstraintBall Unbounded();

  double radius() const { return radius_; }
  // Diameter 2R; this is the set-size constant used by all bounds.
  double diameter() const { return 2.0 * radius_; }
  bool bounded() const;
  bool Contains(const ParamVector& v, double slack = 0.0) const;

 private:
  explicit ConstraintBall(double radius) : radius_(radius) {}
  double radius_;
};

bool AllFinite(const ParamVector& v);

// Euclidean projection onto `ball`. Fails on non-finite input.
absl::StatusOr<ParamVector> ProjectBall(const ParamVector& v,
                                        const ConstraintBall& ball);

// v * min(1, c_clip / ||v||). Requires c_clip > 0; an infinite threshold
// disables clipping.
ParamVector Clip(const ParamVector& v, double c_clip);
void ClipInPlace(Eigen::Ref<ParamVector> v, double c_clip);

// (1 - tau) * y + tau * z.
absl::StatusOr<ParamVector> Interpolate(const ParamVector& y,
                                        const ParamVector& z, double tau);

}  // namespace dpsrg

#endif  // DPSRG_GEOMETRY_H_
