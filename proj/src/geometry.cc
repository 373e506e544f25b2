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

#include "dpsrg/geometry.h"

#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"

namespace dpsrg {

absl::StatusOr<ConstraintBall> ConstraintBall::Create(double radius) {
  if (!(radius > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("ball radius must be positive, got ", radius));
  }
  return ConstraintBall(radius);
}

ConstraintBall ConstraintBall::Unbounded() {
  return ConstraintBall(std::numeric_limits<double>::infinity());
}

bool ConstraintBall::bounded() const { return std::isfinite(radius_); }

bool ConstraintBall::Contains(const ParamVector& v, double slack) const {
  return !bounded() || v.norm() <= radius_ + slack;
}

bool AllFinite(const ParamVector& v) { return v.allFinite(); }

absl::StatusOr<ParamVector> ProjectBall(const ParamVector& v,
                                        const ConstraintBall& ball) {
  if (!v.allFinite()) {
    return absl::OutOfRangeError("non-finite vector passed to projection");
  }
  if (!ball.bounded()) return v;
  const double norm = v.norm();
  if (norm <= ball.radius()) return v;
  // Step the scale down past rounding so the result is inside the ball and
  // projection is exactly idempotent.
  double scale = ball.radius() / norm;
  ParamVector out = v * scale;
  while (out.norm() > ball.radius()) {
    scale = std::nextafter(scale, 0.0);
    out = v * scale;
  }
  return out;
}

void ClipInPlace(Eigen::Ref<ParamVector> v, double c_clip) {
  if (std::isinf(c_clip)) return;
  const double norm = v.norm();
  if (norm > c_clip) v *= c_clip / norm;
}

ParamVector Clip(const ParamVector& v, double c_clip) {
  ParamVector out = v;
  ClipInPlace(out, c_clip);
  return out;
}

absl::StatusOr<ParamVector> Interpolate(const ParamVector& y,
                                        const ParamVector& z, double tau) {
  if (y.size() != z.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "interpolate: dimension mismatch ", y.size(), " vs ", z.size()));
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("interpolate: tau must lie in [0,1], got ", tau));
  }
  return ParamVector((1.0 - tau) * y + tau * z);
}

}  // namespace dpsrg
