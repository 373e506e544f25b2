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

#include "dpsrg/accounting.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace dpsrg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool ValidDelta(double delta) { return delta > 0.0 && delta < 1.0; }

int64_t FlooredBatch(double sqrt_n, double cap) {
  const double b = std::floor(std::min(sqrt_n, cap));
  return std::max<int64_t>(1, static_cast<int64_t>(b));
}

int64_t CeilDiv(int64_t a, int64_t b) { return (a + b - 1) / b; }

}  // namespace

double SensitivityBound(double lipschitz, double smoothness, double r_diam,
                        double b_max) {
  return 2.0 * (smoothness * b_max + 2.0 * smoothness * r_diam + lipschitz);
}

double ClipNorm(double lipschitz, double smoothness, double r_diam) {
  return 4.0 * lipschitz + 8.0 * smoothness * r_diam;
}

double SrgdSigma(double lipschitz, double smoothness, double r_diam,
                 double epsilon, double delta, double batch, double beta,
                 int64_t steps) {
  const double sqrt2 = std::sqrt(2.0);
  const double numerator =
      (8.0 * sqrt2 * lipschitz + 16.0 * sqrt2 * smoothness * r_diam) *
      std::sqrt(std::log(static_cast<double>(steps)) *
                std::log(2.5 / delta));
  return numerator / (epsilon * batch * beta);
}

double DimBound(double batch, double beta, double epsilon, double delta,
                double smoothness, int64_t steps) {
  if (smoothness == 0.0) return kInf;
  const double log_t = std::log(static_cast<double>(steps));
  const double denom = 128.0 * smoothness * smoothness * log_t * log_t *
                       log_t *
                       std::log(4.0 * static_cast<double>(steps) / delta) *
                       std::log(2.5 / delta);
  if (denom <= 0.0) return kInf;
  return batch * batch * beta * beta * epsilon * epsilon / denom;
}

bool DimCheck(double dim, double batch, double beta, double epsilon,
              double delta, double smoothness, int64_t steps) {
  return dim <= DimBound(batch, beta, epsilon, delta, smoothness, steps);
}

double BatchCap(int64_t n, double lipschitz, double smoothness, double r_diam,
                double epsilon, double delta, double dim, double steps) {
  const double log_t = std::log(steps);
  if (!(log_t > 0.0)) return kInf;
  const double nd = static_cast<double>(n);
  const double numerator =
      (lipschitz + 2.0 * smoothness * r_diam) * std::pow(nd, 1.5) * epsilon;
  const double denom = 4.0 * std::sqrt(2.0) * r_diam * std::sqrt(dim) *
                       std::pow(log_t, 1.5) *
                       std::sqrt(std::log(4.0 * steps / delta) *
                                 std::log(2.5 / delta));
  return numerator / denom;
}

absl::StatusOr<BatchPlan> BatchAndBeta(int64_t n, double lipschitz,
                                       double smoothness, double r_diam,
                                       double epsilon, double delta,
                                       double dim) {
  if (n < 4) return absl::InvalidArgumentError("n must be >= 4");
  if (!(r_diam > 0.0)) {
    return absl::InvalidArgumentError("set diameter must be positive");
  }
  if (!(epsilon > 0.0) || !ValidDelta(delta)) {
    return absl::InvalidArgumentError("need epsilon > 0 and delta in (0, 1)");
  }
  if (!(dim >= 1.0) || lipschitz < 0.0 || smoothness < 0.0) {
    return absl::InvalidArgumentError("need d >= 1 and L, M >= 0");
  }
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  BatchPlan plan;
  plan.first_batch = FlooredBatch(
      sqrt_n,
      BatchCap(n, lipschitz, smoothness, r_diam, epsilon, delta, dim, sqrt_n));
  plan.first_steps = CeilDiv(n, plan.first_batch);
  plan.batch = FlooredBatch(
      sqrt_n, BatchCap(n, lipschitz, smoothness, r_diam, epsilon, delta, dim,
                       static_cast<double>(plan.first_steps)));
  plan.steps = CeilDiv(n, plan.batch);
  const double b = static_cast<double>(plan.batch);
  plan.beta = smoothness + (8.0 * lipschitz + 16.0 * smoothness * r_diam) *
                               std::pow(static_cast<double>(n), 1.5) /
                               (r_diam * b * b);
  return plan;
}

double GdpToDp(double mu, double delta) {
  return mu * std::sqrt(2.0 * std::log(2.5 / delta));
}

double DpToGdp(double epsilon, double delta) {
  return epsilon / std::sqrt(2.0 * std::log(2.5 / delta));
}

double ZcdpToDp(double rho, double delta) {
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

double DpToZcdp(double epsilon, double delta) {
  // Solve (sqrt(rho) + sqrt(ln 1/delta))^2 = eps + ln(1/delta).
  const double l = std::log(1.0 / delta);
  const double root = std::sqrt(l + epsilon) - std::sqrt(l);
  return root * root;
}

absl::StatusOr<PrivacyBudget> PrivacyBudget::ApproxDp(double epsilon,
                                                      double delta) {
  if (!(epsilon > 0.0) || !ValidDelta(delta)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "invalid (epsilon, delta) = (", epsilon, ", ", delta, ")"));
  }
  if (std::isinf(epsilon)) return NonPrivate();
  return PrivacyBudget(Kind::kApproxDp, epsilon, delta,
                       DpToGdp(epsilon, delta), DpToZcdp(epsilon, delta));
}

absl::StatusOr<PrivacyBudget> PrivacyBudget::Gdp(double mu, double delta) {
  if (!(mu > 0.0) || !ValidDelta(delta)) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid (mu, delta) = (", mu, ", ", delta, ")"));
  }
  const double epsilon = GdpToDp(mu, delta);
  return PrivacyBudget(Kind::kGdp, epsilon, delta, mu,
                       DpToZcdp(epsilon, delta));
}

absl::StatusOr<PrivacyBudget> PrivacyBudget::Zcdp(double rho, double delta) {
  if (!(rho > 0.0) || !ValidDelta(delta)) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid (rho, delta) = (", rho, ", ", delta, ")"));
  }
  const double epsilon = ZcdpToDp(rho, delta);
  return PrivacyBudget(Kind::kZcdp, epsilon, delta, DpToGdp(epsilon, delta),
                       rho);
}

PrivacyBudget PrivacyBudget::NonPrivate() {
  return PrivacyBudget(Kind::kNone, kInf, 0.0, kInf, kInf);
}

RegimeReport BuildRegimeReport(const RegimeInputs& in) {
  RegimeReport r;
  const double b = static_cast<double>(in.batch);
  r.beta = in.beta;
  r.clip_bound = ClipNorm(in.lipschitz, in.smoothness, in.r_diam);
  r.sigma = SrgdSigma(in.lipschitz, in.smoothness, in.r_diam, in.epsilon,
                      in.delta, b, in.beta, in.steps);
  r.d_max =
      DimBound(b, in.beta, in.epsilon, in.delta, in.smoothness, in.steps);
  r.b_max_batch =
      std::min(std::sqrt(static_cast<double>(in.n)),
               BatchCap(in.n, in.lipschitz, in.smoothness, in.r_diam,
                        in.epsilon, in.delta, in.dim,
                        static_cast<double>(in.steps)));
  r.beta_at_least_m = in.beta >= in.smoothness;
  r.beta_at_least_2mt =
      in.beta >= 2.0 * in.smoothness * static_cast<double>(in.steps);
  r.dim_ok = in.dim <= r.d_max;
  r.batch_ok = b <= r.b_max_batch;
  r.single_pass_ok = in.batch * in.steps >= in.n;
  return r;
}

std::vector<std::string> RegimeReport::CommentLines() const {
  auto flag = [](bool v) { return v ? "true" : "false"; };
  return {
      absl::StrFormat("# regime.beta=%.17g", beta),
      absl::StrFormat("# regime.clip_bound=%.17g", clip_bound),
      absl::StrFormat("# regime.sigma=%.17g", sigma),
      absl::StrFormat("# regime.d_max=%.17g", d_max),
      absl::StrFormat("# regime.b_max_batch=%.17g", b_max_batch),
      absl::StrCat("# regime.beta_at_least_m=", flag(beta_at_least_m)),
      absl::StrCat("# regime.beta_at_least_2mt=", flag(beta_at_least_2mt)),
      absl::StrCat("# regime.dim_ok=", flag(dim_ok)),
      absl::StrCat("# regime.batch_ok=", flag(batch_ok)),
      absl::StrCat("# regime.single_pass_ok=", flag(single_pass_ok)),
      absl::StrCat("# regime.dp_claim_valid=", flag(dp_claim_valid())),
  };
}

}  // namespace dpsrg
