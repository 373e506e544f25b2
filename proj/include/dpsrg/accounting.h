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

#ifndef DPSRG_ACCOUNTING_H_
#define DPSRG_ACCOUNTING_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace dpsrg {

// Per-example l2 sensitivity of the SRG increment stream with eta_t = t + 1
// and beta >= 2 M T: 2 (M b_max + 2 M R_diam + L).
double SensitivityBound(double lipschitz, double smoothness, double r_diam,
                        double b_max);

// Clip threshold for per-example SRG differences: 4 L + 8 M R_diam.
double ClipNorm(double lipschitz, double smoothness, double r_diam);

// Accelerated-SRGD noise scale
//   (8 sqrt2 L + 16 sqrt2 M R) sqrt(ln T ln(2.5/delta)) / (eps B beta).
double SrgdSigma(double lipschitz, double smoothness, double r_diam,
                 double epsilon, double delta, double batch, double beta,
                 int64_t steps);

// Largest dimension admitted by the noise analysis:
//   B^2 beta^2 eps^2 / (128 M^2 ln^3 T ln(4T/delta) ln(2.5/delta)).
// +inf when M = 0.
double DimBound(double batch, double beta, double epsilon, double delta,
                double smoothness, int64_t steps);
// d <= DimBound(...) (non-strict).
bool DimCheck(double dim, double batch, double beta, double epsilon,
              double delta, double smoothness, int64_t steps);

// Batch-size cap for a single pass with horizon T:
//   (L + 2 M R) n^1.5 eps / (4 sqrt2 R sqrt(d) ln^1.5 T sqrt(ln(4T/delta)
//   ln(2.5/delta))), or +inf when ln T <= 0.
double BatchCap(int64_t n, double lipschitz, double smoothness, double r_diam,
                double epsilon, double delta, double dim, double steps);

struct BatchPlan {
  int64_t batch = 1;  // B
  int64_t steps = 1;  // T = ceil(n / B)
  double beta = 0.0;  // M + (8L + 16 M R) n^1.5 / (R B^2)
  // First pass of the fixed point (horizon sqrt(n)).
  int64_t first_batch = 1;
  int64_t first_steps = 1;
};

// Chooses B, T and beta for a single pass over n examples. The batch cap
// depends on T, so it is evaluated at T0 = sqrt(n), then once more at
// T = ceil(n / B0). Requires n >= 4 and R_diam > 0.
absl::StatusOr<BatchPlan> BatchAndBeta(int64_t n, double lipschitz,
                                       double smoothness, double r_diam,
                                       double epsilon, double delta,
                                       double dim);

// Conversions. GDP to (eps, delta): eps = mu sqrt(2 ln(2.5/delta)).
double GdpToDp(double mu, double delta);
double DpToGdp(double epsilon, double delta);
// zCDP to (eps, delta): rho + 2 sqrt(rho ln(1/delta)).
double ZcdpToDp(double rho, double delta);
// Largest rho whose conversion does not exceed epsilon.
double DpToZcdp(double epsilon, double delta);

// A privacy target in exactly one canonical form; the derived views are
// computed by explicit conversion when the budget is built.
class PrivacyBudget {
 public:
  enum class Kind { kApproxDp, kGdp, kZcdp, kNone };

  static absl::StatusOr<PrivacyBudget> ApproxDp(double epsilon, double delta);
  static absl::StatusOr<PrivacyBudget> Gdp(double mu, double delta);
  static absl::StatusOr<PrivacyBudget> Zcdp(double rho, double delta);
  // No privacy (noise-free runs).
  static PrivacyBudget NonPrivate();

  Kind kind() const { return kind_; }
  bool is_private() const { return kind_ != Kind::kNone; }
  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  // GDP parameter implied for Gaussian-mechanism calibration.
  double mu() const { return mu_; }
  // zCDP parameter implied for matrix-factorisation calibration.
  double rho() const { return rho_; }

 private:
  PrivacyBudget(Kind kind, double epsilon, double delta, double mu,
                double rho)
      : kind_(kind), epsilon_(epsilon), delta_(delta), mu_(mu), rho_(rho) {}

  Kind kind_;
  double epsilon_;
  double delta_;
  double mu_;
  double rho_;
};

// Parameter-regime diagnostics for an accelerated run. The flags restate
// the inequalities verbatim.
struct RegimeReport {
  double beta = 0.0;
  double clip_bound = 0.0;   // ClipNorm
  double sigma = 0.0;        // SrgdSigma
  double d_max = 0.0;        // DimBound
  double b_max_batch = 0.0;  // min(sqrt n, BatchCap)
  bool beta_at_least_m = false;       // beta >= M
  bool beta_at_least_2mt = false;     // beta >= 2 M T
  bool dim_ok = false;                // d <= d_max
  bool batch_ok = false;              // B <= b_max_batch
  bool single_pass_ok = false;        // B T >= n

  bool dp_claim_valid() const {
    return beta_at_least_2mt && dim_ok && batch_ok && single_pass_ok;
  }
  // "# key=value" lines for CSV headers.
  std::vector<std::string> CommentLines() const;
};

struct RegimeInputs {
  int64_t n = 0;
  double dim = 0;
  double lipschitz = 0;
  double smoothness = 0;
  double r_diam = 0;
  double epsilon = 0;
  double delta = 0;
  int64_t batch = 1;
  int64_t steps = 1;
  double beta = 0;
};
RegimeReport BuildRegimeReport(const RegimeInputs& in);

}  // namespace dpsrg

#endif  // DPSRG_ACCOUNTING_H_
