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

#include <cmath>
#include <limits>
#include <string>

#include "gtest/gtest.h"
#include "oracles.h"

namespace dpsrg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void ExpectRelNear(double got, double want, double rel) {
  EXPECT_LE(std::abs(got - want), rel * std::abs(want)) << got << " vs " << want;
}

TEST(SensitivityBoundTest, Examples) {
  EXPECT_EQ(SensitivityBound(1.7, 0.0, 3.0, 5.0), 2.0 * 1.7);
  EXPECT_EQ(SensitivityBound(1.0, 1.0, 1.0, 0.0), 6.0);
}

TEST(ClipNormTest, Examples) {
  EXPECT_EQ(ClipNorm(1.0, 0.0, 7.0), 4.0);
  EXPECT_EQ(ClipNorm(1.0, 1.0, 1.0), 12.0);
  EXPECT_EQ(ClipNorm(0.5, 2.0, 0.25), 6.0);
}

TEST(SrgdSigmaTest, HalvesWhenBatchDoubles) {
  const double a = SrgdSigma(1, 1, 2, 1, 1e-6, 10, 5, 64);
  const double b = SrgdSigma(1, 1, 2, 1, 1e-6, 20, 5, 64);
  ExpectRelNear(b, a / 2.0, 1e-15);
}

TEST(SrgdSigmaTest, NumeratorIdentity) {
  const double l = 0.7, m = 1.3, r = 2.0, eps = 0.5, delta = 1e-5;
  const double b = 16, beta = 40;
  const int64_t t = 32;
  const double sigma = SrgdSigma(l, m, r, eps, delta, b, beta, t);
  const double recovered =
      sigma * eps * b * beta / std::sqrt(std::log(32.0) * std::log(2.5 / delta));
  ExpectRelNear(recovered, 8 * std::sqrt(2.0) * l + 16 * std::sqrt(2.0) * m * r,
                1e-12);
  ExpectRelNear(recovered, std::sqrt(2.0) * 2.0 * ClipNorm(l, m, r), 1e-12);
}

TEST(SrgdSigmaTest, SpotValue) {
  const double sigma = SrgdSigma(1, 0, 1, 1, 1e-6, 10, 10, 16);
  const double expected =
      8 * std::sqrt(2.0) * std::sqrt(std::log(16.0) * std::log(2.5e6)) / 100.0;
  ExpectRelNear(sigma, expected, 1e-12);
}

TEST(DimCheckTest, ZeroSmoothnessAlwaysPasses) {
  EXPECT_EQ(DimBound(10, 10, 1, 1e-6, 0.0, 16), kInf);
  EXPECT_TRUE(DimCheck(1e300, 10, 10, 1, 1e-6, 0.0, 16));
}

TEST(DimCheckTest, BoundaryIsInclusive) {
  const double bound = DimBound(50, 300, 2, 1e-6, 1, 100);
  EXPECT_TRUE(DimCheck(bound, 50, 300, 2, 1e-6, 1, 100));
  EXPECT_FALSE(DimCheck(std::nextafter(bound, kInf), 50, 300, 2, 1e-6, 1, 100));
}

TEST(ConversionTest, Examples) {
  EXPECT_NEAR(ZcdpToDp(1.0, std::exp(-1.0)), 3.0, 1e-15);
  EXPECT_NEAR(GdpToDp(1.0, 2.5 * std::exp(-2.0)), 2.0, 1e-15);
  EXPECT_LT(ZcdpToDp(1e-12, 1e-6), 1e-4);
}

TEST(BatchAndBetaTest, SqrtNCapBinds) {
  auto plan = BatchAndBeta(10000, 1.0, 1.0, 1.0, 1e6, 1e-6, 1.0);
  ASSERT_TRUE(plan.ok()) << plan.status();
  EXPECT_EQ(plan->batch, 100);
  EXPECT_EQ(plan->steps, 100);
  EXPECT_EQ(plan->beta, 2401.0);
}

TEST(BatchAndBetaTest, RejectsBadInputs) {
  EXPECT_FALSE(BatchAndBeta(3, 1, 1, 1, 1, 1e-6, 1).ok());
  EXPECT_FALSE(BatchAndBeta(100, 1, 1, 0, 1, 1e-6, 1).ok());
  EXPECT_FALSE(BatchAndBeta(100, 1, 1, 1, 0, 1e-6, 1).ok());
  EXPECT_FALSE(BatchAndBeta(100, 1, 1, 1, 1, 1.0, 1).ok());
}

// Two-pass fixed point, transcribed independently.
struct OraclePlan {
  int64_t batch, steps;
  double beta;
};
OraclePlan OracleBatchAndBeta(double n, double l, double m, double r,
                              double eps, double delta, double d) {
  auto cap = [&](double t) {
    if (std::log(t) <= 0.0) return kInf;
    return (l + 2 * m * r) * std::pow(n, 1.5) * eps /
           (4 * std::sqrt(2.0) * r * std::sqrt(d) * std::pow(std::log(t), 1.5) *
            std::sqrt(std::log(4 * t / delta) * std::log(2.5 / delta)));
  };
  auto pick = [&](double t) {
    return std::max<int64_t>(
        1, static_cast<int64_t>(std::floor(std::min(std::sqrt(n), cap(t)))));
  };
  const int64_t b0 = pick(std::sqrt(n));
  const int64_t t0 = static_cast<int64_t>(std::ceil(n / b0));
  const int64_t b = pick(static_cast<double>(t0));
  const int64_t t = static_cast<int64_t>(std::ceil(n / b));
  return {b, t, oracle::Beta(n, l, m, r, static_cast<double>(b))};
}

TEST(AccountingProperty, FormulasMatchDuplicatedArithmeticOnGrid) {
  oracle::Gen gen(51);
  for (int trial = 0; trial < 200; ++trial) {
    const double l = gen.LogUniform(1e-2, 1e2);
    const double m = gen.LogUniform(1e-2, 1e2);
    const double r = gen.LogUniform(1e-2, 1e2);
    const double eps = gen.LogUniform(1e-2, 1e2);
    const double delta = gen.LogUniform(1e-10, 1e-2);
    const double b = gen.LogUniform(1, 1e3);
    const double beta = gen.LogUniform(1, 1e5);
    const int64_t t = gen.Int(2, 100000);
    const double d = std::floor(gen.LogUniform(1, 1e4));
    const int64_t n = gen.Int(4, 1000000);
    ExpectRelNear(SensitivityBound(l, m, r, b), oracle::SensitivityBound(l, m, r, b), 1e-12);
    ExpectRelNear(ClipNorm(l, m, r), oracle::ClipNorm(l, m, r), 1e-12);
    ExpectRelNear(SrgdSigma(l, m, r, eps, delta, b, beta, t),
                  oracle::SrgdSigma(l, m, r, eps, delta, b, beta, t), 1e-12);
    ExpectRelNear(DimBound(b, beta, eps, delta, m, t),
                  oracle::DimBound(b, beta, eps, delta, m, t), 1e-12);
    ExpectRelNear(GdpToDp(eps, delta), oracle::GdpToDp(eps, delta), 1e-12);
    ExpectRelNear(ZcdpToDp(eps, delta), oracle::ZcdpToDp(eps, delta), 1e-12);
    const BatchPlan plan = *BatchAndBeta(n, l, m, r, eps, delta, d);
    const OraclePlan want = OracleBatchAndBeta(n, l, m, r, eps, delta, d);
    EXPECT_EQ(plan.batch, want.batch);
    EXPECT_EQ(plan.steps, want.steps);
    ExpectRelNear(plan.beta, want.beta, 1e-12);
  }
}

TEST(AccountingProperty, BatchPlanInvariants) {
  oracle::Gen gen(52);
  for (int trial = 0; trial < 300; ++trial) {
    const int64_t n = gen.Int(4, 2000000);
    const double l = gen.LogUniform(1e-2, 10);
    const double m = gen.LogUniform(1e-2, 10);
    const double r = gen.LogUniform(1e-2, 10);
    const BatchPlan plan = *BatchAndBeta(n, l, m, r, gen.LogUniform(1e-2, 10),
                                         gen.LogUniform(1e-10, 1e-3),
                                         std::floor(gen.LogUniform(1, 1e4)));
    EXPECT_GE(plan.batch, 1);
    EXPECT_LE(static_cast<double>(plan.batch), std::sqrt(static_cast<double>(n)));
    EXPECT_GE(plan.batch * plan.steps, n);
    EXPECT_LT((plan.steps - 1) * plan.batch, n);
    EXPECT_GE(plan.beta, 2.0 * m * static_cast<double>(plan.steps))
        << "n=" << n << " B=" << plan.batch;
    EXPECT_GE(plan.beta, m);
  }
}

TEST(AccountingProperty, ConversionsAreMonotoneAndInvertible) {
  oracle::Gen gen(53);
  for (int trial = 0; trial < 200; ++trial) {
    const double delta = gen.LogUniform(1e-12, 0.5);
    const double eps = gen.LogUniform(1e-3, 50);
    ExpectRelNear(ZcdpToDp(DpToZcdp(eps, delta), delta), eps, 1e-10);
    ExpectRelNear(GdpToDp(DpToGdp(eps, delta), delta), eps, 1e-12);
    EXPECT_LT(ZcdpToDp(eps, delta), ZcdpToDp(eps * 1.01, delta));
    EXPECT_LT(GdpToDp(eps, delta), GdpToDp(eps * 1.01, delta));
  }
}

TEST(PrivacyBudgetTest, CanonicalFormsAndViews) {
  auto dp = *PrivacyBudget::ApproxDp(1.0, 1e-6);
  EXPECT_EQ(dp.kind(), PrivacyBudget::Kind::kApproxDp);
  EXPECT_EQ(dp.epsilon(), 1.0);
  ExpectRelNear(GdpToDp(dp.mu(), 1e-6), 1.0, 1e-12);
  ExpectRelNear(ZcdpToDp(dp.rho(), 1e-6), 1.0, 1e-10);

  auto z = *PrivacyBudget::Zcdp(1.0, std::exp(-1.0));
  EXPECT_EQ(z.rho(), 1.0);
  EXPECT_NEAR(z.epsilon(), 3.0, 1e-15);

  auto g = *PrivacyBudget::Gdp(1.0, 2.5 * std::exp(-2.0));
  EXPECT_EQ(g.mu(), 1.0);
  EXPECT_NEAR(g.epsilon(), 2.0, 1e-15);

  EXPECT_FALSE(PrivacyBudget::NonPrivate().is_private());
  EXPECT_FALSE(PrivacyBudget::ApproxDp(-1.0, 1e-6).ok());
  EXPECT_FALSE(PrivacyBudget::ApproxDp(1.0, 0.0).ok());
  EXPECT_FALSE(PrivacyBudget::Zcdp(0.0, 1e-6).ok());
  EXPECT_FALSE(PrivacyBudget::Gdp(1.0, 1.0).ok());
}

TEST(RegimeReportTest, FlagsRestateInequalities) {
  RegimeInputs in;
  in.n = 10000;
  in.dim = 1;
  in.lipschitz = in.smoothness = in.r_diam = 1.0;
  in.epsilon = 1e6;
  in.delta = 1e-6;
  in.batch = 100;
  in.steps = 100;
  in.beta = 2401;
  RegimeReport r = BuildRegimeReport(in);
  EXPECT_TRUE(r.beta_at_least_m);
  EXPECT_TRUE(r.beta_at_least_2mt);
  EXPECT_TRUE(r.dim_ok);
  EXPECT_TRUE(r.batch_ok);
  EXPECT_TRUE(r.single_pass_ok);
  EXPECT_TRUE(r.dp_claim_valid());
  EXPECT_EQ(r.clip_bound, 12.0);

  in.beta = 199;  // below 2 M T = 200
  EXPECT_FALSE(BuildRegimeReport(in).beta_at_least_2mt);
  in.beta = 200;  // exactly at the boundary
  EXPECT_TRUE(BuildRegimeReport(in).beta_at_least_2mt);
  in.steps = 99;  // B T < n
  EXPECT_FALSE(BuildRegimeReport(in).single_pass_ok);
  EXPECT_FALSE(BuildRegimeReport(in).dp_claim_valid());
  in.steps = 100;
  in.batch = 101;  // above sqrt(n)
  EXPECT_FALSE(BuildRegimeReport(in).batch_ok);

  const auto lines = r.CommentLines();
  ASSERT_FALSE(lines.empty());
  for (const std::string& line : lines) EXPECT_EQ(line.rfind("# regime.", 0), 0u);
}

}  // namespace
}  // namespace dpsrg
