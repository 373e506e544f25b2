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
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <unistd.h>

#include "dpsrg/tree_mechanism.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace dpsrg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("dpsrg_mm_" + std::to_string(::getpid()) + "_" + name))
      .string();
}

StrategyMatrix FactorizeOrDie(WorkloadKind kind, int k, int b, double gamma,
                              double c, int iterations) {
  StrategyMetadata meta{kind, k, b, gamma, c};
  FactorizeOptions options;
  options.iterations = iterations;
  auto s = Factorize(*BuildWorkload(kind, k, b, gamma, c), meta, options);
  EXPECT_TRUE(s.ok()) << s.status();
  return *std::move(s);
}

TEST(WorkloadTest, OnesIsLowerTriangularAllOnes) {
  Eigen::MatrixXd expected(3, 3);
  expected << 1, 0, 0, 1, 1, 0, 1, 1, 1;
  EXPECT_EQ(*BuildWorkload(WorkloadKind::kOnes, 1, 3, 0.9, 1.0), expected);
}

TEST(WorkloadTest, ZeroMomentumEqualsOnes) {
  EXPECT_EQ(*BuildWorkload(WorkloadKind::kMomentum, 2, 3, 0.0, 1.0),
            *BuildWorkload(WorkloadKind::kOnes, 2, 3, 0.0, 1.0));
}

TEST(WorkloadTest, ZeroDecayEqualsMomentum) {
  EXPECT_EQ(*BuildWorkload(WorkloadKind::kMomentumDecay, 2, 4, 0.7, 0.0),
            *BuildWorkload(WorkloadKind::kMomentum, 2, 4, 0.7, 1.0));
}

TEST(WorkloadTest, MomentumEntriesAreGeometricSums) {
  const double gamma = 0.6;
  const Eigen::MatrixXd w = *BuildWorkload(WorkloadKind::kMomentum, 1, 7, gamma, 1.0);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      double expected = 0.0;
      for (int r = 0; r <= i - j; ++r) expected += std::pow(gamma, r);
      EXPECT_NEAR(w(i, j), expected, 1e-14) << i << "," << j;
    }
  }
}

TEST(WorkloadProperty, DecayWorkloadUnrollsTheRecursion) {
  // Row t of (A L) applied to increments equals sum_{s<=t} grad_s with
  // grad_s = c grad_{s-1} + delta_s; c = 1 gives prefix-of-prefix sums.
  oracle::Gen gen(41);
  for (double c : {1.0, 0.5, 0.0}) {
    const Eigen::MatrixXd w =
        *BuildWorkload(WorkloadKind::kMomentumDecay, 2, 3, 0.0, c);
    const Eigen::VectorXd delta = gen.Gaussian(6);
    double grad = 0.0, running = 0.0;
    const Eigen::VectorXd got = w * delta;
    for (int t = 0; t < 6; ++t) {
      grad = c * grad + delta[t];
      running += grad;
      EXPECT_NEAR(got[t], running, 1e-13) << "c=" << c << " t=" << t;
    }
  }
}

TEST(WorkloadTest, RejectsBadParameters) {
  EXPECT_FALSE(BuildWorkload(WorkloadKind::kMomentum, 1, 3, 1.0, 1.0).ok());
  EXPECT_FALSE(BuildWorkload(WorkloadKind::kMomentum, 1, 3, -0.1, 1.0).ok());
  EXPECT_FALSE(BuildWorkload(WorkloadKind::kMomentumDecay, 1, 3, 0.5, 1.5).ok());
  EXPECT_FALSE(BuildWorkload(WorkloadKind::kOnes, 0, 3, 0.5, 1.0).ok());
}

TEST(WorkloadTest, NamesRoundTrip) {
  for (WorkloadKind kind : {WorkloadKind::kOnes, WorkloadKind::kMomentum,
                            WorkloadKind::kMomentumDecay}) {
    EXPECT_EQ(*ParseWorkload(WorkloadName(kind)), kind);
  }
  EXPECT_FALSE(ParseWorkload("banded").ok());
}

TEST(SensitivityTest, ColumnGroupsSumAcrossEpochs) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(4, 4);
  // k = 2, b = 2: group j sums columns j and j + 2.
  EXPECT_NEAR(ColumnGroupSensitivity(c, 2, 2), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(ColumnGroupSensitivity(c, 1, 4), 1.0, 1e-15);
  c(3, 1) = 1.0;  // group 1 becomes e_1 + 2 e_3
  EXPECT_NEAR(ColumnGroupSensitivity(c, 2, 2), std::sqrt(5.0), 1e-15);
}

TEST(TreeFactorizationTest, ReconstructsPrefixSums) {
  for (int steps : {1, 5, 8, 13}) {
    const TreeFactorization f = BinaryTreeFactorization(steps);
    Eigen::MatrixXd ones = Eigen::MatrixXd::Zero(steps, steps);
    for (int i = 0; i < steps; ++i) ones.row(i).head(i + 1).setOnes();
    EXPECT_LE((f.decoder * f.encoder - ones).norm(), 1e-14) << steps;
  }
}

TEST(SquareTreeStrategyTest, ReproducesTreePrefixCovariance) {
  for (int steps : {4, 7, 16}) {
    const Eigen::MatrixXd c = SquareTreeStrategy(steps);
    const TreeFactorization f = BinaryTreeFactorization(steps);
    Eigen::MatrixXd ones = Eigen::MatrixXd::Zero(steps, steps);
    for (int i = 0; i < steps; ++i) ones.row(i).head(i + 1).setOnes();
    const Eigen::MatrixXd cinv = c.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(steps, steps));
    const Eigen::MatrixXd mf_cov = ones * cinv * cinv.transpose() * ones.transpose();
    const Eigen::MatrixXd tree_cov = f.decoder * f.decoder.transpose();
    EXPECT_LE((mf_cov - tree_cov).norm(), 1e-9 * tree_cov.norm());
    EXPECT_LE(ColumnGroupSensitivity(c, 1, steps),
              ColumnGroupSensitivity(f.encoder, 1, steps) * (1.0 + 1e-12));
  }
}

TEST(FactorizeTest, ScalarCase) {
  StrategyMatrix s = FactorizeOrDie(WorkloadKind::kOnes, 1, 1, 0.0, 1.0, 100);
  EXPECT_NEAR(s.matrix()(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(s.objective(), 1.0, 1e-12);
}

TEST(FactorizeTest, BeatsTreeBaselineOnOnes) {
  StrategyMatrix s = FactorizeOrDie(WorkloadKind::kOnes, 1, 8, 0.0, 1.0, 300);
  EXPECT_LE(s.sensitivity(), 1.0 + 1e-9);
  EXPECT_LE(s.objective(), TreeBaselineObjective(s.workload(), 1, 8));
}

TEST(FactorizeProperty, ConstraintAndBaselineAcrossShapes) {
  struct Case {
    WorkloadKind kind;
    int k, b;
    double gamma, c;
  };
  for (const Case& cs : {Case{WorkloadKind::kOnes, 2, 4, 0.0, 1.0},
                         Case{WorkloadKind::kMomentum, 1, 12, 0.9, 1.0},
                         Case{WorkloadKind::kMomentum, 3, 3, 0.5, 1.0},
                         Case{WorkloadKind::kMomentumDecay, 2, 5, 0.9, 0.08}}) {
    StrategyMatrix s = FactorizeOrDie(cs.kind, cs.k, cs.b, cs.gamma, cs.c, 150);
    EXPECT_LE(s.sensitivity(), 1.0 + 1e-9);
    EXPECT_LE(ColumnGroupSensitivity(s.matrix(), cs.k, cs.b), 1.0 + 1e-9);
    EXPECT_LE(s.objective(), TreeBaselineObjective(s.workload(), cs.k, cs.b) *
                                 (1.0 + 1e-12));
    EXPECT_TRUE((s.matrix().diagonal().array() > 0.0).all());
    EXPECT_EQ(s.matrix().triangularView<Eigen::StrictlyUpper>().toDenseMatrix()
                  .norm(),
              0.0);
  }
}

TEST(FactorizeProperty, MoreIterationsNeverWorse) {
  double previous = kInf;
  for (int iterations : {0, 5, 10, 20, 40, 80}) {
    StrategyMatrix s =
        FactorizeOrDie(WorkloadKind::kMomentum, 1, 10, 0.9, 1.0, iterations);
    EXPECT_LE(s.objective(), previous * (1.0 + 1e-12)) << iterations;
    previous = s.objective();
  }
}

TEST(FactorizeTest, Deterministic) {
  StrategyMatrix a = FactorizeOrDie(WorkloadKind::kMomentum, 1, 8, 0.9, 1.0, 50);
  StrategyMatrix b = FactorizeOrDie(WorkloadKind::kMomentum, 1, 8, 0.9, 1.0, 50);
  EXPECT_EQ(a.matrix(), b.matrix());
}

TEST(FactorizeTest, RejectsBadWorkload) {
  StrategyMetadata meta{WorkloadKind::kOnes, 1, 3, 0.0, 1.0};
  EXPECT_FALSE(Factorize(Eigen::MatrixXd::Ones(3, 3), meta, {}).ok());
  EXPECT_FALSE(Factorize(Eigen::MatrixXd::Identity(4, 4), meta, {}).ok());
}

TEST(StrategyMatrixTest, CreateValidates) {
  StrategyMetadata meta{WorkloadKind::kOnes, 1, 2, 0.0, 1.0};
  Eigen::MatrixXd upper(2, 2);
  upper << 1, 1, 0, 1;
  EXPECT_FALSE(StrategyMatrix::Create(upper, Eigen::MatrixXd::Identity(2, 2), meta).ok());
  Eigen::MatrixXd singular = Eigen::MatrixXd::Identity(2, 2);
  singular(1, 1) = 0.0;
  EXPECT_FALSE(StrategyMatrix::Create(singular, Eigen::MatrixXd::Identity(2, 2), meta).ok());
  EXPECT_FALSE(StrategyMatrix::Create(Eigen::MatrixXd::Identity(3, 3),
                                      Eigen::MatrixXd::Identity(3, 3), meta)
                   .ok());
}

TEST(StrategyIoTest, SaveLoadRoundTrip) {
  StrategyMatrix s =
      FactorizeOrDie(WorkloadKind::kMomentumDecay, 2, 3, 0.9, 0.25, 30);
  const std::string path = TempPath("roundtrip.strategy");
  ASSERT_TRUE(SaveStrategy(s, path).ok());
  auto loaded = LoadStrategy(path);
  ASSERT_TRUE(loaded.ok()) << loaded.status();
  EXPECT_EQ(loaded->matrix(), s.matrix());
  EXPECT_EQ(loaded->workload(), s.workload());
  EXPECT_EQ(loaded->meta().kind, WorkloadKind::kMomentumDecay);
  EXPECT_EQ(loaded->meta().epochs, 2);
  EXPECT_EQ(loaded->meta().batches, 3);
  EXPECT_EQ(loaded->meta().gamma, 0.9);
  EXPECT_EQ(loaded->meta().decay, 0.25);
  std::filesystem::remove(path);
}

TEST(StrategyIoTest, RejectsCorruptFiles) {
  EXPECT_EQ(LoadStrategy(TempPath("missing")).status().code(),
            absl::StatusCode::kNotFound);
  const std::string path = TempPath("corrupt.strategy");
  std::ofstream(path, std::ios::binary) << "NOTMAGIC0000";
  EXPECT_FALSE(LoadStrategy(path).ok());
  StrategyMatrix s = StrategyMatrix::Identity(1, 4);
  ASSERT_TRUE(SaveStrategy(s, path).ok());
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  EXPECT_EQ(LoadStrategy(path).status().code(), absl::StatusCode::kDataLoss);
  std::filesystem::remove(path);
}

TEST(MfNoiseStreamTest, IdentityStreamsRowsOfZ) {
  oracle::Gen gen(42);
  Eigen::MatrixXd z(4, 3);
  for (int t = 0; t < 4; ++t) z.row(t) = gen.Gaussian(3).transpose();
  auto stream = *MfNoiseStream::FromNoise(Eigen::MatrixXd::Identity(4, 4), z);
  for (int t = 0; t < 4; ++t) {
    EXPECT_EQ(*stream.Next(), ParamVector(z.row(t).transpose()));
  }
  EXPECT_TRUE(stream.done());
  EXPECT_FALSE(stream.Next().ok());
}

TEST(MfNoiseStreamTest, InfiniteRhoIsSilent) {
  StrategyMatrix s = StrategyMatrix::Identity(1, 5);
  auto stream = *MfNoiseStream::Create(s, kInf, 3, 1);
  while (!stream.done()) EXPECT_EQ(stream.Next()->norm(), 0.0);
  EXPECT_FALSE(MfNoiseStream::Create(s, 0.0, 3, 1).ok());
}

TEST(MfNoiseStreamTest, OutputSolvesTriangularSystem) {
  StrategyMatrix s = FactorizeOrDie(WorkloadKind::kOnes, 1, 6, 0.0, 1.0, 20);
  oracle::Gen gen(43);
  Eigen::MatrixXd z(6, 2);
  for (int t = 0; t < 6; ++t) z.row(t) = gen.Gaussian(2).transpose();
  auto stream = *MfNoiseStream::FromNoise(s.matrix(), z);
  const Eigen::MatrixXd expected =
      s.matrix().triangularView<Eigen::Lower>().solve(z);
  for (int t = 0; t < 6; ++t) {
    EXPECT_LE((*stream.Next() - expected.row(t).transpose()).norm(), 1e-12);
  }
}

TEST(MfNoiseStreamProperty, Causal) {
  StrategyMatrix s = FactorizeOrDie(WorkloadKind::kMomentum, 1, 8, 0.9, 1.0, 20);
  oracle::Gen gen(44);
  for (int cut = 0; cut < 8; ++cut) {
    Eigen::MatrixXd z(8, 2);
    for (int t = 0; t < 8; ++t) z.row(t) = gen.Gaussian(2).transpose();
    Eigen::MatrixXd perturbed = z;
    for (int t = cut + 1; t < 8; ++t) perturbed.row(t) = gen.Gaussian(2).transpose();
    auto a = *MfNoiseStream::FromNoise(s.matrix(), z);
    auto b = *MfNoiseStream::FromNoise(s.matrix(), perturbed);
    for (int t = 0; t <= cut; ++t) EXPECT_EQ(*a.Next(), *b.Next());
  }
}

TEST(MfNoiseStreamProperty, ZVarianceIsOneOverTwoRho) {
  const double rho = 2.0;
  StrategyMatrix s = StrategyMatrix::Identity(1, 4);
  double sum_sq = 0.0;
  int count = 0;
  for (uint64_t seed = 0; seed < 5000; ++seed) {
    auto stream = *MfNoiseStream::Create(s, rho, 4, seed);
    while (!stream.done()) {
      sum_sq += stream.Next()->squaredNorm();
      count += 4;
    }
  }
  EXPECT_NEAR(sum_sq / count, 1.0 / (2.0 * rho), 0.02 / (2.0 * rho));
}

TEST(MfNoiseStreamProperty, TreeStrategyMatchesTreePrefixVariance) {
  // Prefix sums of C^{-1} Z for the square tree strategy have the same
  // per-step variance as the tree's prefix noise with unit node noise.
  constexpr int kSteps = 16;
  constexpr int kTrials = 10000;
  constexpr int kDim = 4;
  Eigen::MatrixXd ones = Eigen::MatrixXd::Zero(kSteps, kSteps);
  for (int i = 0; i < kSteps; ++i) ones.row(i).head(i + 1).setOnes();
  auto strategy = *StrategyMatrix::Create(SquareTreeStrategy(kSteps), ones,
                                          {WorkloadKind::kOnes, 1, kSteps});
  std::vector<double> mf_var(kSteps, 0.0), tree_var(kSteps, 0.0);
  for (int trial = 0; trial < kTrials; ++trial) {
    auto stream = *MfNoiseStream::Create(strategy, 0.5, kDim, trial);
    auto tree = *TreeState::Create(kSteps, kDim, 1.0, 900000 + trial);
    ParamVector prefix = ParamVector::Zero(kDim);
    for (int t = 0; t < kSteps; ++t) {
      prefix += *stream.Next();
      mf_var[t] += prefix.squaredNorm();
      ASSERT_TRUE(tree.Ingest(t + 1, ParamVector::Zero(kDim)).ok());
      tree_var[t] += tree.PrefixSum(t + 1)->noise_only.squaredNorm();
    }
  }
  for (int t = 0; t < kSteps; ++t) {
    const double analytic = PrefixNodes(t + 1).size();
    EXPECT_NEAR(mf_var[t] / (kTrials * kDim) / analytic, 1.0, 0.05) << t;
    EXPECT_NEAR(mf_var[t] / tree_var[t], 1.0, 0.05) << t;
  }
}

}  // namespace
}  // namespace dpsrg
