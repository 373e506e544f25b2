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

#include "dpsrg/optim.h"

#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <set>
#include <vector>

#include "dpsrg/tree_mechanism.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace dpsrg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::unique_ptr<SyntheticQuadratic> Quadratic(Eigen::Index dim, size_t n,
                                              uint64_t seed,
                                              double condition = 10.0,
                                              double spread = 0.5) {
  SyntheticQuadraticOptions o;
  o.dim = dim;
  o.num_examples = n;
  o.condition = condition;
  o.noise_scale = 0.3;
  o.curvature_spread = spread;
  o.seed = seed;
  auto q = SyntheticQuadratic::Create(o);
  EXPECT_TRUE(q.ok()) << q.status();
  return *std::move(q);
}

Batch AllExamples(size_t n) {
  Batch b(n);
  std::iota(b.begin(), b.end(), size_t{0});
  return b;
}

oracle::Vec OracleBatchGrad(const SyntheticQuadratic& q, const Batch& batch,
                            const oracle::Vec& x, double clip = kInf) {
  oracle::Vec sum = oracle::Vec::Zero(x.size());
  for (size_t i : batch) {
    oracle::Vec g = oracle::QuadraticGrad(q.hessian_diagonal(), q.centres().col(i),
                                          q.example_weights()[i], x);
    sum += std::isinf(clip) ? g : oracle::Clip(g, clip);
  }
  return sum / static_cast<double>(batch.size());
}

// Noise-free accelerated SRG method executed line by line.
oracle::Vec OracleAccelerated(const SyntheticQuadratic& q,
                              const BatchList& batches, int steps, double beta,
                              double radius, double clip) {
  const Eigen::Index d = q.dim();
  oracle::Vec x = oracle::Vec::Zero(d), x_prev = x, y = x, z = x;
  oracle::Vec prefix = oracle::Vec::Zero(d);
  double eta_sum = 1.0;  // eta_0
  for (int t = 0; t < steps; ++t) {
    const double eta = t + 1.0, eta_prev = t;
    oracle::Vec delta = oracle::Vec::Zero(d);
    for (size_t i : batches[t]) {
      const auto& u = q.centres().col(i);
      const double a = q.example_weights()[i];
      oracle::Vec diff = eta * oracle::QuadraticGrad(q.hessian_diagonal(), u, a, x);
      if (t > 0) {
        diff -= eta_prev * oracle::QuadraticGrad(q.hessian_diagonal(), u, a, x_prev);
      }
      delta += std::isinf(clip) ? diff : oracle::Clip(diff, clip);
    }
    prefix += delta / static_cast<double>(batches[t].size());
    const oracle::Vec grad = prefix / eta;
    z = oracle::Project(z - (eta / beta) * grad, radius);
    y = oracle::Project(x - grad / beta, radius);
    eta_sum += t + 2.0;
    const double tau = (t + 2.0) / eta_sum;
    x_prev = x;
    x = (1.0 - tau) * y + tau * z;
  }
  return y;
}

TEST(BatchesTest, DisjointBatchesPartitionAPrefix) {
  auto batches = *DisjointBatches(20, 3, 6, std::nullopt);
  std::set<size_t> seen;
  for (const Batch& b : batches) {
    EXPECT_EQ(b.size(), 3u);
    for (size_t i : b) EXPECT_TRUE(seen.insert(i).second);
  }
  EXPECT_EQ(seen.size(), 18u);
  EXPECT_EQ(*seen.rbegin(), 17u);
  auto shuffled = *DisjointBatches(20, 3, 6, 5);
  EXPECT_NE(shuffled, batches);
  EXPECT_EQ(shuffled, *DisjointBatches(20, 3, 6, 5));
  EXPECT_FALSE(DisjointBatches(20, 3, 7, std::nullopt).ok());
}

TEST(BatchesTest, EpochBatchesCoverEverything) {
  auto batches = *EpochBatches(10, 3);
  ASSERT_EQ(batches.size(), 3u);
  EXPECT_EQ(batches[0].size(), 3u);
  EXPECT_EQ(batches[2].size(), 4u);
  EXPECT_FALSE(EpochBatches(2, 3).ok());
}

TEST(ScheduleTest, DefaultTauValues) {
  SrgdConfig cfg;
  cfg.steps = 3;
  const std::vector<double> eta = ResolvedEta(cfg);
  const std::vector<double> tau = ResolvedTau(cfg);
  EXPECT_EQ(eta, (std::vector<double>{1, 2, 3, 4}));
  EXPECT_DOUBLE_EQ(tau[0], 1.0);
  EXPECT_DOUBLE_EQ(tau[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(tau[2], 0.5);
  // eta_{0:t} = (t + 1)(t + 2) / 2 makes tau_t = 2 / (t + 2).
  for (int t = 0; t < 4; ++t) EXPECT_DOUBLE_EQ(tau[t], 2.0 / (t + 2.0));
}

TEST(ScheduleTest, ValidationRejectsBadConfigs) {
  auto q = Quadratic(3, 32, 1);
  SrgdConfig cfg;
  cfg.steps = 2;
  cfg.beta = 2.0;
  EXPECT_TRUE(ValidateSrgdConfig(cfg, *q).ok());
  cfg.beta = 0.5;  // below M = 1
  EXPECT_FALSE(ValidateSrgdConfig(cfg, *q).ok());
  cfg.beta = 2.0;
  cfg.eta = {1.0, 5.0, 6.0};  // 25 > 4 * 6
  EXPECT_FALSE(ValidateSrgdConfig(cfg, *q).ok());
  cfg.eta = {2.0, 1.0, 3.0};  // decreasing
  EXPECT_FALSE(ValidateSrgdConfig(cfg, *q).ok());
  cfg.eta = {1.0, 2.0};  // wrong length
  EXPECT_FALSE(ValidateSrgdConfig(cfg, *q).ok());
  cfg.eta.clear();
  cfg.tau = {1.0, 1.5, 0.5};
  EXPECT_FALSE(ValidateSrgdConfig(cfg, *q).ok());
}

TEST(PotentialTest, Examples) {
  auto q = Quadratic(3, 16, 2);
  const ParamVector x_star = *q->minimizer();
  const ParamVector z = ParamVector::Zero(3);
  EXPECT_NEAR(*Potential(*q, z, z, 0.0, 3.0), 2.0 * 3.0 * x_star.squaredNorm(),
              1e-15);
  EXPECT_EQ(*Potential(*q, x_star, x_star, 10.0, 3.0), 0.0);
}

TEST(AcceleratedTest, SingleStepUnroll) {
  auto q = Quadratic(4, 16, 3);
  BatchList batches = {{0, 1, 2, 3}};
  SrgdConfig cfg;
  cfg.steps = 1;
  cfg.batch = 4;
  cfg.beta = 3.0;
  cfg.ball = *ConstraintBall::Create(0.2);
  auto rec = *RunAcceleratedDpSrgd(*q, batches, cfg);
  const oracle::Vec g = OracleBatchGrad(*q, batches[0], oracle::Vec::Zero(4));
  EXPECT_LE((rec.output - oracle::Project(-g / 3.0, 0.2)).norm(), 1e-15);
  EXPECT_EQ(rec.steps.size(), 1u);
  EXPECT_EQ(*rec.steps[0].noise_norm, 0.0);
}

TEST(AcceleratedProperty, NoiseFreeRunMatchesLineByLineOracle) {
  oracle::Gen gen(61);
  for (int trial = 0; trial < 6; ++trial) {
    auto q = Quadratic(5, 120, 10 + trial);
    const int steps = gen.Int(1, 12);
    const int batch = 120 / steps;
    BatchList batches = *DisjointBatches(120, batch, steps, trial);
    SrgdConfig cfg;
    cfg.steps = steps;
    cfg.batch = batch;
    cfg.beta = gen.Uniform(1.0, 20.0);
    cfg.clip = trial % 2 == 0 ? kInf : gen.Uniform(0.05, 1.0);
    cfg.ball = *ConstraintBall::Create(gen.Uniform(0.3, 1.0));
    auto rec = RunAcceleratedDpSrgd(*q, batches, cfg);
    ASSERT_TRUE(rec.ok()) << rec.status();
    const oracle::Vec want = OracleAccelerated(*q, batches, steps, cfg.beta,
                                               cfg.ball.radius(), cfg.clip);
    EXPECT_LE((rec->output - want).norm(), 1e-12) << "trial " << trial;
  }
}

TEST(AcceleratedTest, IndependentVariantEqualsSrgWithFullBatch) {
  // With exact prefixes the SRG increments telescope to eta_t grad F_n(x_t).
  auto q = Quadratic(6, 64, 4);
  BatchList batches(20, AllExamples(64));
  SrgdConfig cfg;
  cfg.steps = 20;
  cfg.batch = 64;
  cfg.beta = 2.0;
  cfg.ball = *ConstraintBall::Create(1.0);
  auto srg = *RunAcceleratedDpSrgd(*q, batches, cfg);
  auto ind = *RunIndependentVariant(*q, batches, cfg);
  EXPECT_LE((srg.output - ind.output).norm(), 1e-12);
  for (int t = 0; t < 20; ++t) {
    EXPECT_NEAR(srg.steps[t].grad_norm, ind.steps[t].grad_norm,
                1e-12 * (1.0 + ind.steps[t].grad_norm));
  }
}

TEST(AcceleratedProperty, NoiseFreePotentialIsNonIncreasing) {
  // Full-batch runs on ill-conditioned quadratics, several pools and horizons.
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticQuadraticOptions o;
    o.dim = 20;
    o.num_examples = 64;
    o.condition = 1e6;
    o.noise_scale = 0.25;
    o.curvature_spread = 0.5;
    o.seed = seed;
    auto q = *SyntheticQuadratic::Create(o);
    for (int steps : {16, 64}) {
      SrgdConfig cfg;
      cfg.steps = steps;
      cfg.batch = 64;
      cfg.beta = 1.0;
      cfg.ball = *ConstraintBall::Create(1.0);
      auto rec = *RunAcceleratedDpSrgd(*q, BatchList(steps, AllExamples(64)), cfg);
      const double phi0 = *rec.initial_phi;
      double prev = phi0;
      for (const StepRecord& s : rec.steps) {
        EXPECT_LE(*s.phi, prev + 1e-9 * phi0) << "seed " << seed;
        prev = *s.phi;
      }
    }
  }
}

TEST(AcceleratedProperty, NoiseFreeRateBound) {
  // F(y_T) - F* <= beta ||C||^2 / eta_{0:T} with ||C|| = 2R.
  for (double condition : {1.0, 100.0, 1e4}) {
    auto q = Quadratic(8, 64, 5, condition);
    const double radius = 1.0, beta = 1.0;
    for (int steps : {8, 32, 128}) {
      SrgdConfig cfg;
      cfg.steps = steps;
      cfg.batch = 64;
      cfg.beta = beta;
      cfg.ball = *ConstraintBall::Create(radius);
      auto rec = *RunAcceleratedDpSrgd(*q, BatchList(steps, AllExamples(64)), cfg);
      const double eta_sum = (steps + 1.0) * (steps + 2.0) / 2.0;
      EXPECT_LE(*rec.excess, beta * 4.0 * radius * radius / eta_sum)
          << condition << " " << steps;
    }
  }
}

TEST(AcceleratedTest, EachExampleEvaluatedAtMostTwice) {
  auto q = Quadratic(3, 60, 6);
  CountingProblem counting(*q);
  BatchList batches = *DisjointBatches(60, 5, 12, 3);
  SrgdConfig cfg;
  cfg.steps = 12;
  cfg.batch = 5;
  cfg.beta = 50.0;
  cfg.sigma = 0.1;
  cfg.clip = 2.0;
  ASSERT_TRUE(RunAcceleratedDpSrgd(counting, batches, cfg).ok());
  for (int t = 0; t < 12; ++t) {
    for (size_t i : batches[t]) {
      // Step 0 has eta_{-1} = 0, so its second evaluation vanishes.
      EXPECT_EQ(counting.count(i), t == 0 ? 1 : 2) << "example " << i;
    }
  }
}

TEST(AcceleratedTest, PrivateRunRejectsOverlappingBatches) {
  auto q = Quadratic(3, 20, 7);
  BatchList batches = {{0, 1}, {1, 2}};
  SrgdConfig cfg;
  cfg.steps = 2;
  cfg.batch = 2;
  cfg.beta = 2.0;
  cfg.sigma = 1.0;
  EXPECT_EQ(RunAcceleratedDpSrgd(*q, batches, cfg).status().code(),
            absl::StatusCode::kFailedPrecondition);
  cfg.steps = 3;
  EXPECT_FALSE(RunAcceleratedDpSrgd(*q, batches, cfg).ok());
}

TEST(AcceleratedProperty, NoisyIteratesStayFeasible) {
  oracle::Gen gen(62);
  for (int trial = 0; trial < 10; ++trial) {
    auto q = Quadratic(4, 64, 20 + trial);
    SrgdConfig cfg;
    cfg.steps = 16;
    cfg.batch = 4;
    cfg.beta = gen.Uniform(1.0, 5.0);
    cfg.sigma = gen.LogUniform(0.1, 100.0);
    cfg.clip = 1.0;
    cfg.ball = *ConstraintBall::Create(gen.Uniform(0.1, 1.0));
    cfg.seed = trial;
    cfg.keep_gradient_points = true;
    auto rec = *RunAcceleratedDpSrgd(*q, *DisjointBatches(64, 4, 16, trial), cfg);
    EXPECT_LE(rec.output.norm(), cfg.ball.radius() * (1.0 + 1e-12));
    for (const ParamVector& x : rec.gradient_points) {
      EXPECT_LE(x.norm(), cfg.ball.radius() * (1.0 + 1e-12));
    }
    EXPECT_GT(rec.max_noise_norm, 0.0);
  }
}

TEST(AcceleratedTest, SeededRunsAreReproducible) {
  auto q = Quadratic(4, 64, 8);
  SrgdConfig cfg;
  cfg.steps = 16;
  cfg.batch = 4;
  cfg.beta = 3.0;
  cfg.sigma = 0.5;
  cfg.clip = 1.0;
  cfg.ball = *ConstraintBall::Create(1.0);
  cfg.seed = 99;
  const BatchList batches = *DisjointBatches(64, 4, 16, 1);
  auto a = *RunAcceleratedDpSrgd(*q, batches, cfg);
  auto b = *RunAcceleratedDpSrgd(*q, batches, cfg);
  EXPECT_EQ(a.output, b.output);
  cfg.seed = 100;
  EXPECT_NE(RunAcceleratedDpSrgd(*q, batches, cfg)->output, a.output);
}

TEST(AcceleratedTest, IndependentOfGradientWorkers) {
  auto q = Quadratic(4, 1024, 9);
  SrgdConfig cfg;
  cfg.steps = 4;
  cfg.batch = 256;
  cfg.beta = 3.0;
  cfg.sigma = 0.5;
  cfg.clip = 1.0;
  const BatchList batches = *DisjointBatches(1024, 256, 4, 1);
  SetGradientWorkers(1);
  auto serial = *RunAcceleratedDpSrgd(*q, batches, cfg);
  SetGradientWorkers(3);
  auto parallel = *RunAcceleratedDpSrgd(*q, batches, cfg);
  SetGradientWorkers(1);
  EXPECT_EQ(serial.output, parallel.output);
}

TEST(UnacceleratedTest, ZeroLearningRateKeepsStart) {
  auto q = Quadratic(3, 40, 10);
  UnacceleratedConfig cfg;
  cfg.steps = 8;
  cfg.batch = 5;
  cfg.lr = 0.0;
  auto rec = *RunUnacceleratedSrgd(*q, *DisjointBatches(40, 5, 8, 1), cfg, nullptr);
  EXPECT_EQ(rec.output, ParamVector::Zero(3));
}

TEST(UnacceleratedTest, ConstantDecayFullBatchIsGradientDescent) {
  auto q = Quadratic(3, 32, 11);
  UnacceleratedConfig cfg;
  cfg.steps = 10;
  cfg.batch = 32;
  cfg.lr = 0.3;
  cfg.decay = {0.7};
  BatchList batches(10, AllExamples(32));
  auto rec = *RunUnacceleratedSrgd(*q, batches, cfg, nullptr);
  const oracle::Vec want = oracle::ProjectedSgd(
      [&](const oracle::Vec& x, int) { return OracleBatchGrad(*q, batches[0], x); },
      oracle::Vec::Zero(3), 10, 0.3, kInf);
  EXPECT_LE((rec.output - want).norm(), 1e-12);
}

TEST(FrozenPathProbeProperty, SlopeMatchesClosedForm) {
  // Along x_t = x_0 + t v, Delta_t = c H v mean_{i in B_t} a_i for t >= 1, so
  // Var(grad_t) grows by ||H v||^2 Var(a) / B per step. Centres at x* make
  // grad_0 vanish at the start point.
  SyntheticQuadraticOptions o;
  o.dim = 5;
  o.num_examples = 200;
  o.condition = 10.0;
  o.curvature_spread = 0.8;
  o.seed = 12;
  auto q = *SyntheticQuadratic::Create(o);
  const ParamVector start = *q->minimizer();
  ParamVector v = ParamVector::Zero(5);
  v[0] = 0.02;
  v[2] = -0.01;
  const Eigen::VectorXd& a = q->example_weights();
  const double var_a = (a.array() - a.mean()).square().mean();
  const double hv2 = q->hessian_diagonal().cwiseProduct(v).squaredNorm();
  for (double decay : {1.0, 0.5}) {
    auto probe = *FrozenPathVarianceProbe(*q, start, v, decay, 4, 16, 4000, 3);
    EXPECT_NEAR(probe.fit.slope / (hv2 * var_a / 4.0), 1.0, 0.1) << decay;
    EXPECT_GE(probe.fit.r2, 0.9);
  }
}

TEST(UnacceleratedTest, ProbeReportsFourCheckpoints) {
  auto q = Quadratic(3, 400, 13);
  UnacceleratedConfig cfg;
  cfg.steps = 20;
  cfg.batch = 2;
  cfg.lr = 0.05;
  cfg.probe_seeds = 50;
  VarianceProbe probe;
  ASSERT_TRUE(
      RunUnacceleratedSrgd(*q, *DisjointBatches(400, 2, 20, 1), cfg, &probe).ok());
  EXPECT_EQ(probe.checkpoints, (std::vector<int>{5, 10, 15, 20}));
  EXPECT_EQ(probe.variance.size(), 4u);
}

TEST(FitLineTest, ExactLine) {
  const LinearFit fit = FitLine({0, 1, 2, 3}, {1, 3, 5, 7});
  EXPECT_DOUBLE_EQ(fit.slope, 2.0);
  EXPECT_DOUBLE_EQ(fit.intercept, 1.0);
  EXPECT_DOUBLE_EQ(fit.r2, 1.0);
}

TEST(DpSgdTest, NoiseFreeUnclippedIsProjectedSgd) {
  auto q = Quadratic(4, 60, 14);
  const BatchList batches = *DisjointBatches(60, 6, 10, 2);
  auto rec = *RunDpSgd(*q, batches, 0.4, kInf, 0.0, *ConstraintBall::Create(0.5), 0);
  const oracle::Vec want = oracle::ProjectedSgd(
      [&](const oracle::Vec& x, int t) { return OracleBatchGrad(*q, batches[t], x); },
      oracle::Vec::Zero(4), 10, 0.4, 0.5);
  EXPECT_LE((rec.output - want).norm(), 1e-12);
}

TEST(DpSgdTest, ZeroLearningRateIsConstant) {
  auto q = Quadratic(4, 60, 14);
  auto rec = *RunDpSgd(*q, *DisjointBatches(60, 6, 10, 2), 0.0, 1.0, 3.0,
                       ConstraintBall::Unbounded(), 5);
  EXPECT_EQ(rec.output, ParamVector::Zero(4));
}

TEST(DpSgdTest, ClippedDirectionBoundedByClip) {
  auto q = Quadratic(4, 60, 14);
  const BatchList batches = *DisjointBatches(60, 6, 10, 2);
  auto rec = *RunDpSgd(*q, batches, 0.5, 0.01, 0.0, ConstraintBall::Unbounded(), 0);
  for (const StepRecord& s : rec.steps) EXPECT_LE(s.grad_norm, 0.01 * (1 + 1e-12));
  const oracle::Vec want = oracle::ProjectedSgd(
      [&](const oracle::Vec& x, int t) {
        return OracleBatchGrad(*q, batches[t], x, 0.01);
      },
      oracle::Vec::Zero(4), 10, 0.5, kInf);
  EXPECT_LE((rec.output - want).norm(), 1e-13);
}

TEST(DpSgdTest, DivergenceAborts) {
  auto q = Quadratic(2, 8, 15);
  EXPECT_EQ(RunDpSgd(*q, BatchList(400, AllExamples(8)), 1e300, kInf, 0.0,
                     ConstraintBall::Unbounded(), 0)
                .status()
                .code(),
            absl::StatusCode::kOutOfRange);
}

TEST(DpFtrlTest, IdentityStrategyIsDpSgdWithMatchedSigma) {
  auto q = Quadratic(4, 60, 16);
  const BatchList batches = *DisjointBatches(60, 6, 10, 2);
  const double rho = 0.3, clip = 0.5, lr = 0.2;
  const StrategyMatrix identity = StrategyMatrix::Identity(1, 10);
  const ConstraintBall ball = *ConstraintBall::Create(1.0);
  auto ftrl = *RunDpFtrl(*q, batches, lr, clip, identity, rho, ball, 7);
  auto sgd = *RunDpSgd(*q, batches, lr, clip, clip / (6.0 * std::sqrt(2.0 * rho)),
                       ball, 7);
  EXPECT_LE((ftrl.output - sgd.output).norm(), 1e-12);
}

TEST(DpFtrlTest, InfiniteRhoIsNonPrivateSgd) {
  auto q = Quadratic(4, 60, 16);
  const BatchList batches = *DisjointBatches(60, 6, 10, 2);
  auto ftrl = *RunDpFtrl(*q, batches, 0.2, kInf, StrategyMatrix::Identity(1, 10),
                         kInf, ConstraintBall::Unbounded(), 7);
  auto sgd = *RunDpSgd(*q, batches, 0.2, kInf, 0.0, ConstraintBall::Unbounded(), 0);
  EXPECT_EQ(ftrl.output, sgd.output);
  EXPECT_EQ(ftrl.max_noise_norm, 0.0);
}

TEST(DpFtrlTest, RejectsShapeMismatchAndInfiniteClipWithNoise) {
  auto q = Quadratic(4, 60, 16);
  const BatchList batches = *DisjointBatches(60, 6, 10, 2);
  EXPECT_FALSE(RunDpFtrl(*q, batches, 0.2, 1.0, StrategyMatrix::Identity(1, 9),
                         1.0, ConstraintBall::Unbounded(), 0)
                   .ok());
  EXPECT_FALSE(RunDpFtrl(*q, batches, 0.2, kInf, StrategyMatrix::Identity(1, 10),
                         1.0, ConstraintBall::Unbounded(), 0)
                   .ok());
}

TEST(DpFtrlProperty, TreeStrategyMatchesTreeNoisedSgdVariance) {
  // On a problem with identically zero gradients the DP-FTRL iterate is
  // -lr (clip / B) times the prefix of C^{-1} Z, whose variance for the tree
  // strategy equals the tree's prefix variance: popcount(t) per coordinate.
  auto q = Quadratic(4, 32, 17);
  std::vector<size_t> all(32);
  std::iota(all.begin(), all.end(), size_t{0});
  ZeroedProblem zero(*q, all);
  constexpr int kSeeds = 4000;
  for (int steps : {15, 16}) {
    Eigen::MatrixXd ones = Eigen::MatrixXd::Zero(steps, steps);
    for (int i = 0; i < steps; ++i) ones.row(i).head(i + 1).setOnes();
    auto strategy = *StrategyMatrix::Create(SquareTreeStrategy(steps), ones,
                                            {WorkloadKind::kOnes, 1, steps});
    const BatchList batches = *DisjointBatches(32, 2, steps, std::nullopt);
    double sum_sq = 0.0;
    for (int s = 0; s < kSeeds; ++s) {
      // rho = 1/2 and clip = B give unit-variance Z and unit scaling.
      auto rec = *RunDpFtrl(zero, batches, 1.0, 2.0, strategy, 0.5,
                            ConstraintBall::Unbounded(), s);
      sum_sq += rec.output.squaredNorm();
    }
    const double want = PrefixNodes(steps).size();
    EXPECT_NEAR(sum_sq / (kSeeds * 4) / want, 1.0, 0.05) << steps;
  }
}

// C = I / sqrt(k): unit column-group sensitivity for any shape.
StrategyMatrix ScaledIdentity(int k, int b) {
  const int n = k * b;
  return *StrategyMatrix::Create(
      Eigen::MatrixXd::Identity(n, n) / std::sqrt(static_cast<double>(k)),
      *BuildWorkload(WorkloadKind::kOnes, k, b, 0.0, 1.0),
      {WorkloadKind::kOnes, k, b});
}

MemfConfig NoiseFreeMemf(const StrategyMatrix& s, int k, int b) {
  MemfConfig cfg;
  cfg.epochs = k;
  cfg.batches = b;
  cfg.strategy = &s;
  cfg.rho = kInf;
  cfg.clip = kInf;
  cfg.lr = 0.3;
  return cfg;
}

TEST(MemfTest, NoiseFreeZeroMomentumIsEpochSgd) {
  auto q = Quadratic(4, 60, 18);
  const BatchList batches = *EpochBatches(60, 5);
  const StrategyMatrix s = ScaledIdentity(3, 5);
  MemfConfig cfg = NoiseFreeMemf(s, 3, 5);
  cfg.momentum = 0.0;
  auto rec = *RunDpMemf(*q, batches, cfg);
  const oracle::Vec want = oracle::ProjectedSgd(
      [&](const oracle::Vec& x, int t) { return OracleBatchGrad(*q, batches[t % 5], x); },
      oracle::Vec::Zero(4), 15, 0.3, kInf);
  EXPECT_LE((rec.output - want).norm(), 1e-12);
}

TEST(MemfTest, NoiseFreeMomentumMatchesHeavyBallLoop) {
  auto q = Quadratic(4, 60, 18);
  const BatchList batches = *EpochBatches(60, 4);
  const StrategyMatrix s = ScaledIdentity(2, 4);
  MemfConfig cfg = NoiseFreeMemf(s, 2, 4);
  cfg.momentum = 0.9;
  cfg.lr = 0.1;
  auto rec = *RunDpMemf(*q, batches, cfg);
  oracle::Vec x = oracle::Vec::Zero(4), v = x;
  for (int t = 0; t < 8; ++t) {
    v = 0.9 * v + OracleBatchGrad(*q, batches[t % 4], x);
    x = x - 0.1 * v;
  }
  EXPECT_LE((rec.output - x).norm(), 1e-12);
}

TEST(MemfTest, SingleNoisyFullBatchStep) {
  auto q = Quadratic(4, 16, 19);
  const BatchList batches = {AllExamples(16)};
  const StrategyMatrix s = StrategyMatrix::Identity(1, 1);
  MemfConfig cfg = NoiseFreeMemf(s, 1, 1);
  cfg.rho = 0.5;
  cfg.clip = 0.25;
  cfg.seed = 3;
  auto rec = *RunDpMemf(*q, batches, cfg);
  ASSERT_EQ(rec.steps.size(), 1u);
  const oracle::Vec g = OracleBatchGrad(*q, batches[0], oracle::Vec::Zero(4), 0.25);
  // x_1 = -lr (g + b_0).
  EXPECT_NEAR((rec.output + cfg.lr * g).norm(), cfg.lr * *rec.steps[0].noise_norm,
              1e-12);
  EXPECT_GT(*rec.steps[0].noise_norm, 0.0);
}

TEST(MemfTest, SrgWithZeroDecayEqualsNoiseFreeMemf) {
  auto q = Quadratic(4, 60, 20);
  const BatchList batches = *EpochBatches(60, 6);
  const StrategyMatrix s = ScaledIdentity(2, 6);
  MemfConfig cfg = NoiseFreeMemf(s, 2, 6);
  cfg.decay = 0.0;
  auto srg = *RunDpSrgMemf(*q, batches, cfg);
  auto memf = *RunDpMemf(*q, batches, cfg);
  EXPECT_LE((srg.output - memf.output).norm(), 1e-12);
}

TEST(MemfTest, SrgWithUnitDecayTelescopesOnFullBatch) {
  auto q = Quadratic(4, 30, 21);
  const BatchList batches = {AllExamples(30)};
  const StrategyMatrix s = ScaledIdentity(8, 1);
  MemfConfig cfg = NoiseFreeMemf(s, 8, 1);
  cfg.decay = 1.0;
  auto srg = *RunDpSrgMemf(*q, batches, cfg);
  auto memf = *RunDpMemf(*q, batches, cfg);
  EXPECT_LE((srg.output - memf.output).norm(), 1e-12);
}

TEST(MemfTest, NoiseEnteringTwiceIsConfigurable) {
  auto q = Quadratic(4, 40, 22);
  const BatchList batches = *EpochBatches(40, 4);
  auto s = *StrategyMatrix::Create(Eigen::MatrixXd::Identity(4, 4),
                                   Eigen::MatrixXd::Identity(4, 4),
                                   {WorkloadKind::kOnes, 1, 4});
  MemfConfig cfg = NoiseFreeMemf(s, 1, 4);
  cfg.rho = 1.0;
  cfg.clip = 1.0;
  cfg.momentum = 0.0;
  cfg.seed = 5;
  auto twice = *RunDpSrgMemf(*q, batches, cfg);
  cfg.add_noise_twice = false;
  auto once = *RunDpSrgMemf(*q, batches, cfg);
  EXPECT_NE(twice.output, once.output);
  // Only the twice-noised run feeds the noise through the SRG sum again.
  EXPECT_GT(*twice.steps[0].noise_norm, 0.0);
}

TEST(MemfTest, ValidationRejectsBadConfigs) {
  const StrategyMatrix s = ScaledIdentity(2, 3);
  MemfConfig cfg = NoiseFreeMemf(s, 2, 3);
  EXPECT_TRUE(ValidateMemfConfig(cfg).ok());
  cfg.epochs = 3;
  EXPECT_FALSE(ValidateMemfConfig(cfg).ok());
  cfg.epochs = 2;
  cfg.decay = 1.5;
  EXPECT_FALSE(ValidateMemfConfig(cfg).ok());
  cfg.decay = 0.5;
  cfg.momentum = 1.0;
  EXPECT_FALSE(ValidateMemfConfig(cfg).ok());
  cfg.momentum = 0.9;
  cfg.strategy = nullptr;
  EXPECT_FALSE(ValidateMemfConfig(cfg).ok());
  // Identity with k = 2 has column-group sensitivity sqrt(2) > 1.
  const StrategyMatrix wide = StrategyMatrix::Identity(2, 3);
  cfg.strategy = &wide;
  cfg.rho = 1.0;
  EXPECT_FALSE(ValidateMemfConfig(cfg).ok());
}

}  // namespace
}  // namespace dpsrg
