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

#ifndef DPSRG_RANDOM_H_
#define DPSRG_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

#include "Eigen/Core"

namespace dpsrg {

// SplitMix64: a tiny counter-based generator. Streams are cheap to create,
// so every noise node, run and grid point gets its own keyed stream.
class SplitMix64 {
 public:
  using result_type = uint64_t;

  explicit SplitMix64(uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  uint64_t state_;
};

// Derives a child seed from a parent seed and a list of keys. Distinct key
// tuples give statistically independent streams.
inline uint64_t DeriveSeed(uint64_t seed, std::initializer_list<uint64_t> keys) {
  uint64_t h = seed ^ 0x6a09e667f3bcc909ULL;
  for (uint64_t k : keys) {
    SplitMix64 mix(h ^ (k * 0xd6e8feb86659fd93ULL));
    h = mix() ^ (h << 1);
  }
  return SplitMix64(h)();
}

// Fills `out` with i.i.d. N(0, stddev^2) draws from `engine`.
template <typename Engine>
void FillGaussian(Engine& engine, double stddev, Eigen::Ref<Eigen::VectorXd> out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = stddev * normal(engine);
}

// Standard normal vector from the stream keyed by (seed, keys).
inline Eigen::VectorXd KeyedGaussian(uint64_t seed,
                                     std::initializer_list<uint64_t> keys,
                                     Eigen::Index dim, double stddev = 1.0) {
  SplitMix64 engine(DeriveSeed(seed, keys));
  Eigen::VectorXd v(dim);
  FillGaussian(engine, stddev, v);
  return v;
}

}  // namespace dpsrg

#endif  // DPSRG_RANDOM_H_
