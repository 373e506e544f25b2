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

#ifndef DPSRG_VERIFICATION_H_
#define DPSRG_VERIFICATION_H_

#include <string>
#include <vector>

namespace dpsrg {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  bool skipped = false;   // prerequisites (e.g. data files) missing
  std::string detail;     // measured values against their thresholds
  double seconds = 0.0;
  double limit_seconds = 0.0;
};

struct VerifyOptions {
  // Directory with the MNIST idx files; empty falls back to $DPSRG_DATA_DIR.
  std::string data_dir;
  // Criterion 10 is skipped when false, regardless of data.
  bool include_figure = true;
  int workers = 1;
};

constexpr int kNumCriteria = 10;

// Runs one acceptance criterion (1..10). A criterion passes only when its
// check holds and it finishes within its runtime limit.
CriterionResult RunCriterion(int id, const VerifyOptions& options);
std::vector<CriterionResult> RunAcceptanceSuite(const VerifyOptions& options);

// "[PASS] 3 sensitivity bound (0.41 s / 30 s): ..." style line.
std::string FormatCriterion(const CriterionResult& result);

}  // namespace dpsrg

#endif  // DPSRG_VERIFICATION_H_
