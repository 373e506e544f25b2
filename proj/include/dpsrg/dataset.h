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

#ifndef DPSRG_DATASET_H_
#define DPSRG_DATASET_H_

#include <memory>
#include <string>

#include "absl/status/statusor.h"
#include "dpsrg/objectives.h"

namespace dpsrg {

// Reads an idx3 image file (magic 2051) and an idx1 label file (magic 2049).
// Pixels are scaled to [0, 1]; no bias column is added.
absl::StatusOr<LabeledSet> LoadIdx(const std::string& images_path,
                                   const std::string& labels_path);

// CSV with a header row, then rows of label,feature_1,...,feature_p.
absl::StatusOr<LabeledSet> LoadCsv(const std::string& path);
// Writes the same layout with 17 significant digits.
absl::Status SaveCsv(const LabeledSet& set, const std::string& path);

// Min-max scales every feature to [0, 1] using the ranges of `train`; test
// values are clamped. Constant features map to 0.
void NormalizeMinMax(LabeledSet& train, LabeledSet& test);
// Appends a constant-1 feature row.
void AppendBias(LabeledSet& set);

enum class DatasetFormat { kIdx, kCsv };

// Loads a train/test pair as a logistic-regression task. For idx the
// directory holds the four standard MNIST files; for csv it holds train.csv
// and test.csv. Labels must lie in [0, num_classes).
absl::StatusOr<std::unique_ptr<LogisticTask>> LoadDataset(
    const std::string& directory, DatasetFormat format, int num_classes);

}  // namespace dpsrg

#endif  // DPSRG_DATASET_H_
