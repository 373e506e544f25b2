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

#include "dpsrg/dataset.h"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "dpsrg/status_macros.h"

namespace dpsrg {
namespace {

absl::StatusOr<std::vector<unsigned char>> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

uint32_t BigEndian32(const std::vector<unsigned char>& bytes, size_t offset) {
  return (uint32_t{bytes[offset]} << 24) | (uint32_t{bytes[offset + 1]} << 16) |
         (uint32_t{bytes[offset + 2]} << 8) | uint32_t{bytes[offset + 3]};
}

}  // namespace

absl::StatusOr<LabeledSet> LoadIdx(const std::string& images_path,
                                   const std::string& labels_path) {
  ASSIGN_OR_RETURN(std::vector<unsigned char> images, ReadFile(images_path));
  ASSIGN_OR_RETURN(std::vector<unsigned char> labels, ReadFile(labels_path));
  if (images.size() < 16 || BigEndian32(images, 0) != 2051) {
    return absl::DataLossError(
        absl::StrCat(images_path, ": bad idx3 magic (expected 2051)"));
  }
  if (labels.size() < 8 || BigEndian32(labels, 0) != 2049) {
    return absl::DataLossError(
        absl::StrCat(labels_path, ": bad idx1 magic (expected 2049)"));
  }
  const size_t n = BigEndian32(images, 4);
  const size_t rows = BigEndian32(images, 8);
  const size_t cols = BigEndian32(images, 12);
  const size_t p = rows * cols;
  if (images.size() != 16 + n * p) {
    return absl::DataLossError(absl::StrCat(
        images_path, ": expected ", 16 + n * p, " bytes, found ",
        images.size()));
  }
  if (BigEndian32(labels, 4) != n || labels.size() != 8 + n) {
    return absl::DataLossError(absl::StrCat(
        labels_path, ": label count does not match ", n, " images"));
  }
  LabeledSet set;
  set.features.resize(static_cast<Eigen::Index>(p),
                      static_cast<Eigen::Index>(n));
  set.labels.resize(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < p; ++j) {
      set.features(j, i) = images[16 + i * p + j] / 255.0;
    }
    set.labels[i] = labels[8 + i];
  }
  return set;
}

absl::StatusOr<LabeledSet> LoadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::string line;
  if (!std::getline(in, line)) {
    return absl::DataLossError(absl::StrCat(path, ": missing header row"));
  }
  const size_t columns = std::vector<std::string>(absl::StrSplit(line, ',')).size();
  if (columns < 2) {
    return absl::DataLossError(
        absl::StrCat(path, ": need a label and at least one feature"));
  }
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view view = absl::StripAsciiWhitespace(line);
    if (view.empty()) continue;
    std::vector<absl::string_view> fields = absl::StrSplit(view, ',');
    if (fields.size() != columns) {
      return absl::DataLossError(absl::StrCat(
          path, ":", line_no, ": expected ", columns, " fields, got ",
          fields.size()));
    }
    int label;
    if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(fields[0]), &label)) {
      return absl::DataLossError(
          absl::StrCat(path, ":", line_no, ": label is not an integer"));
    }
    std::vector<double> row(columns - 1);
    for (size_t j = 1; j < columns; ++j) {
      if (!absl::SimpleAtod(absl::StripAsciiWhitespace(fields[j]),
                            &row[j - 1])) {
        return absl::DataLossError(absl::StrCat(
            path, ":", line_no, ": field ", j, " is not a number"));
      }
    }
    labels.push_back(label);
    rows.push_back(std::move(row));
  }
  LabeledSet set;
  set.features.resize(static_cast<Eigen::Index>(columns - 1),
                      static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j + 1 < columns; ++j) set.features(j, i) = rows[i][j];
  }
  set.labels = std::move(labels);
  return set;
}

absl::Status SaveCsv(const LabeledSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot open ", path));
  out << "label";
  for (Eigen::Index j = 0; j < set.features.rows(); ++j) out << ",x" << j;
  out << "\n";
  for (size_t i = 0; i < set.size(); ++i) {
    out << set.labels[i];
    for (Eigen::Index j = 0; j < set.features.rows(); ++j) {
      out << absl::StrFormat(",%.17g", set.features(j, i));
    }
    out << "\n";
  }
  if (!out) return absl::DataLossError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

void NormalizeMinMax(LabeledSet& train, LabeledSet& test) {
  for (Eigen::Index j = 0; j < train.features.rows(); ++j) {
    if (train.features.cols() == 0) break;
    const double lo = train.features.row(j).minCoeff();
    const double hi = train.features.row(j).maxCoeff();
    const double range = hi - lo;
    auto scale = [&](Eigen::MatrixXd& m) {
      if (m.cols() == 0) return;
      if (range > 0.0) {
        m.row(j) = ((m.row(j).array() - lo) / range).cwiseMax(0.0).cwiseMin(1.0);
      } else {
        m.row(j).setZero();
      }
    };
    scale(train.features);
    scale(test.features);
  }
}

void AppendBias(LabeledSet& set) {
  set.features.conservativeResize(set.features.rows() + 1, Eigen::NoChange);
  set.features.row(set.features.rows() - 1).setOnes();
}

absl::StatusOr<std::unique_ptr<LogisticTask>> LoadDataset(
    const std::string& directory, DatasetFormat format, int num_classes) {
  const std::filesystem::path dir(directory);
  LabeledSet train, test;
  if (format == DatasetFormat::kIdx) {
    ASSIGN_OR_RETURN(train, LoadIdx((dir / "train-images-idx3-ubyte").string(),
                                    (dir / "train-labels-idx1-ubyte").string()));
    ASSIGN_OR_RETURN(test, LoadIdx((dir / "t10k-images-idx3-ubyte").string(),
                                   (dir / "t10k-labels-idx1-ubyte").string()));
  } else {
    ASSIGN_OR_RETURN(train, LoadCsv((dir / "train.csv").string()));
    ASSIGN_OR_RETURN(test, LoadCsv((dir / "test.csv").string()));
    if (train.features.rows() != test.features.rows()) {
      return absl::DataLossError("train and test feature counts differ");
    }
    NormalizeMinMax(train, test);
  }
  for (const LabeledSet* set : {&train, &test}) {
    for (int label : set->labels) {
      if (label < 0 || label >= num_classes) {
        return absl::OutOfRangeError(absl::StrCat(
            "label ", label, " outside [0, ", num_classes, ")"));
      }
    }
  }
  AppendBias(train);
  AppendBias(test);
  return LogisticTask::Create(std::move(train), std::move(test), num_classes);
}

}  // namespace dpsrg
