// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPAUDIT_DATASET_H_
#define DPAUDIT_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace dpaudit {

// Tabular binary-classification data: one row of `features` per example and
// a 0/1 entry of `targets`.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd targets;

  int64_t size() const { return features.rows(); }
  int64_t dim() const { return features.cols(); }
};

// Throws std::domain_error on shape mismatch, non-finite entries or labels
// other than 0/1.
void ValidateDataset(const Dataset& data);

// Synthetic Gaussian features with targets 1[x . w / sqrt(d) + noise >
// median], so both classes are (almost exactly) equally represented.
Dataset MakeDataset(uint64_t seed, int64_t n, int64_t d);

// CSV with a header row; feature columns first, target column last.
void SaveDatasetCsv(const Dataset& data, const std::filesystem::path& path);
Dataset LoadDatasetCsv(const std::filesystem::path& path);

// Mini-batch index lists B_0 ... B_{T-1}. Fixed up-front and identical for
// every audit run.
struct BatchSchedule {
  std::vector<std::vector<int64_t>> batches;
};

// Deterministic schedule that walks through a fresh permutation of the data
// each epoch, carrying over into the next permutation when n is not a
// multiple of the batch size.
BatchSchedule FixedBatches(uint64_t seed, int64_t n, int64_t batch_size,
                           int64_t steps);

// Rows of `data` selected by `indices`.
void GatherBatch(const Dataset& data, const std::vector<int64_t>& indices,
                 Eigen::MatrixXd& features, Eigen::VectorXd& targets);

}  // namespace dpaudit

#endif  // DPAUDIT_DATASET_H_
