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

#include "dpaudit/dataset.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dpaudit/csv.h"
#include "dpaudit/random.h"

namespace dpaudit {
namespace {

constexpr double kLabelNoise = 0.5;

}  // namespace

void ValidateDataset(const Dataset& data) {
  if (data.features.rows() != data.targets.size()) {
    throw std::domain_error("dataset: feature and target counts differ");
  }
  if (!data.features.allFinite() || !data.targets.allFinite()) {
    throw std::domain_error("dataset: non-finite entries");
  }
  for (Eigen::Index i = 0; i < data.targets.size(); ++i) {
    if (data.targets[i] != 0.0 && data.targets[i] != 1.0) {
      throw std::domain_error("dataset: targets must be 0 or 1");
    }
  }
}

Dataset MakeDataset(uint64_t seed, int64_t n, int64_t d) {
  if (n < 1 || d < 1) throw std::domain_error("MakeDataset: n, d >= 1");
  Rng rng = MakeStream(seed, StreamTag::kDataset);
  NormalSampler normal;
  Eigen::VectorXd w(d);
  for (Eigen::Index j = 0; j < d; ++j) w[j] = normal(rng);

  Dataset data;
  data.features.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.features(i, j) = normal(rng);
  }
  Eigen::VectorXd score =
      data.features * w / std::sqrt(static_cast<double>(d));
  for (Eigen::Index i = 0; i < n; ++i) score[i] += kLabelNoise * normal(rng);

  std::vector<double> sorted(score.data(), score.data() + n);
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double median = sorted[n / 2];
  data.targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.targets[i] = score[i] >= median ? 1.0 : 0.0;
  }
  return data;
}

void SaveDatasetCsv(const Dataset& data, const std::filesystem::path& path) {
  ValidateDataset(data);
  std::vector<std::string> header;
  for (int64_t j = 0; j < data.dim(); ++j) {
    header.push_back("x" + std::to_string(j));
  }
  header.emplace_back("target");
  std::vector<std::string> rows;
  rows.reserve(data.size());
  for (int64_t i = 0; i < data.size(); ++i) {
    std::vector<std::string> fields;
    for (int64_t j = 0; j < data.dim(); ++j) {
      fields.push_back(FormatDouble(data.features(i, j)));
    }
    fields.push_back(FormatDouble(data.targets[i]));
    rows.push_back(JoinCsv(fields));
  }
  WriteCsv(path, JoinCsv(header), rows);
}

Dataset LoadDatasetCsv(const std::filesystem::path& path) {
  const CsvTable table = ReadCsv(path);
  if (table.header.size() < 2) {
    throw std::domain_error("dataset csv needs features and a target column");
  }
  const int64_t d = static_cast<int64_t>(table.header.size()) - 1;
  const int64_t n = static_cast<int64_t>(table.rows.size());
  Dataset data;
  data.features.resize(n, d);
  data.targets.resize(n);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < d; ++j) {
      data.features(i, j) = std::stod(table.rows[i][j]);
    }
    data.targets[i] = std::stod(table.rows[i][d]);
  }
  ValidateDataset(data);
  return data;
}

BatchSchedule FixedBatches(uint64_t seed, int64_t n, int64_t batch_size,
                           int64_t steps) {
  if (n < 1 || batch_size < 1 || steps < 0) {
    throw std::domain_error("FixedBatches: need n, batch_size >= 1");
  }
  if (batch_size > n) {
    throw std::domain_error("FixedBatches: batch_size " +
                            std::to_string(batch_size) + " exceeds n " +
                            std::to_string(n));
  }
  Rng rng = MakeStream(seed, StreamTag::kBatches);
  std::vector<int64_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  size_t cursor = perm.size();

  BatchSchedule schedule;
  schedule.batches.reserve(steps);
  for (int64_t t = 0; t < steps; ++t) {
    std::vector<int64_t> batch;
    batch.reserve(batch_size);
    while (static_cast<int64_t>(batch.size()) < batch_size) {
      if (cursor == perm.size()) {
        std::shuffle(perm.begin(), perm.end(), rng);
        cursor = 0;
      }
      batch.push_back(perm[cursor++]);
    }
    schedule.batches.push_back(std::move(batch));
  }
  return schedule;
}

void GatherBatch(const Dataset& data, const std::vector<int64_t>& indices,
                 Eigen::MatrixXd& features, Eigen::VectorXd& targets) {
  const Eigen::Index b = static_cast<Eigen::Index>(indices.size());
  features.resize(b, data.dim());
  targets.resize(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    features.row(i) = data.features.row(indices[i]);
    targets[i] = data.targets[indices[i]];
  }
}

}  // namespace dpaudit
