// Copyright 2026 The Ecoserv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ECOSERV_TRAINING_SET_HPP_
#define ECOSERV_TRAINING_SET_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ecoserv/features.hpp"
#include "ecoserv/snic.hpp"

namespace ecoserv {

struct LabelPoint {
  int x = 0;
  int y = 0;
  int class_id = 0;
};

struct ClassVocabulary {
  std::vector<std::string> names;  // index == class id
  std::size_t size() const noexcept { return names.size(); }
};

/// Forest training rows: a feature vector and one class label each. A
/// segment hit by several label points contributes one row per point.
struct TrainingSet {
  std::size_t feature_dim = 0;
  std::vector<double> features;  // rows * feature_dim, row-major
  std::vector<int> labels;
  std::vector<std::int32_t> segment_ids;  // source segment of each row
  std::size_t class_count = 0;
  std::vector<std::string> class_names;
  std::size_t dropped_points = 0;  // out-of-bounds points skipped

  std::size_t rows() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t r) const {
    return {features.data() + r * feature_dim, feature_dim};
  }
  void add_row(std::span<const double> x, int label, std::int32_t segment = -1);
};

// Joins points to the segment under each pixel. Out-of-bounds points are
// dropped and counted; throws ValidationError when every point is dropped,
// the feature matrix is empty, or a class id is outside the vocabulary.
TrainingSet build_training_set(const FeatureMatrix& features, const SegmentationMap& seg,
                               std::span<const LabelPoint> points,
                               const ClassVocabulary& classes);

// points.csv: x,y,class_id
std::vector<LabelPoint> read_points_csv(const std::filesystem::path& path);
void write_points_csv(std::span<const LabelPoint> points, const std::filesystem::path& path);

// classes.csv: class_id,class_name with dense ids 0..C-1.
ClassVocabulary read_classes_csv(const std::filesystem::path& path);
void write_classes_csv(const ClassVocabulary& classes, const std::filesystem::path& path);

}  // namespace ecoserv

#endif  // ECOSERV_TRAINING_SET_HPP_
