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

#ifndef ECOSERV_FOREST_HPP_
#define ECOSERV_FOREST_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ecoserv/training_set.hpp"

namespace ecoserv {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 0;  // 0 = unlimited
  int min_leaf = 1;
  int mtry = 0;       // 0 = floor(sqrt(feature_dim))
  std::uint64_t seed = 42;
  bool bootstrap = true;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

// Internal nodes route x[feature] <= threshold to `left`. Leaves have
// feature == -1 and carry the class counts of the samples that reached them.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<std::uint32_t> histogram;

  bool is_leaf() const noexcept { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> x) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

struct ForestModel {
  ForestParams params;  // with mtry resolved
  std::size_t class_count = 0;
  std::size_t feature_dim = 0;
  std::vector<std::string> class_names;
  std::vector<DecisionTree> trees;
};

// mtry filled in and every field range-checked against `feature_dim`.
ForestParams resolve_params(const ForestParams& params, std::size_t feature_dim);

// Row indices drawn with replacement (|rows| draws) for tree `tree_index`.
// Identity order when bootstrapping is off.
std::vector<std::uint32_t> bootstrap_sample(std::size_t rows, const ForestParams& params,
                                            std::size_t tree_index);

/// Grows one CART tree on the given sample (duplicates weight rows).
///
/// At each node the features are visited in a random order until `mtry`
/// non-constant ones have been scanned; thresholds are midpoints between
/// consecutive distinct values and the split minimizing summed Gini
/// impurity wins, ties going to the lowest feature index and then the lowest
/// threshold. Nodes that are pure, hold fewer than 2*min_leaf samples, or sit
/// at max_depth become leaves.
DecisionTree grow_tree(const TrainingSet& data, std::span<const std::uint32_t> sample,
                       const ForestParams& resolved, std::uint64_t tree_seed);

// Trains params.n_trees trees in parallel; the model does not depend on
// `threads`.
ForestModel train_forest(const TrainingSet& data, const ForestParams& params,
                         unsigned threads = 0);

// Mean over trees of the normalized leaf histograms.
std::vector<double> predict_proba(const ForestModel& model, std::span<const double> x);
void predict_proba(const ForestModel& model, std::span<const double> x, std::span<double> out);

// Argmax of predict_proba, lowest class id on ties.
int predict_hard(const ForestModel& model, std::span<const double> x);
int argmax_lowest(std::span<const double> p);

std::string serialize_model(const ForestModel& model);
ForestModel parse_model(const std::string& text);
void save_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

}  // namespace ecoserv

#endif  // ECOSERV_FOREST_HPP_
