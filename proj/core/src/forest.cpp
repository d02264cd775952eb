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

#include "ecoserv/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "ecoserv/error.hpp"
#include "ecoserv/parallel.hpp"
#include "ecoserv/random.hpp"

namespace ecoserv {
namespace {

using nlohmann::json;
using u128 = unsigned __int128;

constexpr int kModelVersion = 1;

std::uint64_t bootstrap_seed(const ForestParams& p, std::size_t tree) {
  return derive_seed(p.seed, 2 * static_cast<std::uint64_t>(tree));
}
std::uint64_t split_seed(const ForestParams& p, std::size_t tree) {
  return derive_seed(p.seed, 2 * static_cast<std::uint64_t>(tree) + 1);
}

// Gini comparison is done exactly: a split's quality is
//   Q = sum_c L_c^2 / nL + sum_c R_c^2 / nR,
// and lower total impurity means higher Q. Q is held as a fraction of
// integers so equal splits compare equal on every platform.
struct SplitQuality {
  std::uint64_t left_sq = 0, right_sq = 0;
  std::uint64_t n_left = 0, n_right = 0;

  u128 numerator() const {
    return static_cast<u128>(left_sq) * n_right + static_cast<u128>(right_sq) * n_left;
  }
  u128 denominator() const { return static_cast<u128>(n_left) * n_right; }
};

// > 0 when a is better than b, 0 when equal.
int compare(const SplitQuality& a, const SplitQuality& b) {
  const u128 lhs = a.numerator() * b.denominator();
  const u128 rhs = b.numerator() * a.denominator();
  return lhs > rhs ? 1 : (lhs < rhs ? -1 : 0);
}

struct Candidate {
  bool valid = false;
  std::int32_t feature = -1;
  double threshold = 0;
  SplitQuality quality;
};

double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2;
  // Keep lo <= mid < hi so the split separates the two values.
  return mid < hi ? mid : lo;
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const ForestParams& params, std::uint64_t seed)
      : data_(data), params_(params), rng_(seed) {}

  DecisionTree build(std::span<const std::uint32_t> sample) {
    std::vector<std::uint32_t> idx(sample.begin(), sample.end());
    struct Work {
      std::int32_t node;
      std::size_t begin, end;
      int depth;
    };
    DecisionTree tree;
    tree.nodes.emplace_back();
    std::vector<Work> stack{{0, 0, idx.size(), 0}};
    std::vector<std::uint32_t> counts(data_.class_count);
    while (!stack.empty()) {
      const Work w = stack.back();
      stack.pop_back();
      const std::span<std::uint32_t> rows(idx.data() + w.begin, w.end - w.begin);

      std::fill(counts.begin(), counts.end(), 0u);
      for (auto r : rows) ++counts[static_cast<std::size_t>(data_.labels[r])];
      const bool pure =
          std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
      const bool too_small = rows.size() < 2 * static_cast<std::size_t>(params_.min_leaf);
      const bool too_deep = params_.max_depth > 0 && w.depth >= params_.max_depth;

      Candidate best;
      if (!pure && !too_small && !too_deep) best = find_split(rows, counts);
      if (!best.valid) {
        auto& leaf = tree.nodes[static_cast<std::size_t>(w.node)];
        leaf.feature = -1;
        leaf.histogram = counts;
        continue;
      }
      const auto f = static_cast<std::size_t>(best.feature);
      const auto mid = std::stable_partition(rows.begin(), rows.end(), [&](std::uint32_t r) {
        return data_.features[r * data_.feature_dim + f] <= best.threshold;
      });
      const std::size_t split = w.begin + static_cast<std::size_t>(mid - rows.begin());
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      const auto right = left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[static_cast<std::size_t>(w.node)];
      node.feature = best.feature;
      node.threshold = best.threshold;
      node.left = left;
      node.right = right;
      stack.push_back({right, split, w.end, w.depth + 1});
      stack.push_back({left, w.begin, split, w.depth + 1});
    }
    return tree;
  }

 private:
  Candidate find_split(std::span<const std::uint32_t> rows,
                       const std::vector<std::uint32_t>& node_counts) {
    const std::size_t dim = data_.feature_dim;
    std::vector<std::int32_t> order(dim);
    std::iota(order.begin(), order.end(), 0);
    Candidate best;
    int scanned = 0;
    // Lazy Fisher-Yates: position i receives a uniformly chosen remaining feature.
    for (std::size_t i = 0; i < dim && scanned < params_.mtry; ++i) {
      const std::size_t j = i + rng_.uniform_index(dim - i);
      std::swap(order[i], order[j]);
      if (scan_feature(order[i], rows, node_counts, best)) ++scanned;
    }
    return best;
  }

  // Returns false when the feature is constant over the node.
  bool scan_feature(std::int32_t feature, std::span<const std::uint32_t> rows,
                    const std::vector<std::uint32_t>& node_counts, Candidate& best) {
    const auto f = static_cast<std::size_t>(feature);
    values_.clear();
    for (auto r : rows)
      values_.push_back({data_.features[r * data_.feature_dim + f], data_.labels[r]});
    std::sort(values_.begin(), values_.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : a.second < b.second;
    });
    if (values_.front().first == values_.back().first) return false;

    left_.assign(node_counts.size(), 0u);
    right_ = node_counts;
    SplitQuality q;
    q.n_left = 0;
    q.n_right = rows.size();
    q.left_sq = 0;
    q.right_sq = 0;
    for (auto c : right_) q.right_sq += static_cast<std::uint64_t>(c) * c;
    const auto min_leaf = static_cast<std::uint64_t>(params_.min_leaf);

    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
      const auto c = static_cast<std::size_t>(values_[i].second);
      q.left_sq += 2ULL * left_[c] + 1;
      q.right_sq -= 2ULL * right_[c] - 1;
      ++left_[c];
      --right_[c];
      ++q.n_left;
      --q.n_right;
      if (values_[i].first == values_[i + 1].first) continue;
      if (q.n_left < min_leaf || q.n_right < min_leaf) continue;
      const double t = midpoint(values_[i].first, values_[i + 1].first);
      bool take = !best.valid;
      if (!take) {
        const int cmp = compare(q, best.quality);
        take = cmp > 0 ||
               (cmp == 0 && (feature < best.feature ||
                             (feature == best.feature && t < best.threshold)));
      }
      if (take) {
        best.valid = true;
        best.feature = feature;
        best.threshold = t;
        best.quality = q;
      }
    }
    return true;
  }

  const TrainingSet& data_;
  const ForestParams& params_;
  Rng rng_;
  std::vector<std::pair<double, int>> values_;
  std::vector<std::uint32_t> left_, right_;
};

json params_to_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"max_depth", p.max_depth > 0 ? json(p.max_depth) : json(nullptr)},
          {"min_leaf", p.min_leaf},
          {"mtry", p.mtry},
          {"seed", p.seed},
          {"bootstrap", p.bootstrap}};
}

[[noreturn]] void malformed(const std::string& what) {
  throw ValidationError("model file malformed: " + what);
}

template <typename T>
T field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) malformed(std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    malformed(std::string("field '") + name + "' has the wrong type");
  }
}

}  // namespace

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
  const TreeNode* n = &nodes.front();
  while (!n->is_leaf())
    n = &nodes[static_cast<std::size_t>(
        x[static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left : n->right)];
  return *n;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_leaf(); }));
}

ForestParams resolve_params(const ForestParams& params, std::size_t feature_dim) {
  if (feature_dim == 0) throw ValidationError("forest: feature dimension is zero");
  ForestParams p = params;
  if (p.n_trees < 1) throw ValidationError("forest: n_trees must be positive");
  if (p.min_leaf < 1) throw ValidationError("forest: min_leaf must be positive");
  if (p.max_depth < 0) throw ValidationError("forest: max_depth must be >= 0 (0 = unlimited)");
  if (p.mtry < 0) throw ValidationError("forest: mtry must be positive");
  if (p.mtry == 0)
    p.mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(feature_dim)))));
  if (static_cast<std::size_t>(p.mtry) > feature_dim)
    throw ValidationError("forest: mtry=" + std::to_string(p.mtry) +
                          " exceeds feature dimension " + std::to_string(feature_dim));
  return p;
}

std::vector<std::uint32_t> bootstrap_sample(std::size_t rows, const ForestParams& params,
                                            std::size_t tree_index) {
  std::vector<std::uint32_t> sample(rows);
  if (!params.bootstrap) {
    std::iota(sample.begin(), sample.end(), 0u);
    return sample;
  }
  Rng rng(bootstrap_seed(params, tree_index));
  for (auto& s : sample) s = static_cast<std::uint32_t>(rng.uniform_index(rows));
  return sample;
}

DecisionTree grow_tree(const TrainingSet& data, std::span<const std::uint32_t> sample,
                       const ForestParams& resolved, std::uint64_t tree_seed) {
  if (sample.empty()) throw ValidationError("forest: empty sample");
  TreeBuilder builder(data, resolved, tree_seed);
  return builder.build(sample);
}

ForestModel train_forest(const TrainingSet& data, const ForestParams& params,
                         unsigned threads) {
  if (data.rows() == 0) throw ValidationError("forest: training set is empty");
  if (data.class_count == 0) throw ValidationError("forest: class count is zero");
  for (int l : data.labels)
    if (l < 0 || static_cast<std::size_t>(l) >= data.class_count)
      throw ValidationError("forest: label " + std::to_string(l) + " outside class range");
  ForestModel model;
  model.params = resolve_params(params, data.feature_dim);
  if (data.rows() < static_cast<std::size_t>(model.params.min_leaf))
    throw ValidationError("forest: fewer training rows than min_leaf");
  model.class_count = data.class_count;
  model.feature_dim = data.feature_dim;
  model.class_names = data.class_names;
  model.trees.resize(static_cast<std::size_t>(model.params.n_trees));
  parallel_for(model.trees.size(), threads, [&](std::size_t t) {
    const auto sample = bootstrap_sample(data.rows(), model.params, t);
    model.trees[t] = grow_tree(data, sample, model.params, split_seed(model.params, t));
  });
  return model;
}

void predict_proba(const ForestModel& model, std::span<const double> x, std::span<double> out) {
  if (x.size() != model.feature_dim)
    throw ValidationError("predict: feature vector has " + std::to_string(x.size()) +
                          " entries, model expects " + std::to_string(model.feature_dim));
  if (out.size() != model.class_count)
    throw ValidationError("predict: output has the wrong class count");
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& tree : model.trees) {
    const auto& hist = tree.leaf_for(x).histogram;
    std::uint64_t total = 0;
    for (auto c : hist) total += c;
    const double inv = 1.0 / static_cast<double>(total);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += static_cast<double>(hist[c]) * inv;
  }
  const double inv_trees = 1.0 / static_cast<double>(model.trees.size());
  for (auto& p : out) p *= inv_trees;
}

std::vector<double> predict_proba(const ForestModel& model, std::span<const double> x) {
  std::vector<double> p(model.class_count);
  predict_proba(model, x, p);
  return p;
}

int argmax_lowest(std::span<const double> p) {
  int best = 0;
  for (std::size_t c = 1; c < p.size(); ++c)
    if (p[c] > p[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  return best;
}

int predict_hard(const ForestModel& model, std::span<const double> x) {
  return argmax_lowest(predict_proba(model, x));
}

std::string serialize_model(const ForestModel& model) {
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
      if (n.is_leaf())
        nodes.push_back(json::array({-1, n.histogram}));
      else
        nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right}));
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  json j = {{"version", kModelVersion},
            {"params", params_to_json(model.params)},
            {"class_count", model.class_count},
            {"feature_dim", model.feature_dim},
            {"class_names", model.class_names},
            {"trees", std::move(trees)}};
  return j.dump() + "\n";
}

ForestModel parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    malformed(e.what());
  }
  if (!j.is_object()) malformed("top level is not an object");
  const int version = field<int>(j, "version");
  if (version != kModelVersion)
    throw ValidationError("model file version " + std::to_string(version) +
                          " is not supported (expected " + std::to_string(kModelVersion) + ")");
  ForestModel m;
  m.class_count = field<std::size_t>(j, "class_count");
  m.feature_dim = field<std::size_t>(j, "feature_dim");
  if (m.class_count == 0 || m.feature_dim == 0) malformed("zero class_count or feature_dim");
  if (j.contains("class_names")) m.class_names = field<std::vector<std::string>>(j, "class_names");
  if (!m.class_names.empty() && m.class_names.size() != m.class_count)
    malformed("class_names length differs from class_count");
  const json& p = j.contains("params") ? j["params"] : json();
  m.params.n_trees = field<int>(p, "n_trees");
  m.params.max_depth = p.contains("max_depth") && !p["max_depth"].is_null()
                           ? field<int>(p, "max_depth")
                           : 0;
  m.params.min_leaf = field<int>(p, "min_leaf");
  m.params.mtry = field<int>(p, "mtry");
  m.params.seed = field<std::uint64_t>(p, "seed");
  m.params.bootstrap = p.contains("bootstrap") ? field<bool>(p, "bootstrap") : true;

  if (!j.contains("trees") || !j["trees"].is_array()) malformed("missing 'trees' array");
  for (const auto& jt : j["trees"]) {
    if (!jt.is_object() || !jt.contains("nodes") || !jt["nodes"].is_array() ||
        jt["nodes"].empty())
      malformed("tree without nodes");
    DecisionTree tree;
    const auto& jn = jt["nodes"];
    const auto count = static_cast<std::int64_t>(jn.size());
    std::vector<int> parents(jn.size(), 0);
    for (std::int64_t i = 0; i < count; ++i) {
      const auto& a = jn[static_cast<std::size_t>(i)];
      TreeNode n;
      try {
        if (!a.is_array() || a.empty()) malformed("node is not an array");
        n.feature = a[0].get<std::int32_t>();
        if (n.feature < 0) {
          if (a.size() != 2) malformed("leaf node must be [-1, histogram]");
          n.feature = -1;
          n.histogram = a[1].get<std::vector<std::uint32_t>>();
          if (n.histogram.size() != m.class_count) malformed("leaf histogram length");
          std::uint64_t total = 0;
          for (auto c : n.histogram) total += c;
          if (total == 0) malformed("empty leaf histogram");
        } else {
          if (a.size() != 4) malformed("internal node must be [feature, threshold, left, right]");
          n.threshold = a[1].get<double>();
          n.left = a[2].get<std::int32_t>();
          n.right = a[3].get<std::int32_t>();
          if (static_cast<std::size_t>(n.feature) >= m.feature_dim) malformed("feature index");
          if (n.left <= i || n.right <= i || n.left >= count || n.right >= count ||
              n.left == n.right)
            malformed("child index out of range");
          ++parents[static_cast<std::size_t>(n.left)];
          ++parents[static_cast<std::size_t>(n.right)];
        }
      } catch (const json::exception&) {
        malformed("node field has the wrong type");
      }
      tree.nodes.push_back(std::move(n));
    }
    for (std::size_t i = 1; i < parents.size(); ++i)
      if (parents[i] != 1) malformed("node " + std::to_string(i) + " is not referenced exactly once");
    m.trees.push_back(std::move(tree));
  }
  if (m.trees.empty() || m.trees.size() != static_cast<std::size_t>(m.params.n_trees))
    malformed("tree count does not match params.n_trees");
  return m;
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_model(model);
  if (!out) throw IoError("short write to " + path.string());
}

ForestModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open model " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace ecoserv
