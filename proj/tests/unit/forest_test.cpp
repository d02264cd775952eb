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

#include <doctest.h>

#include <cstring>
#include <set>

#include "ecoserv/error.hpp"
#include "ecoserv/forest.hpp"
#include "test_support.hpp"

using namespace ecoserv;
using ecoserv::testing::TempDir;

namespace {

TrainingSet make_set(std::size_t classes) {
  TrainingSet ts;
  ts.class_count = classes;
  for (std::size_t c = 0; c < classes; ++c) ts.class_names.push_back("c" + std::to_string(c));
  return ts;
}

// Random data with a weak signal on the first features.
TrainingSet random_set(Rng& rng, std::size_t rows, std::size_t dim, std::size_t classes) {
  auto ts = make_set(classes);
  std::vector<double> x(dim);
  for (std::size_t r = 0; r < rows; ++r) {
    const int label = static_cast<int>(rng.uniform_index(classes));
    for (std::size_t d = 0; d < dim; ++d)
      x[d] = (d < 3 ? label : 0) + rng.normal();
    ts.add_row(x, label);
  }
  return ts;
}

ForestParams single_tree() {
  ForestParams p;
  p.n_trees = 1;
  p.mtry = 1;
  p.bootstrap = false;
  return p;
}

struct OracleSplit {
  bool exists = false;
  double threshold = 0;
};

// Weighted Gini impurity of every midpoint split, minimised; lowest threshold on ties.
OracleSplit exhaustive_split(const std::vector<double>& xs, const std::vector<int>& ys,
                             int classes) {
  std::vector<double> distinct(xs);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  OracleSplit best;
  long double best_impurity = 0;
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    const double t = (distinct[i] + distinct[i + 1]) / 2;
    std::vector<long double> l(classes, 0), r(classes, 0);
    long double nl = 0, nr = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (xs[k] <= t) {
        l[ys[k]] += 1;
        nl += 1;
      } else {
        r[ys[k]] += 1;
        nr += 1;
      }
    }
    long double gl = 1, gr = 1;
    for (int c = 0; c < classes; ++c) {
      gl -= (l[c] / nl) * (l[c] / nl);
      gr -= (r[c] / nr) * (r[c] / nr);
    }
    const long double impurity = nl * gl + nr * gr;
    if (!best.exists || impurity < best_impurity - 1e-12L) {
      best.exists = true;
      best.threshold = t;
      best_impurity = impurity;
    }
  }
  return best;
}

bool tree_well_formed(const DecisionTree& t, std::size_t classes, std::size_t dim,
                      int min_leaf) {
  std::vector<int> parents(t.nodes.size(), 0);
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& n = t.nodes[i];
    if (n.is_leaf()) {
      if (n.histogram.size() != classes) return false;
      std::uint64_t total = 0;
      for (auto c : n.histogram) total += c;
      if (total < static_cast<std::uint64_t>(min_leaf)) return false;
      continue;
    }
    if (static_cast<std::size_t>(n.feature) >= dim) return false;
    if (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i)) return false;
    if (static_cast<std::size_t>(n.left) >= t.nodes.size() ||
        static_cast<std::size_t>(n.right) >= t.nodes.size())
      return false;
    ++parents[static_cast<std::size_t>(n.left)];
    ++parents[static_cast<std::size_t>(n.right)];
  }
  for (std::size_t i = 1; i < parents.size(); ++i)
    if (parents[i] != 1) return false;
  return true;
}

}  // namespace

TEST_CASE("single-class data gives one-leaf trees and one-hot output") {
  Rng rng(1);
  auto ts = make_set(3);
  for (int i = 0; i < 40; ++i) {
    const std::vector<double> x = {rng.normal(), rng.normal()};
    ts.add_row(x, 2);
  }
  ForestParams p;
  p.n_trees = 10;
  const auto m = train_forest(ts, p, 1);
  for (const auto& t : m.trees) CHECK(t.nodes.size() == 1);
  const std::vector<double> q = {0.3, -4.0};
  CHECK(predict_proba(m, q) == std::vector<double>{0, 0, 1});
}

TEST_CASE("separable classes split between their supports") {
  auto ts = make_set(2);
  for (double v : {0.0, 1.0, 2.0, 3.0}) ts.add_row(std::vector<double>{v}, 0);
  for (double v : {10.0, 11.0, 12.0}) ts.add_row(std::vector<double>{v}, 1);
  const auto m = train_forest(ts, single_tree(), 1);
  const auto& root = m.trees[0].nodes[0];
  REQUIRE_FALSE(root.is_leaf());
  CHECK(root.threshold == 6.5);
  for (std::size_t r = 0; r < ts.rows(); ++r) CHECK(predict_hard(m, ts.row(r)) == ts.labels[r]);
}

TEST_CASE("root split equals exhaustive enumeration on tiny instances") {
  Rng rng(2718);
  int checked = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(7);
    const int classes = 2 + static_cast<int>(rng.uniform_index(2));
    const int levels = 2 + static_cast<int>(rng.uniform_index(5));
    auto ts = make_set(static_cast<std::size_t>(classes));
    std::vector<double> xs;
    std::vector<int> ys;
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back(static_cast<double>(rng.uniform_index(levels)) * 0.5);
      ys.push_back(static_cast<int>(rng.uniform_index(classes)));
      ts.add_row(std::vector<double>{xs.back()}, ys.back());
    }
    const bool pure = std::set<int>(ys.begin(), ys.end()).size() == 1;
    const auto oracle = exhaustive_split(xs, ys, classes);
    const auto m = train_forest(ts, single_tree(), 1);
    const auto& root = m.trees[0].nodes[0];
    if (pure || !oracle.exists) {
      CHECK(root.is_leaf());
      continue;
    }
    REQUIRE_FALSE(root.is_leaf());
    CAPTURE(trial);
    CHECK(root.threshold == oracle.threshold);
    ++checked;
  }
  CHECK(checked > 10000);
}

TEST_CASE("two-tree averaging of leaf frequencies") {
  ForestModel m;
  m.class_count = 2;
  m.feature_dim = 1;
  m.params.n_trees = 2;
  DecisionTree a, b;
  a.nodes.push_back({-1, 0, -1, -1, {3, 1}});
  b.nodes.push_back({-1, 0, -1, -1, {1, 1}});
  m.trees = {a, b};
  const auto p = predict_proba(m, std::vector<double>{0.0});
  CHECK(p[0] == 0.625);
  CHECK(p[1] == 0.375);
  CHECK(predict_hard(m, std::vector<double>{0.0}) == 0);
}

TEST_CASE("argmax ties go to the lowest class") {
  CHECK(argmax_lowest(std::vector<double>{0.2, 0.7, 0.1}) == 1);
  CHECK(argmax_lowest(std::vector<double>{0.5, 0.5}) == 0);
  CHECK(argmax_lowest(std::vector<double>{0.1, 0.45, 0.45}) == 1);
}

TEST_CASE("probabilities and consistency on random inputs") {
  Rng rng(11);
  const auto ts = random_set(rng, 300, 12, 4);
  ForestParams p;
  p.n_trees = 25;
  const auto m = train_forest(ts, p, 2);
  for (const auto& t : m.trees) CHECK(tree_well_formed(t, 4, 12, p.min_leaf));
  std::vector<double> x(12);
  for (int i = 0; i < 2000; ++i) {
    for (auto& v : x) v = 3 * rng.normal();
    const auto prob = predict_proba(m, x);
    double sum = 0;
    for (double v : prob) {
      CHECK(v >= 0);
      sum += v;
    }
    CHECK(std::abs(sum - 1) <= 1e-12);
    CHECK(predict_hard(m, x) == argmax_lowest(prob));
  }
  CHECK_THROWS_AS(predict_proba(m, std::vector<double>(11)), ValidationError);
}

TEST_CASE("fixed seed is byte-identical across runs and thread counts") {
  Rng rng(12);
  const auto ts = random_set(rng, 400, 10, 3);
  ForestParams p;
  p.n_trees = 16;
  const auto reference = serialize_model(train_forest(ts, p, 1));
  CHECK(serialize_model(train_forest(ts, p, 1)) == reference);
  for (unsigned t : {2u, 3u, 7u}) CHECK(serialize_model(train_forest(ts, p, t)) == reference);
  p.seed = 43;
  CHECK(serialize_model(train_forest(ts, p, 1)) != reference);
}

TEST_CASE("save and load predict identically") {
  Rng rng(13);
  const auto ts = random_set(rng, 200, 6, 3);
  ForestParams p;
  p.n_trees = 8;
  p.max_depth = 6;
  const auto m = train_forest(ts, p, 2);
  TempDir dir;
  save_model(m, dir / "model.json");
  const auto back = load_model(dir / "model.json");
  CHECK(back.params == m.params);
  CHECK(back.class_names == m.class_names);
  CHECK(serialize_model(back) == serialize_model(m));
  std::vector<double> x(6);
  for (int i = 0; i < 1000; ++i) {
    for (auto& v : x) v = 4 * rng.normal();
    const auto a = predict_proba(m, x);
    const auto b = predict_proba(back, x);
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("malformed model files") {
  Rng rng(14);
  const auto ts = random_set(rng, 50, 4, 2);
  ForestParams p;
  p.n_trees = 2;
  const auto text = serialize_model(train_forest(ts, p, 1));
  CHECK_THROWS_AS(parse_model(text.substr(0, text.size() / 2)), ValidationError);
  auto bumped = text;
  bumped.replace(bumped.find("\"version\":1"), 11, "\"version\":2");
  CHECK_THROWS_WITH_AS(parse_model(bumped), doctest::Contains("version"), ValidationError);
  CHECK_THROWS_AS(parse_model("[]"), ValidationError);
  CHECK_THROWS_AS(
      parse_model(R"({"version":1,"class_count":2,"feature_dim":1,)"
                  R"("params":{"n_trees":1,"min_leaf":1,"mtry":1,"seed":1},)"
                  R"("trees":[{"nodes":[[0,0.5,0,1],[-1,[1,0]]]}]})"),
      ValidationError);
  CHECK_THROWS_AS(
      parse_model(R"({"version":1,"class_count":2,"feature_dim":1,)"
                  R"("params":{"n_trees":1,"min_leaf":1,"mtry":1,"seed":1},)"
                  R"("trees":[{"nodes":[[-1,[1,0,0]]]}]})"),
      ValidationError);
  TempDir dir;
  CHECK_THROWS_AS(load_model(dir / "missing.json"), MissingInputError);
}

TEST_CASE("mixed labels make soft predictions, pure labels stay one-hot") {
  // Three well separated feature clusters; the middle one carries two labels.
  auto mixed = make_set(3);
  auto pure = make_set(3);
  for (int copy = 0; copy < 10; ++copy) {
    mixed.add_row(std::vector<double>{0.0, 0.0}, 0);
    mixed.add_row(std::vector<double>{5.0, 5.0}, 1);
    mixed.add_row(std::vector<double>{5.0, 5.0}, 2);
    mixed.add_row(std::vector<double>{9.0, 1.0}, 2);
    pure.add_row(std::vector<double>{0.0, 0.0}, 0);
    pure.add_row(std::vector<double>{5.0, 5.0}, 1);
    pure.add_row(std::vector<double>{9.0, 1.0}, 2);
  }
  ForestParams p;
  p.n_trees = 50;
  const auto soft = train_forest(mixed, p, 2);
  const auto hard = train_forest(pure, p, 2);
  const auto pm = predict_proba(soft, std::vector<double>{5.0, 5.0});
  CHECK(*std::max_element(pm.begin(), pm.end()) < 1.0);
  CHECK(pm[1] > 0);
  CHECK(pm[2] > 0);
  for (std::size_t r = 0; r < pure.rows(); ++r) {
    const auto q = predict_proba(hard, pure.row(r));
    CHECK(q[static_cast<std::size_t>(pure.labels[r])] == 1.0);
  }
}

TEST_CASE("min_leaf and max_depth bound the trees") {
  Rng rng(15);
  const auto ts = random_set(rng, 500, 8, 4);
  ForestParams p;
  p.n_trees = 6;
  p.min_leaf = 7;
  p.max_depth = 5;
  const auto m = train_forest(ts, p, 3);
  for (const auto& t : m.trees) {
    CHECK(tree_well_formed(t, 4, 8, 7));
    CHECK(t.depth() <= 5);
  }
}

TEST_CASE("forest parameter errors") {
  Rng rng(16);
  const auto ts = random_set(rng, 20, 4, 2);
  ForestParams p;
  SUBCASE("mtry too large") { p.mtry = 5; }
  SUBCASE("zero trees") { p.n_trees = 0; }
  SUBCASE("zero min_leaf") { p.min_leaf = 0; }
  CHECK_THROWS_AS(train_forest(ts, p), ValidationError);
  CHECK(resolve_params(ForestParams{}, 48).mtry == 6);
  CHECK_THROWS_AS(train_forest(make_set(2), ForestParams{}), ValidationError);
}

TEST_CASE("bootstrap samples are reproducible and in range") {
  ForestParams p;
  const auto a = bootstrap_sample(1000, p, 3);
  CHECK(a == bootstrap_sample(1000, p, 3));
  CHECK(a != bootstrap_sample(1000, p, 4));
  for (auto i : a) CHECK(i < 1000);
  // About 1 - 1/e of rows appear.
  const auto unique = std::set<std::uint32_t>(a.begin(), a.end()).size();
  CHECK(unique > 580);
  CHECK(unique < 680);
}
