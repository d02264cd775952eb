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

#include "ecoserv/error.hpp"
#include "ecoserv/features.hpp"
#include "ecoserv/training_set.hpp"
#include "test_support.hpp"

using namespace ecoserv;
using ecoserv::testing::random_raster;
using ecoserv::testing::TempDir;

namespace {

struct Fixture {
  Raster image = random_raster(24, 16, 2, 31);
  SegmentationMap seg = segment(image, {12, 10});
  FeatureMatrix features = extract_features(image, seg, 1);
  ClassVocabulary classes{{"urban", "suburban", "forest", "water"}};
};

}  // namespace

TEST_CASE("one point joins to its segment's feature row") {
  Fixture f;
  const std::vector<LabelPoint> pts = {{5, 7, 3}};
  const auto ts = build_training_set(f.features, f.seg, pts, f.classes);
  REQUIRE(ts.rows() == 1);
  const auto id = f.seg.label_at(5, 7);
  CHECK(ts.segment_ids[0] == id);
  CHECK(ts.labels[0] == 3);
  const auto expect = f.features.row(static_cast<std::size_t>(id));
  CHECK(std::vector<double>(ts.row(0).begin(), ts.row(0).end()) ==
        std::vector<double>(expect.begin(), expect.end()));
  CHECK(ts.class_count == 4);
  CHECK(ts.class_names == f.classes.names);
}

TEST_CASE("mixed labels in one segment give identical rows with distinct labels") {
  Fixture f;
  const std::vector<LabelPoint> pts = {{3, 3, 2}, {3, 3, 0}};
  const auto ts = build_training_set(f.features, f.seg, pts, f.classes);
  REQUIRE(ts.rows() == 2);
  CHECK(std::equal(ts.row(0).begin(), ts.row(0).end(), ts.row(1).begin()));
  CHECK(ts.labels[0] == 2);
  CHECK(ts.labels[1] == 0);
}

TEST_CASE("duplicates are preserved and out-of-bounds points dropped") {
  Fixture f;
  Rng rng(8);
  std::vector<LabelPoint> pts;
  std::size_t in_bounds = 0;
  for (int i = 0; i < 2000; ++i) {
    const int x = static_cast<int>(rng.uniform_index(30)) - 3;
    const int y = static_cast<int>(rng.uniform_index(22)) - 3;
    pts.push_back({x, y, static_cast<int>(rng.uniform_index(4))});
    if (x >= 0 && y >= 0 && x < 24 && y < 16) ++in_bounds;
  }
  // Repeat a point several times with the same class.
  for (int i = 0; i < 5; ++i) pts.push_back({1, 1, 1});
  in_bounds += 5;
  const auto ts = build_training_set(f.features, f.seg, pts, f.classes);
  CHECK(ts.rows() == in_bounds);
  CHECK(ts.dropped_points == pts.size() - in_bounds);
  // Join correctness by brute-force lookup of each kept point.
  std::size_t r = 0;
  for (const auto& p : pts) {
    if (p.x < 0 || p.y < 0 || p.x >= 24 || p.y >= 16) continue;
    std::int32_t owner = -1;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 24; ++x)
        if (x == p.x && y == p.y) owner = f.seg.labels[static_cast<std::size_t>(y) * 24 + x];
    CHECK(ts.segment_ids[r] == owner);
    CHECK(ts.labels[r] == p.class_id);
    ++r;
  }
  std::size_t repeats = 0;
  for (std::size_t i = 0; i < ts.rows(); ++i)
    if (ts.segment_ids[i] == f.seg.label_at(1, 1) && ts.labels[i] == 1) ++repeats;
  CHECK(repeats >= 5);
}

TEST_CASE("training set errors") {
  Fixture f;
  const std::vector<LabelPoint> outside = {{-1, 0, 0}, {24, 0, 1}};
  CHECK_THROWS_AS(build_training_set(f.features, f.seg, outside, f.classes), ValidationError);
  CHECK_THROWS_AS(build_training_set(f.features, f.seg, {}, f.classes), ValidationError);
  const std::vector<LabelPoint> bad_class = {{0, 0, 4}};
  CHECK_THROWS_AS(build_training_set(f.features, f.seg, bad_class, f.classes), ValidationError);
  const std::vector<LabelPoint> ok = {{0, 0, 0}};
  CHECK_THROWS_AS(build_training_set(FeatureMatrix{}, f.seg, ok, f.classes), ValidationError);
  auto short_features = f.features;
  short_features.rows -= 1;
  short_features.values.resize(short_features.rows * short_features.dims());
  CHECK_THROWS_AS(build_training_set(short_features, f.seg, ok, f.classes), ValidationError);
}

TEST_CASE("points and classes CSV round trip") {
  TempDir dir;
  const std::vector<LabelPoint> pts = {{0, 0, 1}, {511, 3, 0}, {7, 7, 3}};
  write_points_csv(pts, dir / "p.csv");
  const auto back = read_points_csv(dir / "p.csv");
  REQUIRE(back.size() == 3);
  CHECK(back[1].x == 511);
  CHECK(back[2].class_id == 3);
  ClassVocabulary v{{"a", "b c"}};
  write_classes_csv(v, dir / "c.csv");
  CHECK(read_classes_csv(dir / "c.csv").names == v.names);
}

TEST_CASE("class vocabularies must be dense and unique") {
  TempDir dir;
  std::ofstream(dir / "gap.csv") << "class_id,class_name\n0,a\n2,b\n";
  CHECK_THROWS_AS(read_classes_csv(dir / "gap.csv"), ValidationError);
  std::ofstream(dir / "dup.csv") << "class_id,class_name\n0,a\n0,b\n";
  CHECK_THROWS_AS(read_classes_csv(dir / "dup.csv"), ValidationError);
  std::ofstream(dir / "hdr.csv") << "id,name\n0,a\n";
  CHECK_THROWS_AS(read_classes_csv(dir / "hdr.csv"), ValidationError);
  std::ofstream(dir / "pts.csv") << "x,y,class_id\n1,2\n";
  CHECK_THROWS_AS(read_points_csv(dir / "pts.csv"), ValidationError);
  std::ofstream(dir / "frac.csv") << "x,y,class_id\n1.5,2,0\n";
  CHECK_THROWS_AS(read_points_csv(dir / "frac.csv"), ValidationError);
}
