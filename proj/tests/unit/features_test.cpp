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

#include <algorithm>
#include <cmath>

#include "ecoserv/error.hpp"
#include "ecoserv/features.hpp"
#include "test_support.hpp"

using namespace ecoserv;
using ecoserv::testing::close;
using ecoserv::testing::random_raster;
using ecoserv::testing::TempDir;

namespace {

struct Oracle {
  double min, max, mean, var, skew, kurt;
};

// Two-pass population moments in long double.
Oracle brute(const std::vector<double>& xs) {
  long double s = 0;
  for (double x : xs) s += x;
  const long double n = static_cast<long double>(xs.size());
  const long double mu = s / n;
  long double m2 = 0, m3 = 0, m4 = 0;
  for (double x : xs) {
    const long double d = x - mu;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  Oracle o{};
  o.min = *std::min_element(xs.begin(), xs.end());
  o.max = *std::max_element(xs.begin(), xs.end());
  o.mean = static_cast<double>(mu);
  o.var = static_cast<double>(m2);
  o.skew = m2 > 0 ? static_cast<double>(m3 / std::pow(m2, 1.5L)) : 0.0;
  o.kurt = m2 > 0 ? static_cast<double>(m4 / (m2 * m2)) : 0.0;
  return o;
}

MomentAccumulator accumulate(const std::vector<double>& xs) {
  MomentAccumulator a;
  for (double x : xs) a.add(x);
  return a;
}

std::vector<double> sample(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> xs(n);
  for (auto& x : xs) x = lo + (hi - lo) * rng.uniform01();
  return xs;
}

// Segmentation made of vertical stripes of the given width.
SegmentationMap stripes(int w, int h, int stripe) {
  Raster labels(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) labels.at(0, x, y) = x / stripe;
  return segmentation_from_labels(labels);
}

}  // namespace

TEST_CASE("constant segment has zero spread and zero shape moments") {
  const auto a = accumulate(std::vector<double>(50, 3.25));
  CHECK(a.min() == 3.25);
  CHECK(a.max() == 3.25);
  CHECK(a.mean() == 3.25);
  CHECK(a.variance() == 0.0);
  CHECK(a.skewness() == 0.0);
  CHECK(a.kurtosis() == 0.0);
}

TEST_CASE("values 1..4 match the hand oracle") {
  const std::vector<double> xs = {1, 2, 3, 4};
  const auto o = brute(xs);
  CHECK(o.var == 1.25);
  CHECK(o.skew == 0.0);
  CHECK(o.kurt == doctest::Approx(1.64).epsilon(1e-15));
  const auto a = accumulate(xs);
  CHECK(a.min() == 1);
  CHECK(a.max() == 4);
  CHECK(a.mean() == 2.5);
  CHECK(a.variance() == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(std::abs(a.skewness()) < 1e-15);
  CHECK(a.kurtosis() == doctest::Approx(1.64).epsilon(1e-14));
}

TEST_CASE("single value") {
  const auto a = accumulate({-7.5});
  CHECK(a.count() == 1);
  CHECK(a.mean() == -7.5);
  CHECK(a.variance() == 0.0);
  CHECK(a.kurtosis() == 0.0);
}

TEST_CASE("streaming moments agree with the two-pass oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(400);
    const double lo = -1e3 * rng.uniform01();
    const double hi = lo + 1e-3 + 1e4 * rng.uniform01();
    auto xs = sample(rng, n, lo, hi);
    if (trial % 3 == 0)
      for (auto& x : xs) x = x * x / hi;  // skewed
    const auto o = brute(xs);
    const auto a = accumulate(xs);
    CAPTURE(n);
    CHECK(a.min() == o.min);
    CHECK(a.max() == o.max);
    CHECK(close(a.mean(), o.mean, 1e-9, hi - lo));
    CHECK(close(a.variance(), o.var, 1e-9));
    CHECK(close(a.skewness(), o.skew, 1e-9, 1.0));
    CHECK(close(a.kurtosis(), o.kurt, 1e-9));
    // Pearson's inequality: kurt >= skew^2 + 1.
    CHECK(a.kurtosis() >= a.skewness() * a.skewness() + 1 - 1e-9);
  }
}

TEST_CASE("moments are invariant to permutation") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto xs = sample(rng, 3 + rng.uniform_index(200), -50, 50);
    const auto a = accumulate(xs);
    for (std::size_t i = xs.size() - 1; i > 0; --i)
      std::swap(xs[i], xs[rng.uniform_index(i + 1)]);
    const auto b = accumulate(xs);
    CHECK(close(a.mean(), b.mean(), 1e-9, 50));
    CHECK(close(a.variance(), b.variance(), 1e-9));
    CHECK(close(a.skewness(), b.skewness(), 1e-9, 1));
    CHECK(close(a.kurtosis(), b.kurtosis(), 1e-9));
  }
}

TEST_CASE("translation and positive scaling act covariantly") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto xs = sample(rng, 3 + rng.uniform_index(200), 0, 10);
    const double shift = -100 + 200 * rng.uniform01();
    const double scale = 0.01 + 20 * rng.uniform01();
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = scale * xs[i] + shift;
    const auto a = accumulate(xs);
    const auto b = accumulate(ys);
    CHECK(close(b.mean(), scale * a.mean() + shift, 1e-9, std::abs(shift) + scale * 10));
    CHECK(close(b.variance(), scale * scale * a.variance(), 1e-9));
    CHECK(close(b.skewness(), a.skewness(), 1e-9, 1));
    CHECK(close(b.kurtosis(), a.kurtosis(), 1e-9));
  }
}

TEST_CASE("merging partial accumulators matches a single pass") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto xs = sample(rng, 2 + rng.uniform_index(300), -5, 20);
    const std::size_t cut = rng.uniform_index(xs.size() + 1);
    MomentAccumulator left, right;
    for (std::size_t i = 0; i < cut; ++i) left.add(xs[i]);
    for (std::size_t i = cut; i < xs.size(); ++i) right.add(xs[i]);
    left.merge(right);
    const auto whole = accumulate(xs);
    CHECK(left.count() == whole.count());
    CHECK(left.min() == whole.min());
    CHECK(left.max() == whole.max());
    CHECK(close(left.mean(), whole.mean(), 1e-12, 20));
    CHECK(close(left.variance(), whole.variance(), 1e-9));
    CHECK(close(left.skewness(), whole.skewness(), 1e-9, 1));
    CHECK(close(left.kurtosis(), whole.kurtosis(), 1e-9));
  }
}

TEST_CASE("extract_features matches the oracle on 1000 segments") {
  const int w = 200, h = 100;  // 10x2 blocks
  const auto img = random_raster(w, h, 3, 77, 0, 255);
  Raster labels(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) labels.at(0, x, y) = (y / 10) * 100 + x / 2;
  const auto seg = segmentation_from_labels(labels);
  REQUIRE(seg.segment_count() == 1000);
  const auto fm = extract_features(img, seg, 2);
  CHECK(fm.rows == 1000);
  CHECK(fm.dims() == 18);
  std::vector<std::vector<double>> members(1000);
  for (int b = 0; b < 3; ++b) {
    for (auto& m : members) m.clear();
    for (std::size_t p = 0; p < img.pixel_count(); ++p)
      members[static_cast<std::size_t>(seg.labels[p])].push_back(img.band(b)[p]);
    for (std::size_t r = 0; r < 1000; ++r) {
      const auto o = brute(members[r]);
      CHECK(fm.at(r, b, Stat::kMin) == o.min);
      CHECK(fm.at(r, b, Stat::kMax) == o.max);
      CHECK(close(fm.at(r, b, Stat::kMean), o.mean, 1e-9));
      CHECK(close(fm.at(r, b, Stat::kVariance), o.var, 1e-9));
      CHECK(close(fm.at(r, b, Stat::kSkewness), o.skew, 1e-9, 1));
      CHECK(close(fm.at(r, b, Stat::kKurtosis), o.kurt, 1e-9));
    }
  }
}

TEST_CASE("nodata pixels are excluded and empty segments get zeros") {
  Raster img(4, 1, 2);
  img.nodata = -9999;
  img.data = {1, 3, -9999, -9999,  // band 0
              2, -9999, 5, 7};     // band 1
  Raster labels(4, 1, 1);
  labels.data = {0, 0, 1, 1};
  const auto seg = segmentation_from_labels(labels);
  const auto fm = extract_features(img, seg, 1);
  CHECK(fm.at(0, 0, Stat::kMean) == 2.0);
  CHECK(fm.at(0, 0, Stat::kVariance) == 1.0);
  CHECK(fm.at(0, 1, Stat::kMean) == 2.0);
  CHECK(fm.at(0, 1, Stat::kVariance) == 0.0);
  for (int s = 0; s < kStatsPerBand; ++s) CHECK(fm.at(1, 0, static_cast<Stat>(s)) == 0.0);
  CHECK(fm.at(1, 1, Stat::kMin) == 5.0);
  CHECK(fm.at(1, 1, Stat::kMean) == 6.0);
}

TEST_CASE("features do not depend on the thread count") {
  const auto img = random_raster(64, 48, 8, 12);
  const auto seg = stripes(64, 48, 3);
  const auto one = extract_features(img, seg, 1);
  for (unsigned t : {2u, 3u, 8u}) CHECK(extract_features(img, seg, t).values == one.values);
}

TEST_CASE("mismatched segmentation is rejected") {
  const auto img = random_raster(10, 10, 1, 1);
  CHECK_THROWS_AS(extract_features(img, stripes(10, 9, 2)), ValidationError);
}

TEST_CASE("feature CSV round trip is exact") {
  TempDir dir;
  const auto img = random_raster(30, 20, 2, 9, -1e-3, 1e5);
  const auto fm = extract_features(img, stripes(30, 20, 4));
  write_features_csv(fm, dir / "f.csv");
  const auto text = ecoserv::testing::slurp(dir / "f.csv");
  CHECK(text.rfind("seg_id,b0_min,b0_max,b0_mean,b0_var,b0_skew,b0_kurt,b1_min", 0) == 0);
  const auto back = read_features_csv(dir / "f.csv");
  CHECK(back.rows == fm.rows);
  CHECK(back.bands == fm.bands);
  CHECK(back.values == fm.values);
}

TEST_CASE("malformed feature CSV") {
  TempDir dir;
  std::ofstream(dir / "bad.csv") << "seg_id,b0_min,b0_max,b0_mean,b0_var,b0_skew,b0_kurt\n"
                                 << "0,1,2,3,4,5\n";
  CHECK_THROWS_AS(read_features_csv(dir / "bad.csv"), ValidationError);
  std::ofstream(dir / "gap.csv") << "seg_id,b0_min,b0_max,b0_mean,b0_var,b0_skew,b0_kurt\n"
                                 << "1,1,2,3,4,5,6\n";
  CHECK_THROWS_AS(read_features_csv(dir / "gap.csv"), ValidationError);
  CHECK_THROWS_AS(read_features_csv(dir / "none.csv"), MissingInputError);
}
