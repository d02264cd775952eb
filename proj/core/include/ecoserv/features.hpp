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

#ifndef ECOSERV_FEATURES_HPP_
#define ECOSERV_FEATURES_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ecoserv/raster.hpp"
#include "ecoserv/snic.hpp"

namespace ecoserv {

// Statistic order within each band's block of a feature row.
enum class Stat : int { kMin = 0, kMax, kMean, kVariance, kSkewness, kKurtosis };
inline constexpr int kStatsPerBand = 6;

/// Single-pass running moments (population convention).
///
/// Higher central moments use the incremental co-moment update, so a
/// segment's statistics can be accumulated pixel by pixel without a second
/// pass. merge() combines two disjoint accumulators.
class MomentAccumulator {
 public:
  void add(double x) noexcept;
  void merge(const MomentAccumulator& other) noexcept;

  std::size_t count() const noexcept { return n_; }
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept;  // m2
  double skewness() const noexcept;  // m3 / m2^1.5, 0 when m2 == 0
  double kurtosis() const noexcept;  // m4 / m2^2 (non-excess), 0 when m2 == 0

 private:
  std::size_t n_ = 0;
  double min_ = 0, max_ = 0, mean_ = 0;
  double m2_ = 0, m3_ = 0, m4_ = 0;  // sums of powers of deviations
};

/// One row of 6*bands statistics per segment, row index == segment id.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t bands = 0;
  std::vector<double> values;  // row-major

  std::size_t dims() const noexcept { return bands * kStatsPerBand; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * dims(), dims()};
  }
  std::span<double> row(std::size_t r) { return {values.data() + r * dims(), dims()}; }
  double at(std::size_t r, std::size_t band, Stat s) const {
    return values[r * dims() + band * kStatsPerBand + static_cast<std::size_t>(s)];
  }
};

// Statistics over member pixels, nodata excluded. Work is split over bands;
// the result does not depend on `threads`.
FeatureMatrix extract_features(const Raster& raster, const SegmentationMap& seg,
                               unsigned threads = 0);

std::vector<std::string> feature_column_names(std::size_t bands);

void write_features_csv(const FeatureMatrix& features, const std::filesystem::path& path);
FeatureMatrix read_features_csv(const std::filesystem::path& path);

}  // namespace ecoserv

#endif  // ECOSERV_FEATURES_HPP_
