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

#ifndef ECOSERV_SCORING_HPP_
#define ECOSERV_SCORING_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ecoserv/features.hpp"
#include "ecoserv/forest.hpp"
#include "ecoserv/raster.hpp"
#include "ecoserv/snic.hpp"

namespace ecoserv {

inline constexpr int kMinCapacity = 0;
inline constexpr int kMaxCapacity = 5;

/// Services x land-use classes grid of capacity weights in {0..5}.
struct SupplyMatrix {
  std::vector<std::string> services;
  std::vector<std::string> class_names;
  std::vector<int> weights;  // services.size() x class_names.size(), row-major

  std::size_t service_count() const noexcept { return services.size(); }
  std::size_t class_count() const noexcept { return class_names.size(); }
  std::span<const int> row(std::size_t s) const {
    return {weights.data() + s * class_count(), class_count()};
  }
  // Index of a service by name; throws ValidationError if absent.
  std::size_t service_index(const std::string& name) const;
  void validate() const;
};

SupplyMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const SupplyMatrix& matrix, const std::filesystem::path& path);

// sum_c p_c * w_c. Requires p_c >= 0, |sum p - 1| <= 1e-9 and weights in {0..5}.
double score(std::span<const double> probabilities, std::span<const int> weights);

enum class ScoreMode { kSoft, kHard };
const char* to_string(ScoreMode mode) noexcept;
ScoreMode parse_score_mode(const std::string& text);

/// Class probabilities for every segment, row index == segment id.
struct ProbabilityTable {
  std::size_t rows = 0;
  std::size_t class_count = 0;
  std::vector<std::string> class_names;
  std::vector<double> values;

  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * class_count, class_count};
  }
};

ProbabilityTable predict_table(const ForestModel& model, const FeatureMatrix& features,
                               unsigned threads = 0);
// seg_id,<class names...>,hard_class
void write_probabilities_csv(const ProbabilityTable& table, const std::filesystem::path& path);
ProbabilityTable read_probabilities_csv(const std::filesystem::path& path);

/// Per-segment scores for every service in the matrix.
struct ScoreMap {
  std::vector<std::string> services;
  std::size_t segments = 0;
  std::vector<double> values;  // services x segments, service-major

  std::span<const double> service(std::size_t s) const {
    return {values.data() + s * segments, segments};
  }
  // One band per service; each pixel takes its segment's score.
  Raster rasterize(const SegmentationMap& seg) const;
};

// Soft mode scores the probability vector, hard mode its argmax one-hot.
ScoreMap score_segments(const ProbabilityTable& probabilities, const SupplyMatrix& matrix,
                        ScoreMode mode);
ScoreMap score_map(const ForestModel& model, const FeatureMatrix& features,
                   const SegmentationMap& seg, const SupplyMatrix& matrix, ScoreMode mode);

// Scores each pixel of a one-band class-id raster directly from the matrix.
Raster pixel_baseline_map(const Raster& class_raster, const SupplyMatrix& matrix,
                          std::size_t service);

// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct Region {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
};

// n pixel indices drawn uniformly (with replacement) inside the region.
std::vector<std::size_t> sample_locations(int width, int height, const Region& region,
                                          std::size_t n, std::uint64_t seed);
std::vector<double> sample_scores(std::span<const double> values, int width, int height,
                                  const Region& region, std::size_t n, std::uint64_t seed);

/// Equal-width bins over [lo, hi]; the last bin is closed on the right.
struct Histogram {
  double lo = 0, hi = 1;
  std::vector<std::uint64_t> counts;
  std::uint64_t out_of_range = 0;

  std::size_t bins() const noexcept { return counts.size(); }
  std::uint64_t total() const noexcept;
  double bin_lo(std::size_t i) const noexcept;
  double bin_hi(std::size_t i) const noexcept;
  // Natural-log Shannon entropy of the normalized counts.
  double entropy() const noexcept;
  // Share of in-range samples in the first and last bins.
  double extreme_mass() const noexcept;
  std::size_t nonempty_interior_bins() const noexcept;
};

Histogram histogram(std::span<const double> samples, std::size_t bins, double lo, double hi);
void write_histogram_csv(const Histogram& h, const std::filesystem::path& path);
void render_histogram(const Histogram& h, const std::filesystem::path& path);

}  // namespace ecoserv

#endif  // ECOSERV_SCORING_HPP_
