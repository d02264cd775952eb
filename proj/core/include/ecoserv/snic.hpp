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

#ifndef ECOSERV_SNIC_HPP_
#define ECOSERV_SNIC_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ecoserv/raster.hpp"

namespace ecoserv {

struct SnicParams {
  int k = 5000;             // target superpixel count
  double compactness = 10;  // m, applied to [0,1]-normalized colors
};

struct PixelCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct BoundingBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive
};

struct SegmentRecord {
  int id = 0;
  std::size_t size = 0;
  double cx = 0, cy = 0;            // mean member pixel coordinates
  std::vector<double> color_mean;   // raw band means over non-nodata members
  BoundingBox bounds;
};

/// Per-pixel superpixel ids in [0, segments.size()) plus one record per id.
struct SegmentationMap {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;
  std::vector<SegmentRecord> segments;
  // Priority-queue pops performed by the run that produced this map
  // (0 when the map was loaded from disk).
  std::uint64_t queue_pops = 0;

  std::size_t segment_count() const noexcept { return segments.size(); }
  std::int32_t label_at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
};

// Grid rows and columns used for `k` seeds on a width x height image.
struct SeedGrid {
  int rows = 1;
  int cols = 1;
};
SeedGrid seed_grid_shape(int width, int height, int k);

// Seeds at the centres of a regular rows x cols grid, row-major order.
std::vector<PixelCoord> seed_grid(int width, int height, int k);

/// Single-pass SNIC segmentation.
///
/// Pixels are claimed in increasing order of
///   d^2 = |x - x_k|^2 / s^2 + |c - c_k|^2 / m^2,   s = sqrt(W*H/k)
/// against the running centroid of the segment that enqueued them. Colours
/// are min-max normalised per band over the raster; equal distances pop in
/// insertion order. Throws ValidationError for k outside [1, W*H] or for a
/// raster without any fully valid pixel.
SegmentationMap segment(const Raster& raster, const SnicParams& params);

// Recomputes segment records from labels (sizes, centroids, bounds). Colour
// means are filled only when `image` is given.
std::vector<SegmentRecord> compute_segment_records(int width,
                                                   const std::vector<std::int32_t>& labels,
                                                   std::size_t segment_count,
                                                   const Raster* image);

// Label map as a one-band raster holding ids as floats.
Raster label_raster(const SegmentationMap& seg);

// Rebuilds a segmentation from a label raster written by label_raster().
// Without `image` the records carry no colour means.
SegmentationMap segmentation_from_labels(const Raster& labels, const Raster* image = nullptr);

// CSV: id,size,cx,cy,band0_mean,...
void write_segments_csv(const SegmentationMap& seg, const std::filesystem::path& path);

}  // namespace ecoserv

#endif  // ECOSERV_SNIC_HPP_
