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

#include "ecoserv/snic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>

#include "ecoserv/error.hpp"
#include "text.hpp"

namespace ecoserv {
namespace {

struct QueueEntry {
  double distance;
  std::uint64_t sequence;
  std::int32_t pixel;
  std::int32_t label;
};

// Min-heap on (distance, sequence).
struct LaterEntry {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const noexcept {
    if (a.distance != b.distance) return a.distance > b.distance;
    return a.sequence > b.sequence;
  }
};

struct Centroid {
  double sum_x = 0, sum_y = 0;
  std::size_t count = 0;
};

}  // namespace

SeedGrid seed_grid_shape(int width, int height, int k) {
  if (k < 1) throw ValidationError("seed grid: k must be at least 1");
  const double spacing = std::sqrt(static_cast<double>(width) * height / k);
  const double across = std::ceil(width / spacing - 1e-9);
  SeedGrid g;
  g.cols = static_cast<int>(std::clamp(across, 1.0, static_cast<double>(std::min(k, width))));
  g.rows = static_cast<int>(std::clamp(std::round(static_cast<double>(k) / g.cols), 1.0,
                                       static_cast<double>(height)));
  return g;
}

std::vector<PixelCoord> seed_grid(int width, int height, int k) {
  const auto g = seed_grid_shape(width, height, k);
  std::vector<PixelCoord> seeds;
  seeds.reserve(static_cast<std::size_t>(g.rows) * g.cols);
  for (int r = 0; r < g.rows; ++r) {
    const int y = static_cast<int>((2LL * r + 1) * height / (2LL * g.rows));
    for (int c = 0; c < g.cols; ++c) {
      const int x = static_cast<int>((2LL * c + 1) * width / (2LL * g.cols));
      seeds.push_back({x, y});
    }
  }
  return seeds;
}

SegmentationMap segment(const Raster& raster, const SnicParams& params) {
  raster.validate();
  const int w = raster.width;
  const int h = raster.height;
  const int nb = raster.bands;
  const std::size_t n = raster.pixel_count();
  if (params.k < 1 || static_cast<std::size_t>(params.k) > n)
    throw ValidationError("snic: k=" + std::to_string(params.k) +
                          " must lie in [1, pixel count=" + std::to_string(n) + "]");
  if (!(params.compactness > 0) || !std::isfinite(params.compactness))
    throw ValidationError("snic: compactness must be positive");

  // Pixel-interleaved normalised colours; NaN marks nodata.
  std::vector<double> color(n * nb);
  for (int b = 0; b < nb; ++b) {
    const auto band = raster.band(b);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : band) {
      if (raster.is_nodata(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = band[i];
      double& out = color[i * nb + b];
      if (raster.is_nodata(v))
        out = std::numeric_limits<double>::quiet_NaN();
      else
        out = range > 0 ? (v - lo) / range : 0.0;
    }
  }
  auto pixel_valid = [&](std::size_t i) {
    for (int b = 0; b < nb; ++b)
      if (std::isnan(color[i * nb + b])) return false;
    return true;
  };

  // Seeds on nodata move to the nearest valid pixel of their grid cell.
  const auto grid = seed_grid_shape(w, h, params.k);
  std::vector<PixelCoord> seeds;
  for (int r = 0; r < grid.rows; ++r) {
    const int y0 = static_cast<int>(static_cast<long long>(r) * h / grid.rows);
    const int y1 = static_cast<int>(static_cast<long long>(r + 1) * h / grid.rows);
    const int sy = static_cast<int>((2LL * r + 1) * h / (2LL * grid.rows));
    for (int c = 0; c < grid.cols; ++c) {
      const int x0 = static_cast<int>(static_cast<long long>(c) * w / grid.cols);
      const int x1 = static_cast<int>(static_cast<long long>(c + 1) * w / grid.cols);
      const int sx = static_cast<int>((2LL * c + 1) * w / (2LL * grid.cols));
      if (pixel_valid(raster.index(sx, sy))) {
        seeds.push_back({sx, sy});
        continue;
      }
      long long best = std::numeric_limits<long long>::max();
      PixelCoord found{-1, -1};
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
          if (!pixel_valid(raster.index(x, y))) continue;
          const long long d = 1LL * (x - sx) * (x - sx) + 1LL * (y - sy) * (y - sy);
          if (d < best) {
            best = d;
            found = {x, y};
          }
        }
      if (found.x >= 0) seeds.push_back(found);
    }
  }
  if (seeds.empty()) throw ValidationError("snic: raster has no valid pixel to seed from");

  const std::size_t k = seeds.size();
  const double spacing = std::sqrt(static_cast<double>(n) / params.k);
  const double inv_s2 = 1.0 / (spacing * spacing);
  const double inv_m2 = 1.0 / (params.compactness * params.compactness);

  std::vector<Centroid> centroids(k);
  std::vector<double> color_sum(k * nb, 0.0);
  std::vector<std::uint32_t> color_count(k * nb, 0);

  SegmentationMap seg;
  seg.width = w;
  seg.height = h;
  seg.labels.assign(n, -1);

  std::priority_queue<QueueEntry, std::vector<QueueEntry>, LaterEntry> queue;
  std::uint64_t sequence = 0;
  for (std::size_t s = 0; s < k; ++s)
    queue.push({0.0, sequence++, static_cast<std::int32_t>(raster.index(seeds[s].x, seeds[s].y)),
                static_cast<std::int32_t>(s)});

  auto distance = [&](std::size_t pixel, std::size_t label) {
    const auto& c = centroids[label];
    const double inv = 1.0 / static_cast<double>(c.count);
    const double dx = static_cast<double>(pixel % w) - c.sum_x * inv;
    const double dy = static_cast<double>(pixel / w) - c.sum_y * inv;
    double dc = 0.0;
    for (int b = 0; b < nb; ++b) {
      const double v = color[pixel * nb + b];
      const auto cnt = color_count[label * nb + b];
      if (std::isnan(v) || cnt == 0) continue;
      const double diff = v - color_sum[label * nb + b] / cnt;
      dc += diff * diff;
    }
    return (dx * dx + dy * dy) * inv_s2 + dc * inv_m2;
  };

  std::uint64_t pops = 0;
  while (!queue.empty()) {
    const QueueEntry e = queue.top();
    queue.pop();
    ++pops;
    const auto p = static_cast<std::size_t>(e.pixel);
    if (seg.labels[p] != -1) continue;
    seg.labels[p] = e.label;
    const auto l = static_cast<std::size_t>(e.label);
    const int x = static_cast<int>(p % w);
    const int y = static_cast<int>(p / w);
    auto& c = centroids[l];
    c.sum_x += x;
    c.sum_y += y;
    ++c.count;
    for (int b = 0; b < nb; ++b) {
      const double v = color[p * nb + b];
      if (std::isnan(v)) continue;
      color_sum[l * nb + b] += v;
      ++color_count[l * nb + b];
    }
    auto visit = [&](int qx, int qy) {
      const std::size_t q = raster.index(qx, qy);
      if (seg.labels[q] != -1) return;
      queue.push({distance(q, l), sequence++, static_cast<std::int32_t>(q), e.label});
    };
    if (x > 0) visit(x - 1, y);
    if (x + 1 < w) visit(x + 1, y);
    if (y > 0) visit(x, y - 1);
    if (y + 1 < h) visit(x, y + 1);
  }
  seg.queue_pops = pops;
  seg.segments = compute_segment_records(w, seg.labels, k, &raster);
  return seg;
}

std::vector<SegmentRecord> compute_segment_records(int width,
                                                   const std::vector<std::int32_t>& labels,
                                                   std::size_t segment_count,
                                                   const Raster* image) {
  const int w = width;
  const int nb = image ? image->bands : 0;
  if (image && image->pixel_count() != labels.size())
    throw ValidationError("segment records: image and label map differ in size");
  std::vector<SegmentRecord> out(segment_count);
  std::vector<double> sx(segment_count, 0.0), sy(segment_count, 0.0);
  std::vector<double> csum(segment_count * nb, 0.0);
  std::vector<std::size_t> ccount(segment_count * nb, 0);
  for (std::size_t i = 0; i < segment_count; ++i) {
    out[i].id = static_cast<int>(i);
    out[i].bounds = {std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), -1, -1};
  }
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const auto l = labels[p];
    if (l < 0 || static_cast<std::size_t>(l) >= segment_count)
      throw ValidationError("segment label " + std::to_string(l) + " at pixel " +
                            std::to_string(p) + " is out of range");
    const int x = static_cast<int>(p % w);
    const int y = static_cast<int>(p / w);
    auto& r = out[l];
    ++r.size;
    sx[l] += x;
    sy[l] += y;
    r.bounds.x0 = std::min(r.bounds.x0, x);
    r.bounds.y0 = std::min(r.bounds.y0, y);
    r.bounds.x1 = std::max(r.bounds.x1, x);
    r.bounds.y1 = std::max(r.bounds.y1, y);
    for (int b = 0; b < nb; ++b) {
      const double v = image->band(b)[p];
      if (image->is_nodata(v)) continue;
      csum[l * nb + b] += v;
      ++ccount[l * nb + b];
    }
  }
  for (std::size_t i = 0; i < segment_count; ++i) {
    auto& r = out[i];
    if (r.size == 0) throw ValidationError("segment " + std::to_string(i) + " is empty");
    r.cx = sx[i] / static_cast<double>(r.size);
    r.cy = sy[i] / static_cast<double>(r.size);
    r.color_mean.resize(nb);
    for (int b = 0; b < nb; ++b) {
      const auto cnt = ccount[i * nb + b];
      r.color_mean[b] = cnt ? csum[i * nb + b] / static_cast<double>(cnt)
                            : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

Raster label_raster(const SegmentationMap& seg) {
  Raster r(seg.width, seg.height, 1);
  for (std::size_t i = 0; i < seg.labels.size(); ++i) r.data[i] = seg.labels[i];
  r.band_names = {"segment_id"};
  return r;
}

SegmentationMap segmentation_from_labels(const Raster& labels, const Raster* image) {
  if (labels.bands != 1)
    throw ValidationError("label raster must have exactly one band");
  if (image && (labels.width != image->width || labels.height != image->height))
    throw ValidationError("label raster size " + std::to_string(labels.width) + "x" +
                          std::to_string(labels.height) + " does not match image " +
                          std::to_string(image->width) + "x" + std::to_string(image->height));
  SegmentationMap seg;
  seg.width = labels.width;
  seg.height = labels.height;
  seg.labels.resize(labels.data.size());
  std::int32_t max_id = -1;
  for (std::size_t i = 0; i < labels.data.size(); ++i) {
    const double v = labels.data[i];
    if (!(v >= 0) || v != std::floor(v) || v > std::numeric_limits<std::int32_t>::max())
      throw ValidationError("label raster value at pixel " + std::to_string(i) +
                            " is not a non-negative integer id");
    seg.labels[i] = static_cast<std::int32_t>(v);
    max_id = std::max(max_id, seg.labels[i]);
  }
  seg.segments = compute_segment_records(seg.width, seg.labels,
                                         static_cast<std::size_t>(max_id) + 1, image);
  return seg;
}

void write_segments_csv(const SegmentationMap& seg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const std::size_t nb = seg.segments.empty() ? 0 : seg.segments.front().color_mean.size();
  out << "id,size,cx,cy";
  for (std::size_t b = 0; b < nb; ++b) out << ",band" << b << "_mean";
  out << '\n';
  for (const auto& s : seg.segments) {
    out << s.id << ',' << s.size << ',' << detail::format_double(s.cx) << ','
        << detail::format_double(s.cy);
    for (double v : s.color_mean) out << ',' << detail::format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace ecoserv
