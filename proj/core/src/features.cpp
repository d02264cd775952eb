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

#include "ecoserv/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "ecoserv/error.hpp"
#include "ecoserv/parallel.hpp"
#include "text.hpp"

namespace ecoserv {

void MomentAccumulator::add(double x) noexcept {
  if (n_ == 0) {
    min_ = max_ = x;
  } else {
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
  }
  const double n1 = static_cast<double>(n_);
  ++n_;
  const double n = static_cast<double>(n_);
  const double delta = x - mean_;
  const double delta_n = delta / n;
  const double delta_n2 = delta_n * delta_n;
  const double term1 = delta * delta_n * n1;
  mean_ += delta_n;
  m4_ += term1 * delta_n2 * (n * n - 3 * n + 3) + 6 * delta_n2 * m2_ - 4 * delta_n * m3_;
  m3_ += term1 * delta_n * (n - 2) - 3 * delta_n * m2_;
  m2_ += term1;
}

void MomentAccumulator::merge(const MomentAccumulator& o) noexcept {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(o.n_);
  const double n = na + nb;
  const double delta = o.mean_ - mean_;
  const double d2 = delta * delta;
  const double d3 = d2 * delta;
  const double d4 = d2 * d2;
  const double m2 = m2_ + o.m2_ + d2 * na * nb / n;
  const double m3 = m3_ + o.m3_ + d3 * na * nb * (na - nb) / (n * n) +
                    3 * delta * (na * o.m2_ - nb * m2_) / n;
  const double m4 = m4_ + o.m4_ + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                    6 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) +
                    4 * delta * (na * o.m3_ - nb * m3_) / n;
  mean_ += delta * nb / n;
  m2_ = m2;
  m3_ = m3;
  m4_ = m4;
  n_ += o.n_;
  min_ = std::min(min_, o.min_);
  max_ = std::max(max_, o.max_);
}

double MomentAccumulator::variance() const noexcept {
  return n_ == 0 ? 0.0 : m2_ / static_cast<double>(n_);
}

double MomentAccumulator::skewness() const noexcept {
  if (n_ == 0 || m2_ <= 0) return 0.0;
  const double n = static_cast<double>(n_);
  return std::sqrt(n) * m3_ / std::pow(m2_, 1.5);
}

double MomentAccumulator::kurtosis() const noexcept {
  if (n_ == 0 || m2_ <= 0) return 0.0;
  return static_cast<double>(n_) * m4_ / (m2_ * m2_);
}

FeatureMatrix extract_features(const Raster& raster, const SegmentationMap& seg,
                               unsigned threads) {
  if (seg.width != raster.width || seg.height != raster.height ||
      seg.labels.size() != raster.pixel_count())
    throw ValidationError("segmentation does not cover the raster");
  FeatureMatrix fm;
  fm.rows = seg.segment_count();
  fm.bands = static_cast<std::size_t>(raster.bands);
  fm.values.assign(fm.rows * fm.dims(), 0.0);

  parallel_for(fm.bands, threads, [&](std::size_t b) {
    std::vector<MomentAccumulator> acc(fm.rows);
    const auto band = raster.band(static_cast<int>(b));
    for (std::size_t p = 0; p < band.size(); ++p) {
      if (raster.is_nodata(band[p])) continue;
      acc[static_cast<std::size_t>(seg.labels[p])].add(band[p]);
    }
    for (std::size_t r = 0; r < fm.rows; ++r) {
      double* out = fm.values.data() + r * fm.dims() + b * kStatsPerBand;
      const auto& a = acc[r];
      if (a.count() == 0) {
        std::clog << "warning: segment " << r << " has no valid pixels in band " << b
                  << "; using zero statistics\n";
        continue;
      }
      out[0] = a.min();
      out[1] = a.max();
      out[2] = a.mean();
      out[3] = a.variance();
      out[4] = a.skewness();
      out[5] = a.kurtosis();
    }
  });
  return fm;
}

std::vector<std::string> feature_column_names(std::size_t bands) {
  static constexpr const char* kNames[kStatsPerBand] = {"min", "max", "mean",
                                                        "var", "skew", "kurt"};
  std::vector<std::string> cols;
  cols.reserve(bands * kStatsPerBand);
  for (std::size_t b = 0; b < bands; ++b)
    for (const char* s : kNames) cols.push_back("b" + std::to_string(b) + "_" + s);
  return cols;
}

void write_features_csv(const FeatureMatrix& fm, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "seg_id";
  for (const auto& c : feature_column_names(fm.bands)) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < fm.rows; ++r) {
    out << r;
    for (double v : fm.row(r)) out << ',' << detail::format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

FeatureMatrix read_features_csv(const std::filesystem::path& path) {
  const auto table = detail::read_csv(path);
  if (table.header.empty() || table.header.front() != "seg_id" ||
      (table.header.size() - 1) % kStatsPerBand != 0)
    throw ValidationError(path.string() + ": expected header seg_id,b0_min,...");
  FeatureMatrix fm;
  fm.bands = (table.header.size() - 1) / kStatsPerBand;
  const auto expected = feature_column_names(fm.bands);
  if (!std::equal(expected.begin(), expected.end(), table.header.begin() + 1))
    throw ValidationError(path.string() + ": unexpected feature column names");
  fm.rows = table.rows.size();
  fm.values.resize(fm.rows * fm.dims());
  for (std::size_t r = 0; r < fm.rows; ++r) {
    const auto& row = table.rows[r];
    const auto loc = detail::where(path, table.line_numbers[r]);
    if (row.size() != table.header.size())
      throw ValidationError(loc + ": expected " + std::to_string(table.header.size()) +
                            " fields");
    if (detail::parse_int(row[0], loc) != static_cast<long long>(r))
      throw ValidationError(loc + ": seg_id must run densely from 0");
    for (std::size_t c = 0; c < fm.dims(); ++c)
      fm.values[r * fm.dims() + c] = detail::parse_double(row[c + 1], loc);
  }
  return fm;
}

}  // namespace ecoserv
