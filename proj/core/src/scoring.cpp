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

#include "ecoserv/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ecoserv/error.hpp"
#include "ecoserv/parallel.hpp"
#include "ecoserv/random.hpp"
#include "text.hpp"

namespace ecoserv {

std::size_t SupplyMatrix::service_index(const std::string& name) const {
  const auto it = std::find(services.begin(), services.end(), name);
  if (it == services.end())
    throw ValidationError("supply matrix has no service named '" + name + "'");
  return static_cast<std::size_t>(it - services.begin());
}

void SupplyMatrix::validate() const {
  if (services.empty()) throw ValidationError("supply matrix has no services");
  if (class_names.empty()) throw ValidationError("supply matrix has no class columns");
  if (weights.size() != services.size() * class_names.size())
    throw ValidationError("supply matrix weight count does not match its shape");
  for (int w : weights)
    if (w < kMinCapacity || w > kMaxCapacity)
      throw ValidationError("supply matrix weight " + std::to_string(w) +
                            " outside the capacity scale 0..5");
}

SupplyMatrix read_matrix_csv(const std::filesystem::path& path) {
  const auto t = detail::read_csv(path);
  if (t.header.size() < 2 || t.header.front() != "service")
    throw ValidationError(path.string() + ": expected header service,<class names...>");
  SupplyMatrix m;
  m.class_names.assign(t.header.begin() + 1, t.header.end());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto loc = detail::where(path, t.line_numbers[i]);
    const auto& r = t.rows[i];
    if (r.size() != t.header.size())
      throw ValidationError(loc + ": expected " + std::to_string(t.header.size()) + " fields");
    if (r[0].empty()) throw ValidationError(loc + ": empty service name");
    m.services.push_back(r[0]);
    for (std::size_t c = 1; c < r.size(); ++c) {
      const auto w = detail::parse_int(r[c], loc);
      if (w < kMinCapacity || w > kMaxCapacity)
        throw ValidationError(loc + ": weight " + std::to_string(w) + " outside 0..5");
      m.weights.push_back(static_cast<int>(w));
    }
  }
  m.validate();
  return m;
}

void write_matrix_csv(const SupplyMatrix& m, const std::filesystem::path& path) {
  m.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "service";
  for (const auto& c : m.class_names) out << ',' << c;
  out << '\n';
  for (std::size_t s = 0; s < m.service_count(); ++s) {
    out << m.services[s];
    for (int w : m.row(s)) out << ',' << w;
    out << '\n';
  }
}

double score(std::span<const double> p, std::span<const int> w) {
  if (p.size() != w.size())
    throw ValidationError("score: " + std::to_string(p.size()) + " probabilities but " +
                          std::to_string(w.size()) + " weights");
  double sum = 0.0;
  double total = 0.0;
  int w_lo = kMaxCapacity, w_hi = kMinCapacity;
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (!(p[c] >= 0.0)) throw ValidationError("score: negative or NaN probability");
    if (w[c] < kMinCapacity || w[c] > kMaxCapacity)
      throw ValidationError("score: weight outside 0..5");
    sum += p[c];
    total += p[c] * w[c];
    w_lo = std::min(w_lo, w[c]);
    w_hi = std::max(w_hi, w[c]);
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("score: probabilities sum to " + detail::format_double(sum));
  // A convex combination of the weights; clamping only removes rounding.
  return std::clamp(total, static_cast<double>(w_lo), static_cast<double>(w_hi));
}

const char* to_string(ScoreMode mode) noexcept {
  return mode == ScoreMode::kSoft ? "soft" : "hard";
}

ScoreMode parse_score_mode(const std::string& text) {
  if (text == "soft") return ScoreMode::kSoft;
  if (text == "hard") return ScoreMode::kHard;
  throw ValidationError("unknown score mode '" + text + "' (expected soft or hard)");
}

ProbabilityTable predict_table(const ForestModel& model, const FeatureMatrix& features,
                               unsigned threads) {
  if (features.dims() != model.feature_dim)
    throw ValidationError("predict: features have " + std::to_string(features.dims()) +
                          " columns, model expects " + std::to_string(model.feature_dim));
  ProbabilityTable t;
  t.rows = features.rows;
  t.class_count = model.class_count;
  t.class_names = model.class_names;
  if (t.class_names.empty())
    for (std::size_t c = 0; c < t.class_count; ++c) t.class_names.push_back("class" + std::to_string(c));
  t.values.resize(t.rows * t.class_count);
  parallel_for(t.rows, threads, [&](std::size_t r) {
    predict_proba(model, features.row(r),
                  std::span<double>(t.values.data() + r * t.class_count, t.class_count));
  });
  return t;
}

void write_probabilities_csv(const ProbabilityTable& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "seg_id";
  for (const auto& n : t.class_names) out << ',' << n;
  out << ",hard_class\n";
  for (std::size_t r = 0; r < t.rows; ++r) {
    out << r;
    for (double p : t.row(r)) out << ',' << detail::format_double(p);
    out << ',' << argmax_lowest(t.row(r)) << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

ProbabilityTable read_probabilities_csv(const std::filesystem::path& path) {
  const auto csv = detail::read_csv(path);
  if (csv.header.size() < 3 || csv.header.front() != "seg_id" ||
      csv.header.back() != "hard_class")
    throw ValidationError(path.string() + ": expected header seg_id,<classes...>,hard_class");
  ProbabilityTable t;
  t.class_names.assign(csv.header.begin() + 1, csv.header.end() - 1);
  t.class_count = t.class_names.size();
  t.rows = csv.rows.size();
  t.values.reserve(t.rows * t.class_count);
  for (std::size_t r = 0; r < t.rows; ++r) {
    const auto loc = detail::where(path, csv.line_numbers[r]);
    const auto& row = csv.rows[r];
    if (row.size() != csv.header.size()) throw ValidationError(loc + ": wrong field count");
    if (detail::parse_int(row[0], loc) != static_cast<long long>(r))
      throw ValidationError(loc + ": seg_id must run densely from 0");
    for (std::size_t c = 0; c < t.class_count; ++c)
      t.values.push_back(detail::parse_double(row[c + 1], loc));
  }
  return t;
}

Raster ScoreMap::rasterize(const SegmentationMap& seg) const {
  if (seg.segment_count() != segments)
    throw ValidationError("score map has " + std::to_string(segments) +
                          " segments, segmentation has " +
                          std::to_string(seg.segment_count()));
  Raster r(seg.width, seg.height, static_cast<int>(services.size()));
  r.band_names = services;
  for (std::size_t s = 0; s < services.size(); ++s) {
    const auto src = service(s);
    auto dst = r.band(static_cast<int>(s));
    for (std::size_t p = 0; p < seg.labels.size(); ++p)
      dst[p] = src[static_cast<std::size_t>(seg.labels[p])];
  }
  return r;
}

ScoreMap score_segments(const ProbabilityTable& probs, const SupplyMatrix& matrix,
                        ScoreMode mode) {
  matrix.validate();
  if (probs.class_count != matrix.class_count())
    throw ValidationError("class count mismatch: classifier has " +
                          std::to_string(probs.class_count) + " classes, matrix has " +
                          std::to_string(matrix.class_count()) + " columns");
  ScoreMap out;
  out.services = matrix.services;
  out.segments = probs.rows;
  out.values.resize(matrix.service_count() * probs.rows);
  std::vector<double> one_hot(probs.class_count);
  for (std::size_t r = 0; r < probs.rows; ++r) {
    std::span<const double> p = probs.row(r);
    if (mode == ScoreMode::kHard) {
      std::fill(one_hot.begin(), one_hot.end(), 0.0);
      one_hot[static_cast<std::size_t>(argmax_lowest(p))] = 1.0;
      p = one_hot;
    }
    for (std::size_t s = 0; s < matrix.service_count(); ++s)
      out.values[s * probs.rows + r] = score(p, matrix.row(s));
  }
  return out;
}

ScoreMap score_map(const ForestModel& model, const FeatureMatrix& features,
                   const SegmentationMap& seg, const SupplyMatrix& matrix, ScoreMode mode) {
  if (model.class_count != matrix.class_count())
    throw ValidationError("class count mismatch: model has " +
                          std::to_string(model.class_count) + " classes, matrix has " +
                          std::to_string(matrix.class_count()) + " columns");
  if (features.rows != seg.segment_count())
    throw ValidationError("feature rows do not match the segmentation");
  return score_segments(predict_table(model, features), matrix, mode);
}

Raster pixel_baseline_map(const Raster& classes, const SupplyMatrix& matrix,
                          std::size_t service) {
  matrix.validate();
  if (classes.bands != 1) throw ValidationError("class raster must have one band");
  if (service >= matrix.service_count()) throw ValidationError("service index out of range");
  const auto w = matrix.row(service);
  Raster out(classes.width, classes.height, 1);
  out.band_names = {matrix.services[service]};
  for (std::size_t i = 0; i < classes.data.size(); ++i) {
    const double v = classes.data[i];
    if (!(v >= 0) || v != std::floor(v) || v >= static_cast<double>(w.size()))
      throw ValidationError("class raster value at pixel " + std::to_string(i) +
                            " is not a class id in [0," + std::to_string(w.size()) + ")");
    out.data[i] = w[static_cast<std::size_t>(v)];
  }
  return out;
}

std::vector<std::size_t> sample_locations(int width, int height, const Region& region,
                                          std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ValidationError("sample count must be at least 1");
  const Region r{std::max(region.x0, 0), std::max(region.y0, 0), std::min(region.x1, width),
                 std::min(region.y1, height)};
  if (r.empty()) throw ValidationError("sampling region is empty");
  const auto rw = static_cast<std::uint64_t>(r.x1 - r.x0);
  const auto area = rw * static_cast<std::uint64_t>(r.y1 - r.y0);
  Rng rng(derive_seed(seed, 0));
  std::vector<std::size_t> out(n);
  for (auto& idx : out) {
    const auto k = rng.uniform_index(area);
    const auto x = static_cast<std::size_t>(r.x0) + k % rw;
    const auto y = static_cast<std::size_t>(r.y0) + k / rw;
    idx = y * static_cast<std::size_t>(width) + x;
  }
  return out;
}

std::vector<double> sample_scores(std::span<const double> values, int width, int height,
                                  const Region& region, std::size_t n, std::uint64_t seed) {
  if (values.size() != static_cast<std::size_t>(width) * height)
    throw ValidationError("score map size does not match width*height");
  const auto locs = sample_locations(width, height, region, n, seed);
  std::vector<double> out;
  out.reserve(n);
  for (auto i : locs) out.push_back(values[i]);
  return out;
}

std::uint64_t Histogram::total() const noexcept {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

double Histogram::bin_lo(std::size_t i) const noexcept {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins());
}

double Histogram::bin_hi(std::size_t i) const noexcept {
  return i + 1 == bins() ? hi : bin_lo(i + 1);
}

double Histogram::entropy() const noexcept {
  const double t = static_cast<double>(total());
  if (t == 0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / t;
    h -= p * std::log(p);
  }
  return h;
}

double Histogram::extreme_mass() const noexcept {
  const auto t = total();
  if (t == 0) return 0.0;
  const auto ends = bins() == 1 ? counts.front() : counts.front() + counts.back();
  return static_cast<double>(ends) / static_cast<double>(t);
}

std::size_t Histogram::nonempty_interior_bins() const noexcept {
  std::size_t n = 0;
  for (std::size_t i = 1; i + 1 < bins(); ++i) n += counts[i] > 0;
  return n;
}

Histogram histogram(std::span<const double> samples, std::size_t bins, double lo, double hi) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  if (!(lo < hi)) throw ValidationError("histogram range requires lo < hi");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  const double scale = static_cast<double>(bins) / (hi - lo);
  for (double v : samples) {
    if (!(v >= lo && v <= hi)) {
      ++h.out_of_range;
      continue;
    }
    auto idx = static_cast<std::size_t>(std::floor((v - lo) * scale));
    if (idx >= bins) idx = bins - 1;
    ++h.counts[idx];
  }
  return h;
}

void write_histogram_csv(const Histogram& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.bins(); ++i)
    out << detail::format_double(h.bin_lo(i)) << ',' << detail::format_double(h.bin_hi(i))
        << ',' << h.counts[i] << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

void render_histogram(const Histogram& h, const std::filesystem::path& path) {
  constexpr int kBarWidth = 16;
  constexpr int kGap = 2;
  constexpr int kPlotHeight = 240;
  constexpr int kMargin = 8;
  const int width = 2 * kMargin + static_cast<int>(h.bins()) * (kBarWidth + kGap) - kGap;
  const int height = 2 * kMargin + kPlotHeight + 1;
  std::vector<unsigned char> px(static_cast<std::size_t>(width) * height, 255);
  const auto peak = h.counts.empty() ? 0 : *std::max_element(h.counts.begin(), h.counts.end());
  const int base = kMargin + kPlotHeight;
  for (int x = kMargin; x < width - kMargin; ++x) px[static_cast<std::size_t>(base) * width + x] = 0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    if (peak == 0 || h.counts[i] == 0) continue;
    const int bar = std::max(1, static_cast<int>(std::lround(
                                    static_cast<double>(h.counts[i]) * kPlotHeight / peak)));
    const int x0 = kMargin + static_cast<int>(i) * (kBarWidth + kGap);
    for (int y = base - bar; y < base; ++y)
      for (int x = x0; x < x0 + kBarWidth; ++x) px[static_cast<std::size_t>(y) * width + x] = 96;
  }
  write_png(path, width, height, 1, px);
}

}  // namespace ecoserv
