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

#include "ecoserv/training_set.hpp"

#include <fstream>
#include <map>

#include "ecoserv/error.hpp"
#include "text.hpp"

namespace ecoserv {

void TrainingSet::add_row(std::span<const double> x, int label, std::int32_t segment) {
  if (rows() == 0 && feature_dim == 0) feature_dim = x.size();
  if (x.size() != feature_dim)
    throw ValidationError("training row has " + std::to_string(x.size()) +
                          " features, expected " + std::to_string(feature_dim));
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
  segment_ids.push_back(segment);
}

TrainingSet build_training_set(const FeatureMatrix& features, const SegmentationMap& seg,
                               std::span<const LabelPoint> points,
                               const ClassVocabulary& classes) {
  if (features.rows == 0 || features.dims() == 0)
    throw ValidationError("training set: feature matrix is empty");
  if (features.rows != seg.segment_count())
    throw ValidationError("training set: feature matrix has " +
                          std::to_string(features.rows) + " rows but segmentation has " +
                          std::to_string(seg.segment_count()) + " segments");
  if (points.empty()) throw ValidationError("training set: no label points");
  if (classes.size() == 0) throw ValidationError("training set: empty class vocabulary");

  TrainingSet ts;
  ts.feature_dim = features.dims();
  ts.class_count = classes.size();
  ts.class_names = classes.names;
  for (const auto& p : points) {
    if (p.class_id < 0 || static_cast<std::size_t>(p.class_id) >= classes.size())
      throw ValidationError("label point (" + std::to_string(p.x) + "," +
                            std::to_string(p.y) + ") has class id " +
                            std::to_string(p.class_id) + " outside [0," +
                            std::to_string(classes.size()) + ")");
    if (p.x < 0 || p.y < 0 || p.x >= seg.width || p.y >= seg.height) {
      ++ts.dropped_points;
      continue;
    }
    const auto id = seg.label_at(p.x, p.y);
    ts.add_row(features.row(static_cast<std::size_t>(id)), p.class_id, id);
  }
  if (ts.rows() == 0)
    throw ValidationError("training set: all " + std::to_string(points.size()) +
                          " label points are out of bounds");
  return ts;
}

std::vector<LabelPoint> read_points_csv(const std::filesystem::path& path) {
  const auto t = detail::read_csv(path);
  if (t.header != std::vector<std::string>{"x", "y", "class_id"})
    throw ValidationError(path.string() + ": expected header x,y,class_id");
  std::vector<LabelPoint> pts;
  pts.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto loc = detail::where(path, t.line_numbers[i]);
    const auto& r = t.rows[i];
    if (r.size() != 3) throw ValidationError(loc + ": expected 3 fields");
    pts.push_back({static_cast<int>(detail::parse_int(r[0], loc)),
                   static_cast<int>(detail::parse_int(r[1], loc)),
                   static_cast<int>(detail::parse_int(r[2], loc))});
  }
  return pts;
}

void write_points_csv(std::span<const LabelPoint> points, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "x,y,class_id\n";
  for (const auto& p : points) out << p.x << ',' << p.y << ',' << p.class_id << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

ClassVocabulary read_classes_csv(const std::filesystem::path& path) {
  const auto t = detail::read_csv(path);
  if (t.header != std::vector<std::string>{"class_id", "class_name"})
    throw ValidationError(path.string() + ": expected header class_id,class_name");
  std::map<long long, std::string> by_id;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto loc = detail::where(path, t.line_numbers[i]);
    const auto& r = t.rows[i];
    if (r.size() != 2) throw ValidationError(loc + ": expected 2 fields");
    const auto id = detail::parse_int(r[0], loc);
    if (r[1].empty()) throw ValidationError(loc + ": empty class name");
    if (!by_id.emplace(id, r[1]).second)
      throw ValidationError(loc + ": duplicate class id " + std::to_string(id));
  }
  ClassVocabulary v;
  long long expected = 0;
  for (auto& [id, name] : by_id) {
    if (id != expected++)
      throw ValidationError(path.string() + ": class ids must be dense 0..C-1");
    v.names.push_back(name);
  }
  if (v.names.empty()) throw ValidationError(path.string() + ": no classes");
  return v;
}

void write_classes_csv(const ClassVocabulary& classes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "class_id,class_name\n";
  for (std::size_t i = 0; i < classes.names.size(); ++i)
    out << i << ',' << classes.names[i] << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace ecoserv
