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

#ifndef ECOSERV_SYNTH_HPP_
#define ECOSERV_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ecoserv/raster.hpp"
#include "ecoserv/scoring.hpp"
#include "ecoserv/training_set.hpp"

namespace ecoserv {

enum class RegionShape { kBackground, kRectangle, kDisk };

struct SceneRegion {
  RegionShape shape = RegionShape::kBackground;
  int class_id = 0;
  std::vector<double> mean;   // per band
  std::vector<double> sigma;  // per band
  Region rect;                // kRectangle
  double cx = 0, cy = 0;      // kDisk
  double radius = 0;          // kDisk
};

/// Synthetic scene description. Regions paint in order over a required
/// leading background; boundaries cross-fade linearly over
/// `mixing_zone_width` pixels. Label points are drawn uniformly inside
/// `point_region` and take the ground-truth class of their pixel.
struct SceneSpec {
  int width = 0;
  int height = 0;
  int bands = 0;
  std::uint64_t seed = 0;
  double mixing_zone_width = 0;
  std::vector<std::string> classes;
  std::vector<SceneRegion> regions;
  std::size_t point_count = 0;
  Region point_region;  // whole scene when left empty

  void validate() const;
};

SceneSpec parse_scene_spec(const std::string& json_text);
SceneSpec read_scene_spec(const std::filesystem::path& path);

struct Scene {
  Raster image;
  Raster truth;  // one band of class ids
  std::vector<LabelPoint> points;
  ClassVocabulary classes;
  Region training_region;
};

// Signed distance from the pixel centre to the region boundary, positive
// inside. The background is +infinity everywhere.
double signed_distance(const SceneRegion& region, int x, int y);

// Deterministic in spec.seed; rows are generated in parallel with per-row
// random streams.
Scene generate_scene(const SceneSpec& spec, unsigned threads = 0);

// Writes scene.ecr(.json), truth.ecr(.json), points.csv and classes.csv.
void write_scene(const Scene& scene, const std::filesystem::path& dir);

}  // namespace ecoserv

#endif  // ECOSERV_SYNTH_HPP_
