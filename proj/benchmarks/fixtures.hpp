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

#ifndef ECOSERV_BENCH_FIXTURES_HPP_
#define ECOSERV_BENCH_FIXTURES_HPP_

#include "ecoserv/features.hpp"
#include "ecoserv/snic.hpp"
#include "ecoserv/synth.hpp"
#include "ecoserv/training_set.hpp"

namespace ecoserv::bench {

// The reference scene, generated once per process.
inline const Scene& reference_scene() {
  static const Scene scene =
      generate_scene(read_scene_spec(ECOSERV_REFERENCE_DIR "/scene.json"));
  return scene;
}

inline const SegmentationMap& reference_segments() {
  static const SegmentationMap seg = segment(reference_scene().image, SnicParams{});
  return seg;
}

inline const FeatureMatrix& reference_features() {
  static const FeatureMatrix f = extract_features(reference_scene().image, reference_segments());
  return f;
}

inline const TrainingSet& reference_training_set() {
  static const TrainingSet t =
      build_training_set(reference_features(), reference_segments(), reference_scene().points,
                         reference_scene().classes);
  return t;
}

}  // namespace ecoserv::bench

#endif  // ECOSERV_BENCH_FIXTURES_HPP_
