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

#ifndef ECOSERV_PIPELINE_HPP_
#define ECOSERV_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecoserv/forest.hpp"
#include "ecoserv/scoring.hpp"

namespace ecoserv {

namespace fs = std::filesystem;

struct HistogramSettings {
  std::size_t samples = 3000;
  std::size_t bins = 21;
  std::optional<Region> region;   // defaults to the scene's training region
  std::uint64_t seed = 7;
  std::string service;            // defaults to the first scored service
  std::optional<double> lo, hi;   // default to the service's weight range
};

/// Declarative run description. Relative paths resolve against `base_dir`.
struct RunConfig {
  fs::path base_dir;
  fs::path synth;   // optional scene spec; generated before segmentation
  fs::path input;   // raster; defaults to the synthesized scene
  int k = 5000;
  double compactness = 10.0;
  ForestParams forest;
  fs::path points;
  fs::path classes;
  fs::path matrix;
  fs::path truth;   // class raster for the pixel baseline
  std::vector<std::string> services;  // empty = every matrix service
  std::vector<std::string> modes{"soft", "hard", "pixel"};
  fs::path output_dir;
  HistogramSettings histogram;
  unsigned threads = 0;

  fs::path resolve(const fs::path& p) const;
  // Canonical JSON text (paths as given, not resolved); hashed into manifests.
  std::string canonical_json() const;
  std::string hash() const;
  void validate() const;
};

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir);
RunConfig read_run_config(const fs::path& path);

/// What a stage reports: counts, files written, and a hash of its inputs.
struct StageSummary {
  std::string stage;
  std::string config_hash;
  double seconds = 0;
  std::map<std::string, double> counts;
  std::vector<fs::path> artifacts;

  std::string to_json() const;
};

StageSummary stage_synth(const fs::path& spec, const fs::path& out_dir, unsigned threads = 0);
StageSummary stage_segment(const fs::path& input, const SnicParams& params,
                           const fs::path& out_dir);
StageSummary stage_features(const fs::path& input, const fs::path& labels,
                            const fs::path& out_dir, unsigned threads = 0);
StageSummary stage_train(const fs::path& features, const fs::path& labels,
                         const fs::path& points, const fs::path& classes,
                         const ForestParams& params, const fs::path& out_dir,
                         unsigned threads = 0);
StageSummary stage_predict(const fs::path& model, const fs::path& features,
                           const fs::path& out_dir, unsigned threads = 0);
// mode is soft, hard or pixel; pixel reads `source` as a class raster,
// the others read it as probabilities.csv and need `labels`.
StageSummary stage_score(const fs::path& source, const fs::path& labels,
                         const fs::path& matrix, const std::string& mode,
                         const fs::path& out_dir);
StageSummary stage_render(const fs::path& scores, const std::string& band, double lo,
                          double hi, const fs::path& out_png);

struct HistogramComparison {
  std::string mode;
  Histogram histogram;
  std::size_t distinct_values = 0;
};

// Samples every score map at the same locations and bins the samples.
// `maps` pairs a mode name with a score raster path.
StageSummary stage_hist(const std::vector<std::pair<std::string, fs::path>>& maps,
                        const std::string& service, const Region& region,
                        std::size_t samples, std::size_t bins, double lo, double hi,
                        std::uint64_t seed, const fs::path& out_dir,
                        std::vector<HistogramComparison>* results = nullptr);

struct PipelineResult {
  std::vector<StageSummary> stages;
  std::vector<HistogramComparison> histograms;
  std::map<std::string, std::string> artifact_hashes;  // relative path -> sha256
  fs::path manifest;
};

// Runs every stage in order and writes manifest.json into the output dir.
PipelineResult run_pipeline(const RunConfig& config);

}  // namespace ecoserv

#endif  // ECOSERV_PIPELINE_HPP_
