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

// Command-line front end: one subcommand per pipeline stage plus `pipeline`
// for the whole run. Exit codes: 0 ok, 1 internal error, 2 missing input,
// 3 validation failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ecoserv/bundle.hpp"
#include "ecoserv/error.hpp"
#include "ecoserv/parallel.hpp"
#include "ecoserv/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ecoserv;

constexpr int kExitInternal = 1;
constexpr int kExitMissing = 2;
constexpr int kExitValidation = 3;

void emit(const StageSummary& s, const std::string& summary_path) {
  const auto text = s.to_json();
  std::cout << text << '\n';
  if (!summary_path.empty()) {
    std::ofstream out(summary_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + summary_path);
    out << text << '\n';
  }
}

Region parse_region(const std::string& text) {
  std::vector<int> v;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto part = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                    : comma - start);
    try {
      v.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw ValidationError("--region: '" + part + "' is not an integer");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (v.size() != 4) throw ValidationError("--region expects x0,y0,x1,y1");
  return {v[0], v[1], v[2], v[3]};
}

struct ForestFlags {
  std::optional<int> n_trees, max_depth, min_leaf, mtry;
  std::optional<std::uint64_t> seed;
  bool no_bootstrap = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--n-trees", n_trees, "Number of trees (default 100)");
    cmd->add_option("--max-depth", max_depth, "Maximum tree depth, 0 = unlimited");
    cmd->add_option("--min-leaf", min_leaf, "Minimum samples per leaf");
    cmd->add_option("--mtry", mtry, "Features tried per split (default floor(sqrt(F)))");
    cmd->add_option("--seed", seed, "Forest RNG seed");
    cmd->add_flag("--no-bootstrap", no_bootstrap, "Train every tree on the full set");
  }
  void apply(ForestParams& p) const {
    if (n_trees) p.n_trees = *n_trees;
    if (max_depth) p.max_depth = *max_depth;
    if (min_leaf) p.min_leaf = *min_leaf;
    if (mtry) p.mtry = *mtry;
    if (seed) p.seed = *seed;
    if (no_bootstrap) p.bootstrap = false;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"ecoserv: superpixel soft classification and ecosystem-service scoring"};
  app.require_subcommand(1);
  unsigned threads = 0;
  std::string summary_path;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_option("--summary", summary_path, "Also write the stage summary JSON here");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene from a JSON spec");
  std::string synth_spec, synth_out;
  synth->add_option("--spec", synth_spec, "Scene spec JSON")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();

  // segment
  auto* seg = app.add_subcommand("segment", "SNIC superpixel segmentation");
  std::string seg_input, seg_out;
  SnicParams snic;
  seg->add_option("--input", seg_input, "Input raster (.ecr or .png)")->required();
  seg->add_option("--k", snic.k, "Target superpixel count")->capture_default_str();
  seg->add_option("--compactness", snic.compactness, "Compactness m")->capture_default_str();
  seg->add_option("--out", seg_out, "Output directory")->required();

  // features
  auto* feat = app.add_subcommand("features", "Per-superpixel statistics");
  std::string feat_input, feat_labels, feat_out;
  feat->add_option("--input", feat_input, "Input raster")->required();
  feat->add_option("--labels", feat_labels, "Label raster from `segment`")->required();
  feat->add_option("--out", feat_out, "Output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "Train the random forest");
  std::string tr_features, tr_labels, tr_points, tr_classes, tr_out;
  ForestFlags tr_flags;
  train->add_option("--features", tr_features, "features.csv")->required();
  train->add_option("--labels", tr_labels, "Label raster")->required();
  train->add_option("--points", tr_points, "points.csv")->required();
  train->add_option("--classes", tr_classes, "classes.csv")->required();
  train->add_option("--out", tr_out, "Output directory")->required();
  tr_flags.add(train);

  // predict
  auto* predict = app.add_subcommand("predict", "Ensemble class probabilities per superpixel");
  std::string pr_model, pr_features, pr_out;
  predict->add_option("--model", pr_model, "model.json")->required();
  predict->add_option("--features", pr_features, "features.csv")->required();
  predict->add_option("--out", pr_out, "Output directory")->required();

  // score
  auto* score_cmd = app.add_subcommand("score", "Apply the supply matrix");
  std::string sc_mode = "soft", sc_source, sc_labels, sc_matrix, sc_out;
  score_cmd->add_option("--mode", sc_mode, "soft, hard or pixel")
      ->check(CLI::IsMember({"soft", "hard", "pixel"}))
      ->capture_default_str();
  score_cmd->add_option("--source", sc_source,
                        "probabilities.csv (soft/hard) or class raster (pixel)")
      ->required();
  score_cmd->add_option("--labels", sc_labels, "Label raster (soft/hard)");
  score_cmd->add_option("--matrix", sc_matrix, "Supply matrix CSV")->required();
  score_cmd->add_option("--out", sc_out, "Output directory")->required();

  // render
  auto* render = app.add_subcommand("render", "Grayscale PNG of one score band");
  std::string rn_input, rn_band, rn_out;
  double rn_lo = 0, rn_hi = 1;
  render->add_option("--input", rn_input, "Score raster")->required();
  render->add_option("--band", rn_band, "Band (service) name; default first band");
  render->add_option("--lo", rn_lo, "Value rendered black")->required();
  render->add_option("--hi", rn_hi, "Value rendered white")->required();
  render->add_option("--out", rn_out, "Output PNG")->required();

  // hist
  auto* hist = app.add_subcommand("hist", "Sampled score histograms");
  std::vector<std::string> hs_maps;
  std::string hs_service, hs_region, hs_out;
  std::size_t hs_samples = 3000, hs_bins = 21;
  double hs_lo = 0, hs_hi = 2;
  std::uint64_t hs_seed = 7;
  hist->add_option("--map", hs_maps, "mode=path score raster (repeatable)")->required();
  hist->add_option("--service", hs_service, "Service band name")->required();
  hist->add_option("--region", hs_region, "x0,y0,x1,y1 sampling rectangle (default: all)");
  hist->add_option("--samples", hs_samples, "Sample count")->capture_default_str();
  hist->add_option("--bins", hs_bins, "Bin count")->capture_default_str();
  hist->add_option("--lo", hs_lo, "Histogram lower bound")->capture_default_str();
  hist->add_option("--hi", hs_hi, "Histogram upper bound")->capture_default_str();
  hist->add_option("--seed", hs_seed, "Sampling seed")->capture_default_str();
  hist->add_option("--out", hs_out, "Output directory")->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run every stage from a run config");
  std::string pl_config, pl_out;
  std::optional<int> pl_k;
  std::optional<double> pl_m;
  std::optional<std::size_t> pl_samples, pl_bins;
  ForestFlags pl_flags;
  pipe->add_option("--config", pl_config, "Run config JSON")->required();
  pipe->add_option("--out", pl_out, "Override output_dir");
  pipe->add_option("--k", pl_k, "Override k");
  pipe->add_option("--compactness", pl_m, "Override compactness");
  pipe->add_option("--samples", pl_samples, "Override histogram.samples");
  pipe->add_option("--bins", pl_bins, "Override histogram.bins");
  std::string pl_synth, pl_input, pl_points, pl_classes, pl_matrix, pl_truth;
  std::string pl_hist_service, pl_region;
  std::vector<std::string> pl_services, pl_modes;
  std::optional<double> pl_lo, pl_hi;
  std::optional<std::uint64_t> pl_hist_seed;
  pipe->add_option("--synth", pl_synth, "Override synth (scene spec)");
  pipe->add_option("--input", pl_input, "Override input raster");
  pipe->add_option("--points", pl_points, "Override points");
  pipe->add_option("--classes", pl_classes, "Override classes");
  pipe->add_option("--matrix", pl_matrix, "Override matrix");
  pipe->add_option("--truth", pl_truth, "Override truth (class raster)");
  pipe->add_option("--services", pl_services, "Override services");
  pipe->add_option("--modes", pl_modes, "Override modes")
      ->check(CLI::IsMember({"soft", "hard", "pixel"}));
  pipe->add_option("--hist-service", pl_hist_service, "Override histogram.service");
  pipe->add_option("--region", pl_region, "Override histogram.region as x0,y0,x1,y1");
  pipe->add_option("--lo", pl_lo, "Override histogram.lo");
  pipe->add_option("--hi", pl_hi, "Override histogram.hi");
  pipe->add_option("--hist-seed", pl_hist_seed, "Override histogram.seed");
  pl_flags.add(pipe);

  // verify-bundle
  auto* verify = app.add_subcommand("verify-bundle", "Check the reference bundle");
  std::string vb_dir = "data/reference";
  std::optional<std::uint64_t> vb_seed;
  bool vb_record = false;
  verify->add_option("--bundle", vb_dir, "Bundle directory")->capture_default_str();
  verify->add_option("--seed", vb_seed, "Regenerate with a different seed");
  verify->add_flag("--record", vb_record, "Rewrite expected.json from the current bundle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }
  set_thread_cap(threads);

  if (*synth) {
    emit(stage_synth(synth_spec, synth_out, threads), summary_path);
  } else if (*seg) {
    emit(stage_segment(seg_input, snic, seg_out), summary_path);
  } else if (*feat) {
    emit(stage_features(feat_input, feat_labels, feat_out, threads), summary_path);
  } else if (*train) {
    ForestParams p;
    tr_flags.apply(p);
    emit(stage_train(tr_features, tr_labels, tr_points, tr_classes, p, tr_out, threads),
         summary_path);
  } else if (*predict) {
    emit(stage_predict(pr_model, pr_features, pr_out, threads), summary_path);
  } else if (*score_cmd) {
    if (sc_mode != "pixel" && sc_labels.empty())
      throw ValidationError("score --mode " + sc_mode + " needs --labels");
    emit(stage_score(sc_source, sc_labels, sc_matrix, sc_mode, sc_out), summary_path);
  } else if (*render) {
    emit(stage_render(rn_input, rn_band, rn_lo, rn_hi, rn_out), summary_path);
  } else if (*hist) {
    std::vector<std::pair<std::string, fs::path>> maps;
    for (const auto& m : hs_maps) {
      const auto eq = m.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ValidationError("--map expects mode=path, got '" + m + "'");
      maps.emplace_back(m.substr(0, eq), m.substr(eq + 1));
    }
    Region region{0, 0, 0, 0};
    if (!hs_region.empty()) {
      region = parse_region(hs_region);
    } else {
      const auto& first = maps.front().second;
      if (!fs::exists(first)) throw MissingInputError("score raster not found: " + first.string());
      const auto r = read_raster(first);
      region = {0, 0, r.width, r.height};
    }
    emit(stage_hist(maps, hs_service, region, hs_samples, hs_bins, hs_lo, hs_hi, hs_seed, hs_out),
         summary_path);
  } else if (*pipe) {
    auto cfg = read_run_config(pl_config);
    if (!pl_out.empty()) cfg.output_dir = fs::absolute(pl_out);
    if (pl_k) cfg.k = *pl_k;
    if (pl_m) cfg.compactness = *pl_m;
    if (pl_samples) cfg.histogram.samples = *pl_samples;
    if (pl_bins) cfg.histogram.bins = *pl_bins;
    // Paths given on the command line are relative to the working directory.
    for (auto [flag, field] : {std::pair{&pl_synth, &cfg.synth}, {&pl_input, &cfg.input},
                               {&pl_points, &cfg.points}, {&pl_classes, &cfg.classes},
                               {&pl_matrix, &cfg.matrix}, {&pl_truth, &cfg.truth}})
      if (!flag->empty()) *field = fs::absolute(*flag);
    if (!pl_services.empty()) cfg.services = pl_services;
    if (!pl_modes.empty()) cfg.modes = pl_modes;
    if (!pl_hist_service.empty()) cfg.histogram.service = pl_hist_service;
    if (!pl_region.empty()) cfg.histogram.region = parse_region(pl_region);
    if (pl_lo) cfg.histogram.lo = *pl_lo;
    if (pl_hi) cfg.histogram.hi = *pl_hi;
    if (pl_hist_seed) cfg.histogram.seed = *pl_hist_seed;
    pl_flags.apply(cfg.forest);
    if (threads) cfg.threads = threads;
    const auto result = run_pipeline(cfg);
    StageSummary total;
    total.stage = "pipeline";
    total.config_hash = cfg.hash();
    for (const auto& s : result.stages) {
      total.seconds += s.seconds;
      std::cerr << s.stage << ": " << s.seconds << " s\n";
    }
    for (const auto& h : result.histograms) {
      total.counts["entropy_" + h.mode] = h.histogram.entropy();
      total.counts["extreme_mass_" + h.mode] = h.histogram.extreme_mass();
      total.counts["interior_bins_" + h.mode] =
          static_cast<double>(h.histogram.nonempty_interior_bins());
    }
    total.counts["artifacts"] = static_cast<double>(result.artifact_hashes.size());
    total.artifacts.push_back(result.manifest);
    emit(total, summary_path);
  } else if (*verify) {
    if (vb_record) {
      record_bundle_expectations(vb_dir);
      std::cout << "wrote " << (fs::path(vb_dir) / "expected.json").string() << '\n';
      return 0;
    }
    const auto report = verify_bundle(vb_dir, vb_seed);
    std::cout << report.to_text();
    return report.passed() ? 0 : kExitValidation;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ecoserv::MissingInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMissing;
  } catch (const ecoserv::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
