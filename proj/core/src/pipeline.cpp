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

#include "ecoserv/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "ecoserv/error.hpp"
#include "ecoserv/features.hpp"
#include "ecoserv/hash.hpp"
#include "ecoserv/parallel.hpp"
#include "ecoserv/raster.hpp"
#include "ecoserv/snic.hpp"
#include "ecoserv/synth.hpp"
#include "ecoserv/training_set.hpp"

namespace ecoserv {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  explicit StageTimer(StageSummary& s) : summary_(s), start_(Clock::now()) {}
  ~StageTimer() {
    summary_.seconds = std::chrono::duration<double>(Clock::now() - start_).count();
  }

 private:
  StageSummary& summary_;
  Clock::time_point start_;
};

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw ValidationError(std::string(what) + " path is not set");
  if (!fs::exists(p)) throw MissingInputError(std::string(what) + " not found: " + p.string());
}

// Raster inputs may be named by header or payload; hash both files.
std::string input_hash(const fs::path& p) {
  const std::string s = p.string();
  if (p.extension() == ".ecr") return sha256_hex(sha256_file(s + ".json") + sha256_file(p));
  if (s.size() > 9 && s.ends_with(".ecr.json"))
    return sha256_hex(sha256_file(p) + sha256_file(s.substr(0, s.size() - 5)));
  return sha256_file(p);
}

std::string stage_hash(json params) { return sha256_hex(params.dump()); }

json forest_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees},
          {"max_depth", p.max_depth > 0 ? json(p.max_depth) : json(nullptr)},
          {"min_leaf", p.min_leaf},
          {"mtry", p.mtry > 0 ? json(p.mtry) : json(nullptr)},
          {"seed", p.seed},
          {"bootstrap", p.bootstrap}};
}

[[noreturn]] void bad_field(const std::string& field, const std::string& what) {
  throw ValidationError("run config: " + field + ": " + what);
}

template <typename T>
T get_as(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    bad_field(field, "has the wrong type");
  }
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
      bad_field(where + it.key(), "unknown field");
  }
}

std::size_t band_index(const Raster& r, const std::string& name, const fs::path& path) {
  const auto it = std::find(r.band_names.begin(), r.band_names.end(), name);
  if (it == r.band_names.end())
    throw ValidationError(path.string() + " has no band named '" + name + "'");
  return static_cast<std::size_t>(it - r.band_names.begin());
}

std::pair<double, double> weight_range(const SupplyMatrix& m, std::size_t s) {
  const auto row = m.row(s);
  const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
  double a = *lo, b = *hi;
  if (a == b) b = a + 1;
  return {a, b};
}

}  // namespace

fs::path RunConfig::resolve(const fs::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

std::string RunConfig::canonical_json() const {
  json j = {{"synth", synth.string()},
            {"input", input.string()},
            {"k", k},
            {"compactness", compactness},
            {"forest", forest_json(forest)},
            {"points", points.string()},
            {"classes", classes.string()},
            {"matrix", matrix.string()},
            {"truth", truth.string()},
            {"services", services},
            {"modes", modes},
            {"output_dir", output_dir.string()}};
  json h = {{"samples", histogram.samples},
            {"bins", histogram.bins},
            {"seed", histogram.seed},
            {"service", histogram.service},
            {"lo", histogram.lo ? json(*histogram.lo) : json(nullptr)},
            {"hi", histogram.hi ? json(*histogram.hi) : json(nullptr)}};
  if (histogram.region) {
    const auto& r = *histogram.region;
    h["region"] = {r.x0, r.y0, r.x1, r.y1};
  } else {
    h["region"] = nullptr;
  }
  j["histogram"] = std::move(h);
  return j.dump();
}

std::string RunConfig::hash() const { return sha256_hex(canonical_json()); }

void RunConfig::validate() const {
  if (k < 1) bad_field("k", "must be at least 1");
  if (!(compactness > 0)) bad_field("compactness", "must be positive");
  if (output_dir.empty()) bad_field("output_dir", "is required");
  if (synth.empty() && input.empty()) bad_field("input", "set either 'input' or 'synth'");
  if (synth.empty() && (points.empty() || classes.empty()))
    bad_field("points/classes", "required unless 'synth' generates them");
  if (matrix.empty()) bad_field("matrix", "is required");
  if (modes.empty()) bad_field("modes", "must not be empty");
  for (const auto& m : modes) {
    if (m != "soft" && m != "hard" && m != "pixel")
      bad_field("modes", "unknown mode '" + m + "'");
    if (m == "pixel" && truth.empty() && synth.empty())
      bad_field("truth", "pixel mode needs a class raster ('truth') or 'synth'");
  }
  if (histogram.samples < 1) bad_field("histogram.samples", "must be at least 1");
  if (histogram.bins < 1) bad_field("histogram.bins", "must be at least 1");
  if (histogram.lo && histogram.hi && !(*histogram.lo < *histogram.hi))
    bad_field("histogram.lo/hi", "requires lo < hi");
  if (histogram.region && histogram.region->empty()) bad_field("histogram.region", "is empty");
  (void)resolve_params(forest, 48);  // range checks independent of the feature count
  for (const auto& [p, what] : std::initializer_list<std::pair<fs::path, const char*>>{
           {synth, "synth"}, {input, "input"}, {points, "points"}, {classes, "classes"},
           {matrix, "matrix"}, {truth, "truth"}}) {
    if (!p.empty()) require_file(resolve(p), what);
  }
}

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("run config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) bad_field("<root>", "expected an object");
  check_keys(j, "", {"synth", "input", "k", "compactness", "forest", "points", "classes",
                     "matrix", "truth", "services", "modes", "output_dir", "histogram",
                     "threads"});
  RunConfig c;
  c.base_dir = base_dir;
  auto path_field = [&](const char* name, fs::path& out) {
    if (j.contains(name) && !j[name].is_null()) out = get_as<std::string>(j[name], name);
  };
  path_field("synth", c.synth);
  path_field("input", c.input);
  path_field("points", c.points);
  path_field("classes", c.classes);
  path_field("matrix", c.matrix);
  path_field("truth", c.truth);
  path_field("output_dir", c.output_dir);
  if (j.contains("k")) c.k = get_as<int>(j["k"], "k");
  if (j.contains("compactness")) c.compactness = get_as<double>(j["compactness"], "compactness");
  if (j.contains("services")) c.services = get_as<std::vector<std::string>>(j["services"], "services");
  if (j.contains("modes")) c.modes = get_as<std::vector<std::string>>(j["modes"], "modes");
  if (j.contains("threads")) c.threads = get_as<unsigned>(j["threads"], "threads");
  if (j.contains("forest")) {
    const auto& f = j["forest"];
    if (!f.is_object()) bad_field("forest", "expected an object");
    check_keys(f, "forest.", {"n_trees", "max_depth", "min_leaf", "mtry", "seed", "bootstrap"});
    auto opt_int = [&](const char* name, int& out) {
      if (f.contains(name) && !f[name].is_null())
        out = get_as<int>(f[name], std::string("forest.") + name);
    };
    opt_int("n_trees", c.forest.n_trees);
    opt_int("max_depth", c.forest.max_depth);
    opt_int("min_leaf", c.forest.min_leaf);
    opt_int("mtry", c.forest.mtry);
    if (f.contains("seed")) c.forest.seed = get_as<std::uint64_t>(f["seed"], "forest.seed");
    if (f.contains("bootstrap")) c.forest.bootstrap = get_as<bool>(f["bootstrap"], "forest.bootstrap");
  }
  if (j.contains("histogram")) {
    const auto& h = j["histogram"];
    if (!h.is_object()) bad_field("histogram", "expected an object");
    check_keys(h, "histogram.", {"samples", "bins", "region", "seed", "service", "lo", "hi"});
    if (h.contains("samples")) c.histogram.samples = get_as<std::size_t>(h["samples"], "histogram.samples");
    if (h.contains("bins")) c.histogram.bins = get_as<std::size_t>(h["bins"], "histogram.bins");
    if (h.contains("seed")) c.histogram.seed = get_as<std::uint64_t>(h["seed"], "histogram.seed");
    if (h.contains("service")) c.histogram.service = get_as<std::string>(h["service"], "histogram.service");
    if (h.contains("lo") && !h["lo"].is_null()) c.histogram.lo = get_as<double>(h["lo"], "histogram.lo");
    if (h.contains("hi") && !h["hi"].is_null()) c.histogram.hi = get_as<double>(h["hi"], "histogram.hi");
    if (h.contains("region") && !h["region"].is_null()) {
      const auto r = get_as<std::vector<int>>(h["region"], "histogram.region");
      if (r.size() != 4) bad_field("histogram.region", "expected [x0, y0, x1, y1]");
      c.histogram.region = Region{r[0], r[1], r[2], r[3]};
    }
  }
  return c;
}

RunConfig read_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open run config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

std::string StageSummary::to_json() const {
  json j = {{"stage", stage}, {"config_hash", config_hash}, {"seconds", seconds}};
  json c = json::object();
  for (const auto& [k, v] : counts) c[k] = v;
  j["counts"] = std::move(c);
  json a = json::array();
  for (const auto& p : artifacts) a.push_back(p.string());
  j["artifacts"] = std::move(a);
  return j.dump(2);
}

StageSummary stage_synth(const fs::path& spec_path, const fs::path& out_dir, unsigned threads) {
  StageSummary s;
  s.stage = "synth";
  StageTimer timer(s);
  require_file(spec_path, "scene spec");
  const auto spec = read_scene_spec(spec_path);
  s.config_hash = stage_hash({{"spec", sha256_file(spec_path)}});
  const auto scene = generate_scene(spec, threads);
  write_scene(scene, out_dir);
  s.counts = {{"width", spec.width},
              {"height", spec.height},
              {"bands", spec.bands},
              {"classes", static_cast<double>(spec.classes.size())},
              {"points", static_cast<double>(scene.points.size())}};
  s.artifacts = {out_dir / "scene.ecr.json", out_dir / "scene.ecr", out_dir / "truth.ecr.json",
                 out_dir / "truth.ecr", out_dir / "points.csv", out_dir / "classes.csv"};
  return s;
}

StageSummary stage_segment(const fs::path& input, const SnicParams& params,
                           const fs::path& out_dir) {
  StageSummary s;
  s.stage = "segment";
  StageTimer timer(s);
  require_file(input, "input raster");
  s.config_hash = stage_hash(
      {{"input", input_hash(input)}, {"k", params.k}, {"compactness", params.compactness}});
  const auto raster = read_raster(input);
  const auto seg = segment(raster, params);
  fs::create_directories(out_dir);
  s.artifacts.push_back(write_raster(label_raster(seg), out_dir / "labels.ecr"));
  s.artifacts.push_back(out_dir / "labels.ecr");
  write_segments_csv(seg, out_dir / "segments.csv");
  s.artifacts.push_back(out_dir / "segments.csv");
  s.counts = {{"k_requested", params.k},
              {"k_actual", static_cast<double>(seg.segment_count())},
              {"pixels", static_cast<double>(raster.pixel_count())},
              {"queue_pops", static_cast<double>(seg.queue_pops)}};
  return s;
}

StageSummary stage_features(const fs::path& input, const fs::path& labels,
                            const fs::path& out_dir, unsigned threads) {
  StageSummary s;
  s.stage = "features";
  StageTimer timer(s);
  require_file(input, "input raster");
  require_file(labels, "label raster");
  s.config_hash = stage_hash({{"input", input_hash(input)}, {"labels", input_hash(labels)}});
  const auto raster = read_raster(input);
  const auto seg = segmentation_from_labels(read_raster(labels), &raster);
  const auto fm = extract_features(raster, seg, threads);
  fs::create_directories(out_dir);
  write_features_csv(fm, out_dir / "features.csv");
  s.artifacts = {out_dir / "features.csv"};
  s.counts = {{"rows", static_cast<double>(fm.rows)}, {"dims", static_cast<double>(fm.dims())}};
  return s;
}

StageSummary stage_train(const fs::path& features, const fs::path& labels,
                         const fs::path& points, const fs::path& classes,
                         const ForestParams& params, const fs::path& out_dir,
                         unsigned threads) {
  StageSummary s;
  s.stage = "train";
  StageTimer timer(s);
  for (const auto& [p, what] : {std::pair{features, "features"}, {labels, "label raster"},
                                {points, "points"}, {classes, "classes"}})
    require_file(p, what);
  s.config_hash = stage_hash({{"features", input_hash(features)},
                              {"labels", input_hash(labels)},
                              {"points", input_hash(points)},
                              {"classes", input_hash(classes)},
                              {"forest", forest_json(params)}});
  const auto fm = read_features_csv(features);
  const auto seg = segmentation_from_labels(read_raster(labels));
  const auto pts = read_points_csv(points);
  const auto vocab = read_classes_csv(classes);
  const auto ts = build_training_set(fm, seg, pts, vocab);
  const auto model = train_forest(ts, params, threads);
  fs::create_directories(out_dir);
  save_model(model, out_dir / "model.json");
  s.artifacts = {out_dir / "model.json"};
  std::size_t leaves = 0;
  for (const auto& t : model.trees) leaves += t.leaf_count();
  s.counts = {{"training_rows", static_cast<double>(ts.rows())},
              {"dropped_points", static_cast<double>(ts.dropped_points)},
              {"classes", static_cast<double>(ts.class_count)},
              {"trees", static_cast<double>(model.trees.size())},
              {"mtry", model.params.mtry},
              {"leaves", static_cast<double>(leaves)}};
  return s;
}

StageSummary stage_predict(const fs::path& model_path, const fs::path& features,
                           const fs::path& out_dir, unsigned threads) {
  StageSummary s;
  s.stage = "predict";
  StageTimer timer(s);
  require_file(model_path, "model");
  require_file(features, "features");
  s.config_hash =
      stage_hash({{"model", input_hash(model_path)}, {"features", input_hash(features)}});
  const auto model = load_model(model_path);
  const auto table = predict_table(model, read_features_csv(features), threads);
  fs::create_directories(out_dir);
  write_probabilities_csv(table, out_dir / "probabilities.csv");
  s.artifacts = {out_dir / "probabilities.csv"};
  std::size_t one_hot = 0;
  for (std::size_t r = 0; r < table.rows; ++r) {
    const auto row = table.row(r);
    one_hot += *std::max_element(row.begin(), row.end()) == 1.0;
  }
  s.counts = {{"segments", static_cast<double>(table.rows)},
              {"classes", static_cast<double>(table.class_count)},
              {"one_hot_segments", static_cast<double>(one_hot)}};
  return s;
}

StageSummary stage_score(const fs::path& source, const fs::path& labels,
                         const fs::path& matrix_path, const std::string& mode,
                         const fs::path& out_dir) {
  StageSummary s;
  s.stage = "score";
  StageTimer timer(s);
  require_file(source, mode == "pixel" ? "class raster" : "probabilities");
  require_file(matrix_path, "supply matrix");
  const auto matrix = read_matrix_csv(matrix_path);
  Raster out;
  if (mode == "pixel") {
    s.config_hash = stage_hash({{"mode", mode},
                                {"truth", input_hash(source)},
                                {"matrix", input_hash(matrix_path)}});
    const auto classes = read_raster(source);
    out = Raster(classes.width, classes.height, static_cast<int>(matrix.service_count()));
    out.band_names = matrix.services;
    for (std::size_t sv = 0; sv < matrix.service_count(); ++sv) {
      const auto band = pixel_baseline_map(classes, matrix, sv);
      std::copy(band.data.begin(), band.data.end(), out.band(static_cast<int>(sv)).begin());
    }
  } else {
    require_file(labels, "label raster");
    s.config_hash = stage_hash({{"mode", mode},
                                {"probabilities", input_hash(source)},
                                {"labels", input_hash(labels)},
                                {"matrix", input_hash(matrix_path)}});
    const auto probs = read_probabilities_csv(source);
    const auto seg = segmentation_from_labels(read_raster(labels));
    if (probs.rows != seg.segment_count())
      throw ValidationError("probabilities cover " + std::to_string(probs.rows) +
                            " segments, label map has " +
                            std::to_string(seg.segment_count()));
    out = score_segments(probs, matrix, parse_score_mode(mode)).rasterize(seg);
  }
  fs::create_directories(out_dir);
  const auto name = "scores_" + mode + ".ecr";
  s.artifacts = {write_raster(out, out_dir / name), out_dir / name};
  s.counts = {{"services", static_cast<double>(matrix.service_count())},
              {"pixels", static_cast<double>(out.pixel_count())}};
  return s;
}

StageSummary stage_render(const fs::path& scores, const std::string& band, double lo,
                          double hi, const fs::path& out_png) {
  StageSummary s;
  s.stage = "render";
  StageTimer timer(s);
  require_file(scores, "score raster");
  s.config_hash =
      stage_hash({{"scores", input_hash(scores)}, {"band", band}, {"lo", lo}, {"hi", hi}});
  const auto r = read_raster(scores);
  const std::size_t b = band.empty() ? 0 : band_index(r, band, scores);
  if (!out_png.parent_path().empty()) fs::create_directories(out_png.parent_path());
  render_grayscale(r.band(static_cast<int>(b)), r.width, r.height, lo, hi, out_png);
  s.artifacts = {out_png};
  s.counts = {{"pixels", static_cast<double>(r.pixel_count())}};
  return s;
}

StageSummary stage_hist(const std::vector<std::pair<std::string, fs::path>>& maps,
                        const std::string& service, const Region& region,
                        std::size_t samples, std::size_t bins, double lo, double hi,
                        std::uint64_t seed, const fs::path& out_dir,
                        std::vector<HistogramComparison>* results) {
  StageSummary s;
  s.stage = "hist";
  StageTimer timer(s);
  if (maps.empty()) throw ValidationError("hist: no score maps given");
  json inputs = json::object();
  for (const auto& [mode, path] : maps) {
    require_file(path, "score raster");
    inputs[mode] = input_hash(path);
  }
  s.config_hash = stage_hash({{"maps", inputs},
                              {"service", service},
                              {"region", {region.x0, region.y0, region.x1, region.y1}},
                              {"samples", samples},
                              {"bins", bins},
                              {"lo", lo},
                              {"hi", hi},
                              {"seed", seed}});
  fs::create_directories(out_dir);
  json comparison = json::object();
  std::vector<HistogramComparison> local;
  for (const auto& [mode, path] : maps) {
    const auto r = read_raster(path);
    const auto b = band_index(r, service, path);
    const auto values =
        sample_scores(r.band(static_cast<int>(b)), r.width, r.height, region, samples, seed);
    HistogramComparison hc{mode, histogram(values, bins, lo, hi),
                           std::set<double>(values.begin(), values.end()).size()};
    write_histogram_csv(hc.histogram, out_dir / ("hist_" + mode + ".csv"));
    render_histogram(hc.histogram, out_dir / ("hist_" + mode + ".png"));
    s.artifacts.push_back(out_dir / ("hist_" + mode + ".csv"));
    s.artifacts.push_back(out_dir / ("hist_" + mode + ".png"));
    comparison[mode] = {{"entropy", hc.histogram.entropy()},
                        {"extreme_mass", hc.histogram.extreme_mass()},
                        {"nonempty_interior_bins", hc.histogram.nonempty_interior_bins()},
                        {"distinct_values", hc.distinct_values},
                        {"out_of_range", hc.histogram.out_of_range},
                        {"counts", hc.histogram.counts}};
    s.counts["entropy_" + mode] = hc.histogram.entropy();
    s.counts["extreme_mass_" + mode] = hc.histogram.extreme_mass();
    local.push_back(std::move(hc));
  }
  json doc = {{"service", service},
              {"samples", samples},
              {"bins", bins},
              {"lo", lo},
              {"hi", hi},
              {"region", {region.x0, region.y0, region.x1, region.y1}},
              {"modes", comparison}};
  std::ofstream(out_dir / "comparison.json") << doc.dump(2) << '\n';
  s.artifacts.push_back(out_dir / "comparison.json");
  if (results) *results = std::move(local);
  return s;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  const unsigned threads = cfg.threads;
  PipelineResult result;
  const fs::path out = cfg.resolve(cfg.output_dir);
  fs::create_directories(out);

  fs::path input = cfg.resolve(cfg.input);
  fs::path points = cfg.resolve(cfg.points);
  fs::path classes = cfg.resolve(cfg.classes);
  fs::path truth = cfg.resolve(cfg.truth);
  std::optional<Region> region = cfg.histogram.region;
  if (!cfg.synth.empty()) {
    const fs::path scene_dir = out / "scene";
    result.stages.push_back(stage_synth(cfg.resolve(cfg.synth), scene_dir, threads));
    const auto spec = read_scene_spec(cfg.resolve(cfg.synth));
    if (input.empty()) input = scene_dir / "scene.ecr";
    if (points.empty()) points = scene_dir / "points.csv";
    if (classes.empty()) classes = scene_dir / "classes.csv";
    if (truth.empty()) truth = scene_dir / "truth.ecr";
    if (!region && !spec.point_region.empty()) region = spec.point_region;
  }

  result.stages.push_back(stage_segment(input, {cfg.k, cfg.compactness}, out));
  result.stages.push_back(stage_features(input, out / "labels.ecr", out, threads));
  result.stages.push_back(stage_train(out / "features.csv", out / "labels.ecr", points, classes,
                                      cfg.forest, out, threads));
  result.stages.push_back(stage_predict(out / "model.json", out / "features.csv", out, threads));

  const auto matrix_path = cfg.resolve(cfg.matrix);
  const auto matrix = read_matrix_csv(matrix_path);
  const auto vocab = read_classes_csv(classes);
  if (vocab.names != matrix.class_names)
    throw ValidationError("supply matrix columns do not match classes.csv names in order");

  std::vector<std::pair<std::string, fs::path>> maps;
  for (const auto& mode : cfg.modes) {
    const fs::path source = mode == "pixel" ? truth : out / "probabilities.csv";
    result.stages.push_back(stage_score(source, out / "labels.ecr", matrix_path, mode, out));
    maps.emplace_back(mode, out / ("scores_" + mode + ".ecr"));
  }

  std::vector<std::string> services = cfg.services;
  if (services.empty()) services = matrix.services;
  for (const auto& svc : services) {
    const auto [lo, hi] = weight_range(matrix, matrix.service_index(svc));
    for (const auto& [mode, path] : maps)
      result.stages.push_back(
          stage_render(path, svc, lo, hi, out / "render" / (svc + "_" + mode + ".png")));
  }

  const std::string hist_service =
      cfg.histogram.service.empty() ? services.front() : cfg.histogram.service;
  const auto [wlo, whi] = weight_range(matrix, matrix.service_index(hist_service));
  const auto raster_header = read_raster(input);
  const Region hist_region =
      region.value_or(Region{0, 0, raster_header.width, raster_header.height});
  result.stages.push_back(stage_hist(maps, hist_service, hist_region, cfg.histogram.samples,
                                     cfg.histogram.bins, cfg.histogram.lo.value_or(wlo),
                                     cfg.histogram.hi.value_or(whi), cfg.histogram.seed,
                                     out / "hist", &result.histograms));

  result.manifest = out / "manifest.json";
  for (const auto& entry : fs::recursive_directory_iterator(out)) {
    if (!entry.is_regular_file() || entry.path() == result.manifest) continue;
    result.artifact_hashes[fs::relative(entry.path(), out).generic_string()] =
        sha256_file(entry.path());
  }
  json inputs = json::object();
  for (const auto& [name, p] : std::initializer_list<std::pair<const char*, fs::path>>{
           {"synth", cfg.resolve(cfg.synth)}, {"input", cfg.resolve(cfg.input)},
           {"points", cfg.resolve(cfg.points)}, {"classes", cfg.resolve(cfg.classes)},
           {"matrix", matrix_path}, {"truth", cfg.resolve(cfg.truth)}}) {
    if (!p.empty()) inputs[name] = input_hash(p);
  }
  json manifest = {{"config", json::parse(cfg.canonical_json())},
                   {"config_hash", cfg.hash()},
                   {"inputs", inputs},
                   {"artifacts", result.artifact_hashes}};
  std::ofstream mout(result.manifest, std::ios::trunc);
  if (!mout) throw IoError("cannot write " + result.manifest.string());
  mout << manifest.dump(2) << '\n';
  return result;
}

}  // namespace ecoserv
