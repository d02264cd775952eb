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

#include "ecoserv/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "ecoserv/error.hpp"
#include "ecoserv/parallel.hpp"
#include "ecoserv/random.hpp"

namespace ecoserv {
namespace {

using nlohmann::json;

constexpr std::uint64_t kPointStream = 0x706f696e7473ULL;  // "points"

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw ValidationError("scene spec: " + field + ": " + what);
}

const json& need(const json& j, const std::string& parent, const char* name) {
  if (!j.contains(name)) bad(parent + name, "missing");
  return j.at(name);
}

int get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) bad(field, "expected an integer");
  return j.get<int>();
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) bad(field, "expected a number");
  return j.get<double>();
}

std::vector<double> get_vector(const json& j, const std::string& field, int bands) {
  if (j.is_number()) return std::vector<double>(static_cast<std::size_t>(bands), j.get<double>());
  if (!j.is_array()) bad(field, "expected a number or an array");
  if (j.size() != static_cast<std::size_t>(bands))
    bad(field, "expected " + std::to_string(bands) + " values, got " + std::to_string(j.size()));
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i)
    v.push_back(get_number(j[i], field + "[" + std::to_string(i) + "]"));
  return v;
}

Region get_rect(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 4) bad(field, "expected [x0, y0, x1, y1]");
  return {get_int(j[0], field), get_int(j[1], field), get_int(j[2], field),
          get_int(j[3], field)};
}

}  // namespace

void SceneSpec::validate() const {
  if (width <= 0 || height <= 0) bad("width/height", "must be positive");
  if (bands <= 0) bad("bands", "must be positive");
  if (!(mixing_zone_width >= 0)) bad("mixing_zone_width", "must be >= 0");
  if (classes.empty()) bad("classes", "must list at least one class");
  if (regions.empty() || regions.front().shape != RegionShape::kBackground)
    bad("regions[0]", "the first region must be the background");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    const std::string f = "regions[" + std::to_string(i) + "]";
    if (i > 0 && r.shape == RegionShape::kBackground) bad(f, "only one background allowed");
    if (r.class_id < 0 || static_cast<std::size_t>(r.class_id) >= classes.size())
      bad(f + ".class_id", "outside [0," + std::to_string(classes.size()) + ")");
    if (r.mean.size() != static_cast<std::size_t>(bands)) bad(f + ".mean", "wrong length");
    if (r.sigma.size() != static_cast<std::size_t>(bands)) bad(f + ".sigma", "wrong length");
    for (double s : r.sigma)
      if (!(s >= 0)) bad(f + ".sigma", "must be >= 0");
    for (double m : r.mean)
      if (!std::isfinite(m)) bad(f + ".mean", "must be finite");
    if (r.shape == RegionShape::kRectangle &&
        (r.rect.empty() || r.rect.x0 < 0 || r.rect.y0 < 0 || r.rect.x1 > width ||
         r.rect.y1 > height))
      bad(f + ".rect", "exceeds the scene bounds or is empty");
    if (r.shape == RegionShape::kDisk) {
      if (!(r.radius > 0)) bad(f + ".radius", "must be positive");
      if (r.cx < 0 || r.cy < 0 || r.cx > width || r.cy > height)
        bad(f + ".center", "lies outside the scene");
    }
  }
  if (!point_region.empty() &&
      (point_region.x0 < 0 || point_region.y0 < 0 || point_region.x1 > width ||
       point_region.y1 > height))
    bad("points.region", "exceeds the scene bounds");
}

SceneSpec parse_scene_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scene spec: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) bad("<root>", "expected an object");
  SceneSpec s;
  s.width = get_int(need(j, "", "width"), "width");
  s.height = get_int(need(j, "", "height"), "height");
  s.bands = get_int(need(j, "", "bands"), "bands");
  const auto& seed = need(j, "", "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) bad("seed", "expected an integer");
  s.seed = seed.get<std::uint64_t>();
  s.mixing_zone_width =
      j.contains("mixing_zone_width") ? get_number(j["mixing_zone_width"], "mixing_zone_width") : 0;
  const auto& classes = need(j, "", "classes");
  if (!classes.is_array()) bad("classes", "expected an array of names");
  for (const auto& c : classes) {
    if (!c.is_string()) bad("classes", "names must be strings");
    s.classes.push_back(c.get<std::string>());
  }
  if (s.bands <= 0) bad("bands", "must be positive");
  const auto& regions = need(j, "", "regions");
  if (!regions.is_array()) bad("regions", "expected an array");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& jr = regions[i];
    const std::string f = "regions[" + std::to_string(i) + "].";
    if (!jr.is_object()) bad(f, "expected an object");
    SceneRegion r;
    const auto& shape = need(jr, f, "shape");
    const std::string name = shape.is_string() ? shape.get<std::string>() : "";
    if (name == "background") {
      r.shape = RegionShape::kBackground;
    } else if (name == "rectangle") {
      r.shape = RegionShape::kRectangle;
      r.rect = get_rect(need(jr, f, "rect"), f + "rect");
    } else if (name == "disk") {
      r.shape = RegionShape::kDisk;
      const auto& c = need(jr, f, "center");
      if (!c.is_array() || c.size() != 2) bad(f + "center", "expected [x, y]");
      r.cx = get_number(c[0], f + "center");
      r.cy = get_number(c[1], f + "center");
      r.radius = get_number(need(jr, f, "radius"), f + "radius");
    } else {
      bad(f + "shape", "expected background, rectangle or disk");
    }
    r.class_id = get_int(need(jr, f, "class_id"), f + "class_id");
    r.mean = get_vector(need(jr, f, "mean"), f + "mean", s.bands);
    r.sigma = get_vector(need(jr, f, "sigma"), f + "sigma", s.bands);
    s.regions.push_back(std::move(r));
  }
  if (j.contains("points")) {
    const auto& p = j["points"];
    if (!p.is_object()) bad("points", "expected an object");
    const int count = get_int(need(p, "points.", "count"), "points.count");
    if (count < 0) bad("points.count", "must be >= 0");
    s.point_count = static_cast<std::size_t>(count);
    if (p.contains("region")) s.point_region = get_rect(p["region"], "points.region");
  }
  s.validate();
  return s;
}

SceneSpec read_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot open scene spec " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene_spec(ss.str());
}

double signed_distance(const SceneRegion& r, int x, int y) {
  const double px = x + 0.5;
  const double py = y + 0.5;
  switch (r.shape) {
    case RegionShape::kBackground:
      return std::numeric_limits<double>::infinity();
    case RegionShape::kDisk:
      return r.radius - std::hypot(px - r.cx, py - r.cy);
    case RegionShape::kRectangle: {
      const double dx0 = px - r.rect.x0, dx1 = r.rect.x1 - px;
      const double dy0 = py - r.rect.y0, dy1 = r.rect.y1 - py;
      const double inside = std::min({dx0, dx1, dy0, dy1});
      if (inside >= 0) return inside;
      const double ox = std::max({-dx0, -dx1, 0.0});
      const double oy = std::max({-dy0, -dy1, 0.0});
      return -std::hypot(ox, oy);
    }
  }
  return 0;
}

Scene generate_scene(const SceneSpec& spec, unsigned threads) {
  spec.validate();
  const int nb = spec.bands;
  Scene scene;
  scene.image = Raster(spec.width, spec.height, nb);
  scene.truth = Raster(spec.width, spec.height, 1);
  scene.truth.band_names = {"class_id"};
  scene.classes.names = spec.classes;
  scene.training_region =
      spec.point_region.empty() ? Region{0, 0, spec.width, spec.height} : spec.point_region;

  // Rectangle edges on the scene border have no neighbour to blend with, so
  // they are pushed outside the image before distances are taken.
  std::vector<SceneRegion> regions = spec.regions;
  const int pad = spec.width + spec.height + static_cast<int>(spec.mixing_zone_width) + 1;
  for (auto& r : regions) {
    if (r.shape != RegionShape::kRectangle) continue;
    if (r.rect.x0 <= 0) r.rect.x0 = -pad;
    if (r.rect.y0 <= 0) r.rect.y0 = -pad;
    if (r.rect.x1 >= spec.width) r.rect.x1 = spec.width + pad;
    if (r.rect.y1 >= spec.height) r.rect.y1 = spec.height + pad;
  }

  parallel_for(static_cast<std::size_t>(spec.height), threads, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    Rng rng(derive_seed(spec.seed, row));
    std::vector<double> mean(nb), sigma(nb);
    for (int x = 0; x < spec.width; ++x) {
      int owner = 0;
      for (std::size_t i = 0; i < regions.size(); ++i) {
        const auto& r = regions[i];
        const double sd = signed_distance(r, x, y);
        double alpha = 0;
        if (spec.mixing_zone_width > 0)
          alpha = std::clamp(0.5 + sd / spec.mixing_zone_width, 0.0, 1.0);
        else
          alpha = sd >= 0 ? 1.0 : 0.0;
        if (sd >= 0) owner = static_cast<int>(i);
        for (int b = 0; b < nb; ++b) {
          mean[b] = (1 - alpha) * mean[b] + alpha * r.mean[b];
          sigma[b] = (1 - alpha) * sigma[b] + alpha * r.sigma[b];
        }
      }
      for (int b = 0; b < nb; ++b) scene.image.at(b, x, y) = mean[b] + sigma[b] * rng.normal();
      scene.truth.at(0, x, y) = spec.regions[static_cast<std::size_t>(owner)].class_id;
    }
  });

  Rng rng(derive_seed(spec.seed ^ kPointStream, 0));
  const auto& reg = scene.training_region;
  const auto rw = static_cast<std::uint64_t>(reg.x1 - reg.x0);
  const auto rh = static_cast<std::uint64_t>(reg.y1 - reg.y0);
  scene.points.reserve(spec.point_count);
  for (std::size_t i = 0; i < spec.point_count; ++i) {
    const int x = reg.x0 + static_cast<int>(rng.uniform_index(rw));
    const int y = reg.y0 + static_cast<int>(rng.uniform_index(rh));
    scene.points.push_back({x, y, static_cast<int>(scene.truth.at(0, x, y))});
  }
  return scene;
}

void write_scene(const Scene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_raster(scene.image, dir / "scene.ecr");
  write_raster(scene.truth, dir / "truth.ecr");
  write_points_csv(scene.points, dir / "points.csv");
  write_classes_csv(scene.classes, dir / "classes.csv");
}

}  // namespace ecoserv
