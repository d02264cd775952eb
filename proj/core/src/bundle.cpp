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

#include "ecoserv/bundle.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unistd.h>

#include "ecoserv/error.hpp"
#include "ecoserv/hash.hpp"
#include "ecoserv/raster.hpp"
#include "ecoserv/scoring.hpp"
#include "ecoserv/synth.hpp"
#include "ecoserv/training_set.hpp"

namespace ecoserv {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("ecoserv-bundle-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

json scene_hashes(const fs::path& dir) {
  return {{"scene.ecr.json", sha256_file(dir / "scene.ecr.json")},
          {"scene.ecr", sha256_file(dir / "scene.ecr")},
          {"truth.ecr.json", sha256_file(dir / "truth.ecr.json")},
          {"truth.ecr", sha256_file(dir / "truth.ecr")},
          {"points.csv", sha256_file(dir / "points.csv")},
          {"classes.csv", sha256_file(dir / "classes.csv")}};
}

json score_ranges(const SupplyMatrix& m) {
  json r = json::object();
  for (std::size_t s = 0; s < m.service_count(); ++s) {
    const auto row = m.row(s);
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    r[m.services[s]] = {*lo, *hi};
  }
  return r;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw MissingInputError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(p.string() + ": malformed JSON: " + e.what());
  }
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw MissingInputError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

bool BundleReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::string BundleReport::to_text() const {
  std::ostringstream out;
  for (const auto& c : checks)
    out << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": ")
        << c.detail << '\n';
  return out.str();
}

BundleReport verify_bundle(const fs::path& dir, std::optional<std::uint64_t> seed_override) {
  const json expected = read_json(dir / "expected.json");
  auto spec = read_scene_spec(dir / "scene.json");
  if (seed_override) spec.seed = *seed_override;

  TempDir tmp;
  write_scene(generate_scene(spec), tmp.path);
  const json got = scene_hashes(tmp.path);

  BundleReport report;
  for (auto it = expected.at("hashes").begin(); it != expected.at("hashes").end(); ++it) {
    const bool ok = got.contains(it.key()) && got[it.key()] == it.value();
    report.checks.push_back({"hash " + it.key(), ok,
                             ok ? "" : "expected " + it.value().get<std::string>() + ", got " +
                                           got.value(it.key(), std::string("<missing>"))});
  }

  const bool points_same = read_text(dir / "points.csv") == read_text(tmp.path / "points.csv");
  report.checks.push_back({"checked-in points.csv matches regeneration", points_same, ""});
  const bool classes_same =
      read_text(dir / "classes.csv") == read_text(tmp.path / "classes.csv");
  report.checks.push_back({"checked-in classes.csv matches regeneration", classes_same, ""});

  const auto points = read_points_csv(dir / "points.csv");
  const auto classes = read_classes_csv(dir / "classes.csv");
  const auto& counts = expected.at("counts");
  auto count_check = [&](const char* name, std::size_t actual) {
    const auto want = counts.at(name).get<std::size_t>();
    report.checks.push_back({std::string("count ") + name, want == actual,
                             "expected " + std::to_string(want) + ", got " +
                                 std::to_string(actual)});
  };
  count_check("points", points.size());
  count_check("classes", classes.size());
  count_check("width", static_cast<std::size_t>(spec.width));
  count_check("height", static_cast<std::size_t>(spec.height));
  count_check("bands", static_cast<std::size_t>(spec.bands));

  const auto matrix = read_matrix_csv(dir / "example_matrix.csv");
  const json ranges = score_ranges(matrix);
  report.checks.push_back({"score ranges match example_matrix.csv",
                           ranges == expected.at("score_ranges"), ranges.dump()});
  report.checks.push_back({"matrix columns match classes.csv",
                           matrix.class_names == classes.names, ""});
  return report;
}

void record_bundle_expectations(const fs::path& dir) {
  const auto spec = read_scene_spec(dir / "scene.json");
  TempDir tmp;
  write_scene(generate_scene(spec), tmp.path);
  const auto matrix = read_matrix_csv(dir / "example_matrix.csv");
  json doc = {{"hashes", scene_hashes(tmp.path)},
              {"counts",
               {{"points", spec.point_count},
                {"classes", spec.classes.size()},
                {"width", spec.width},
                {"height", spec.height},
                {"bands", spec.bands}}},
              {"score_ranges", score_ranges(matrix)}};
  std::ofstream(dir / "expected.json") << doc.dump(2) << '\n';
}

}  // namespace ecoserv
