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

#ifndef ECOSERV_RASTER_HPP_
#define ECOSERV_RASTER_HPP_

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ecoserv {

/// Multi-band 2D grid of 64-bit floats, band-sequential and row-major within
/// each band. All non-nodata values are finite.
struct Raster {
  int width = 0;
  int height = 0;
  int bands = 0;
  std::vector<double> data;
  std::vector<std::string> band_names;  // empty or one per band
  std::optional<double> nodata;         // may be NaN
  // Georeferencing block carried through untouched, as serialized JSON.
  std::string geo_json;

  Raster() = default;
  Raster(int w, int h, int b, double fill = 0.0);

  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }

  std::span<double> band(int b) {
    return {data.data() + static_cast<std::size_t>(b) * pixel_count(),
            pixel_count()};
  }
  std::span<const double> band(int b) const {
    return {data.data() + static_cast<std::size_t>(b) * pixel_count(),
            pixel_count()};
  }

  double& at(int b, int x, int y) { return band(b)[index(x, y)]; }
  double at(int b, int x, int y) const { return band(b)[index(x, y)]; }

  bool is_nodata(double v) const noexcept {
    if (!nodata) return false;
    if (std::isnan(*nodata)) return std::isnan(v);
    return v == *nodata;
  }

  // Throws ValidationError when an invariant is broken.
  void validate() const;

  // Bitwise equality, including NaN payloads and metadata.
  friend bool operator==(const Raster& a, const Raster& b);
};

// Reads a `.ecr` container (header or payload path) or an 8/16-bit PNG.
Raster read_raster(const std::filesystem::path& path);

// Writes `<stem>.ecr.json` plus the `<stem>.ecr` payload. `path` may name
// either file. Returns the header path.
std::filesystem::path write_raster(const Raster& raster,
                                   const std::filesystem::path& path);

// Writes an 8-bit PNG; `samples` holds width*height*channels bytes.
void write_png(const std::filesystem::path& path, int width, int height,
               int channels, std::span<const unsigned char> samples);

// Grayscale intensity: round-half-up of 255*clamp((v-lo)/(hi-lo), 0, 1).
// NaN maps to 0.
unsigned char gray_level(double v, double lo, double hi) noexcept;

// Renders a per-pixel scalar map to an 8-bit grayscale PNG, lo black and
// hi white. Throws ValidationError unless lo < hi.
void render_grayscale(std::span<const double> values, int width, int height,
                      double lo, double hi, const std::filesystem::path& path);

}  // namespace ecoserv

#endif  // ECOSERV_RASTER_HPP_
