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

#include "ecoserv/raster.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <json.hpp>

#include "ecoserv/error.hpp"

namespace ecoserv {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDtype = "f64le";

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct ContainerPaths {
  fs::path header;
  fs::path payload;
};

ContainerPaths container_paths(const fs::path& path) {
  const std::string s = path.string();
  if (ends_with(s, ".ecr.json"))
    return {path, fs::path(s.substr(0, s.size() - 5))};
  if (ends_with(s, ".ecr")) return {fs::path(s + ".json"), path};
  return {fs::path(s + ".ecr.json"), fs::path(s + ".ecr")};
}

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0x00000000ffffffffULL) << 32) | (v >> 32);
    v = ((v & 0x0000ffff0000ffffULL) << 16) | ((v >> 16) & 0x0000ffff0000ffffULL);
    v = ((v & 0x00ff00ff00ff00ffULL) << 8) | ((v >> 8) & 0x00ff00ff00ff00ffULL);
  }
  return v;
}

json nodata_to_json(const std::optional<double>& nodata) {
  if (!nodata) return nullptr;
  const double v = *nodata;
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  return v;
}

std::optional<double> nodata_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  throw ValidationError("raster header: 'nodata' must be null, a number, or "
                        "one of \"NaN\", \"Infinity\", \"-Infinity\"");
}

int positive_field(const json& header, const char* name) {
  if (!header.contains(name) || !header[name].is_number_integer())
    throw ValidationError(std::string("raster header: missing integer field '") +
                          name + "'");
  const auto v = header[name].get<std::int64_t>();
  if (v <= 0 || v > std::numeric_limits<int>::max())
    throw ValidationError(std::string("raster header: '") + name +
                          "' must be a positive integer");
  return static_cast<int>(v);
}

Raster read_container(const fs::path& path) {
  const auto paths = container_paths(path);
  std::ifstream hin(paths.header);
  if (!hin) throw MissingInputError("cannot open raster header " + paths.header.string());
  json header;
  try {
    header = json::parse(hin);
  } catch (const json::parse_error& e) {
    throw ValidationError("raster header " + paths.header.string() +
                          ": malformed JSON: " + e.what());
  }
  if (!header.is_object())
    throw ValidationError("raster header: top level must be an object");

  Raster r;
  r.width = positive_field(header, "width");
  r.height = positive_field(header, "height");
  r.bands = positive_field(header, "bands");
  if (header.value("dtype", "") != kDtype)
    throw ValidationError("raster header: unsupported dtype (expected f64le)");
  if (header.contains("band_names") && !header["band_names"].is_null()) {
    if (!header["band_names"].is_array())
      throw ValidationError("raster header: 'band_names' must be an array");
    for (const auto& n : header["band_names"]) {
      if (!n.is_string())
        throw ValidationError("raster header: band names must be strings");
      r.band_names.push_back(n.get<std::string>());
    }
  }
  r.nodata = nodata_from_json(header.value("nodata", json(nullptr)));
  if (header.contains("geo") && !header["geo"].is_null())
    r.geo_json = header["geo"].dump();

  fs::path payload = paths.payload;
  if (header.contains("data_file")) {
    if (!header["data_file"].is_string())
      throw ValidationError("raster header: 'data_file' must be a string");
    payload = paths.header.parent_path() / header["data_file"].get<std::string>();
  }

  std::ifstream din(payload, std::ios::binary);
  if (!din) throw MissingInputError("cannot open raster payload " + payload.string());
  const std::uint64_t expected =
      static_cast<std::uint64_t>(r.width) * static_cast<std::uint64_t>(r.height) *
      static_cast<std::uint64_t>(r.bands);
  const auto actual_bytes = fs::file_size(payload);
  if (actual_bytes != expected * sizeof(double))
    throw ValidationError("raster payload " + payload.string() + ": length mismatch (" +
                          std::to_string(actual_bytes) + " bytes, header declares " +
                          std::to_string(expected * sizeof(double)) + ")");
  r.data.resize(expected);
  din.read(reinterpret_cast<char*>(r.data.data()),
           static_cast<std::streamsize>(actual_bytes));
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& v : r.data)
      v = std::bit_cast<double>(to_le(std::bit_cast<std::uint64_t>(v)));
  }
  r.validate();
  return r;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

// Classic libpng interface so 16-bit samples come through unconverted.
// Only trivially destructible state lives between setjmp and the read calls.
Raster read_png(const fs::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw MissingInputError("cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("libpng: allocation failed");
  }
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int depth = 0, color = 0, channels = 0;
  volatile bool unsupported = false;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ValidationError("malformed PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  depth = png_get_bit_depth(png, info);
  color = png_get_color_type(png, info);
  channels = png_get_channels(png, info);
  if ((depth != 8 && depth != 16) || color == PNG_COLOR_TYPE_PALETTE) {
    unsupported = true;
  } else {
    const std::size_t stride = png_get_rowbytes(png, info);
    pixels.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (unsupported)
    throw ValidationError("unsupported PNG " + path.string() + ": bit depth " +
                          std::to_string(depth) +
                          (color == PNG_COLOR_TYPE_PALETTE ? " (palette)" : "") +
                          "; only 8/16-bit gray, gray+alpha, RGB, RGBA are read");

  Raster r(static_cast<int>(width), static_cast<int>(height), channels);
  const std::size_t bytes_per_sample = depth == 16 ? 2 : 1;
  for (png_uint_32 y = 0; y < height; ++y) {
    const unsigned char* row = rows[y];
    for (png_uint_32 x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        const unsigned char* s = row + (x * channels + c) * bytes_per_sample;
        const double v = depth == 16 ? static_cast<double>((s[0] << 8) | s[1])
                                     : static_cast<double>(s[0]);
        r.at(c, static_cast<int>(x), static_cast<int>(y)) = v;
      }
    }
  }
  return r;
}

}  // namespace

Raster::Raster(int w, int h, int b, double fill) : width(w), height(h), bands(b) {
  if (w <= 0 || h <= 0 || b <= 0)
    throw ValidationError("raster dimensions must be positive");
  data.assign(pixel_count() * static_cast<std::size_t>(b), fill);
}

void Raster::validate() const {
  if (width <= 0 || height <= 0 || bands <= 0)
    throw ValidationError("raster dimensions must be positive");
  if (data.size() != pixel_count() * static_cast<std::size_t>(bands))
    throw ValidationError("raster data length " + std::to_string(data.size()) +
                          " does not equal width*height*bands");
  if (!band_names.empty() && band_names.size() != static_cast<std::size_t>(bands))
    throw ValidationError("raster band_names must be empty or one per band");
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i]) && !is_nodata(data[i]))
      throw ValidationError("raster value at index " + std::to_string(i) +
                            " is not finite and is not the nodata value");
  }
}

bool operator==(const Raster& a, const Raster& b) {
  if (a.width != b.width || a.height != b.height || a.bands != b.bands ||
      a.band_names != b.band_names || a.geo_json != b.geo_json ||
      a.nodata.has_value() != b.nodata.has_value())
    return false;
  if (a.nodata && std::bit_cast<std::uint64_t>(*a.nodata) !=
                      std::bit_cast<std::uint64_t>(*b.nodata))
    return false;
  return a.data.size() == b.data.size() &&
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

Raster read_raster(const fs::path& path) {
  if (path.extension() == ".png") return read_png(path);
  return read_container(path);
}

fs::path write_raster(const Raster& raster, const fs::path& path) {
  raster.validate();
  const auto paths = container_paths(path);
  json header = {
      {"width", raster.width},
      {"height", raster.height},
      {"bands", raster.bands},
      {"dtype", kDtype},
      {"band_names", raster.band_names},
      {"nodata", nodata_to_json(raster.nodata)},
      {"geo", raster.geo_json.empty() ? json(nullptr) : json::parse(raster.geo_json)},
      {"data_file", paths.payload.filename().string()},
  };
  {
    std::ofstream out(paths.payload, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + paths.payload.string());
    if constexpr (std::endian::native == std::endian::little) {
      out.write(reinterpret_cast<const char*>(raster.data.data()),
                static_cast<std::streamsize>(raster.data.size() * sizeof(double)));
    } else {
      for (double v : raster.data) {
        const std::uint64_t le = to_le(std::bit_cast<std::uint64_t>(v));
        out.write(reinterpret_cast<const char*>(&le), sizeof le);
      }
    }
    if (!out) throw IoError("short write to " + paths.payload.string());
  }
  std::ofstream hout(paths.header, std::ios::trunc);
  if (!hout) throw IoError("cannot write " + paths.header.string());
  hout << header.dump(2) << '\n';
  if (!hout) throw IoError("short write to " + paths.header.string());
  return paths.header;
}

void write_png(const fs::path& path, int width, int height, int channels,
               std::span<const unsigned char> samples) {
  if (channels < 1 || channels > 4)
    throw ValidationError("PNG output supports 1-4 channels");
  if (samples.size() != static_cast<std::size_t>(width) * height * channels)
    throw ValidationError("PNG sample buffer has the wrong size");
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  static constexpr png_uint_32 kFormats[] = {PNG_FORMAT_GRAY, PNG_FORMAT_GA,
                                             PNG_FORMAT_RGB, PNG_FORMAT_RGBA};
  image.format = kFormats[channels - 1];
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, samples.data(), 0,
                               nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot write PNG " + path.string() + ": " + msg);
  }
}

unsigned char gray_level(double v, double lo, double hi) noexcept {
  if (std::isnan(v)) return 0;
  double t = (v - lo) / (hi - lo);
  t = std::clamp(t, 0.0, 1.0);
  return static_cast<unsigned char>(std::floor(255.0 * t + 0.5));
}

void render_grayscale(std::span<const double> values, int width, int height,
                      double lo, double hi, const fs::path& path) {
  if (!(lo < hi))
    throw ValidationError("render range requires lo < hi (got lo=" + std::to_string(lo) +
                          ", hi=" + std::to_string(hi) + ")");
  if (values.size() != static_cast<std::size_t>(width) * height)
    throw ValidationError("render: value count does not match width*height");
  std::vector<unsigned char> px(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) px[i] = gray_level(values[i], lo, hi);
  write_png(path, width, height, 1, px);
}

}  // namespace ecoserv
