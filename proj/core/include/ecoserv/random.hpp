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

#ifndef ECOSERV_RANDOM_HPP_
#define ECOSERV_RANDOM_HPP_

#include <cstdint>
#include <random>

namespace ecoserv {

// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for stream `index` of a run seeded with `seed`; order-independent.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Portable random source.
///
/// The standard distributions are implementation-defined, so bounded
/// integers, uniforms and normals are derived here directly from the
/// mt19937_64 bit stream. Identical seeds give identical sequences on every
/// conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t uniform_index(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal deviate (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace ecoserv

#endif  // ECOSERV_RANDOM_HPP_
