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

#ifndef ECOSERV_BUNDLE_HPP_
#define ECOSERV_BUNDLE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ecoserv {

struct BundleCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct BundleReport {
  std::vector<BundleCheck> checks;
  bool passed() const noexcept;
  std::string to_text() const;
};

/// Regenerates the reference scene from `<dir>/scene.json` and checks it
/// against the hashes, counts and score ranges recorded in
/// `<dir>/expected.json`, and checks the checked-in points and classes.
/// `seed_override` replaces the spec seed (used to demonstrate drift).
BundleReport verify_bundle(const std::filesystem::path& dir,
                           std::optional<std::uint64_t> seed_override = std::nullopt);

// Writes expected.json for the bundle's current contents.
void record_bundle_expectations(const std::filesystem::path& dir);

}  // namespace ecoserv

#endif  // ECOSERV_BUNDLE_HPP_
