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

#include <iostream>

#include <ecoserv/snic.hpp>

// A flat 8x8 image with k=4 gives a 2x2 seed grid.
int main() {
  const ecoserv::Raster flat(8, 8, 1);
  std::cout << ecoserv::segment(flat, {4, 10}).segment_count() << "\n";
}
