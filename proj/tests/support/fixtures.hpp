// Copyright 2026 The DVD Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Deterministic synthetic images and on-disk datasets for tests.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dvd/image.hpp"

namespace dvd::testing {

/// Uniform noise in [0,1).
Image random_image(std::uint64_t seed, int width, int height);

/// Natural-ish content: a colour gradient, a few filled shapes and a
/// sinusoidal texture, all drawn from the seed.
Image synthetic_image(std::uint64_t seed, int width, int height);

std::vector<Image> fixture_set(std::size_t n, int width, int height, std::uint64_t seed = 2026);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Writes root/class_<k>/img_<i>.png for `classes` x `per_class` images.
void write_dataset(const std::filesystem::path& root, int classes, int per_class, int width,
                   int height, std::uint64_t seed = 7);

}  // namespace dvd::testing
