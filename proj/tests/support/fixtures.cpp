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

#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

#include <unistd.h>

#include "dvd/image_io.hpp"
#include "dvd/rng.hpp"

namespace fs = std::filesystem;

namespace dvd::testing {

Image random_image(std::uint64_t seed, int width, int height) {
  PhiloxStream rng(seed, 99);
  Image img(width, height);
  for (double& v : img.values()) v = rng.uniform();
  return img;
}

Image synthetic_image(std::uint64_t seed, int width, int height) {
  PhiloxStream rng(seed, 17);
  Image img(width, height);
  double c0[3], c1[3];
  for (int c = 0; c < 3; ++c) {
    c0[c] = rng.uniform(0.1, 0.9);
    c1[c] = rng.uniform(0.1, 0.9);
  }
  const double angle = rng.uniform(0.0, std::numbers::pi);
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = std::clamp(0.5 + ((x - width / 2.0) * ca + (y - height / 2.0) * sa) / (width + height), 0.0, 1.0);
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = c0[c] + u * (c1[c] - c0[c]);
    }
  }
  const int shapes = 3 + static_cast<int>(rng.below(4));
  for (int s = 0; s < shapes; ++s) {
    const bool ellipse = rng.uniform() < 0.5;
    const double cx = rng.uniform(0.0, width), cy = rng.uniform(0.0, height);
    const double rx = rng.uniform(0.08, 0.3) * width, ry = rng.uniform(0.08, 0.3) * height;
    double col[3];
    for (double& v : col) v = rng.uniform(0.0, 1.0);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
        const bool inside = ellipse ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        if (inside) {
          for (int c = 0; c < 3; ++c) img.at(c, y, x) = col[c];
        }
      }
    }
  }
  const double fx = rng.uniform(0.05, 0.4), fy = rng.uniform(0.05, 0.4), amp = rng.uniform(0.02, 0.08);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = amp * std::sin(fx * x + fy * y);
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = std::clamp(img.at(c, y, x) + t, 0.0, 1.0);
    }
  }
  return img;
}

std::vector<Image> fixture_set(std::size_t n, int width, int height, std::uint64_t seed) {
  std::vector<Image> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(synthetic_image(seed * 1000003 + i, width, height));
  return out;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("dvd_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_dataset(const fs::path& root, int classes, int per_class, int width, int height,
                   std::uint64_t seed) {
  for (int k = 0; k < classes; ++k) {
    const fs::path dir = root / ("class_" + std::to_string(k));
    fs::create_directories(dir);
    for (int i = 0; i < per_class; ++i) {
      const auto id = static_cast<std::uint64_t>(k * per_class + i);
      write_png(dir / ("img_" + std::to_string(i) + ".png"), synthetic_image(seed * 7919 + id, width, height));
    }
  }
}

}  // namespace dvd::testing
