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

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dvd {

/// Selects between the OpenMP kernels and their serial references. Both
/// paths compute every output element with the same operation order, so
/// their results are bitwise identical.
enum class Exec { serial, parallel };

class ImageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// H x W x 3 image of intensities, stored planar (channel-major) in double
/// precision. Values are expected in [0,1] at module boundaries.
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const { return pixels_.empty(); }

  double& at(int c, int y, int x) { return pixels_[index(c, y, x)]; }
  double at(int c, int y, int x) const { return pixels_[index(c, y, x)]; }

  std::span<double> plane(int c) {
    return {pixels_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  std::span<const double> plane(int c) const {
    return {pixels_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  std::span<double> values() { return pixels_; }
  std::span<const double> values() const { return pixels_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return static_cast<std::size_t>(c) * plane_size() +
           static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

/// Throws ImageError for zero-sized images or non-finite values.
void require_valid(const Image& img, const char* what);

bool in_unit_range(const Image& img);
void clamp_unit(Image& img);
double max_abs_diff(const Image& a, const Image& b);
double mean_value(const Image& img);

/// Peak signal-to-noise ratio for unit-range images; +inf when identical.
double psnr(const Image& reference, const Image& test);

/// Area-weighted resampling. Exact box averaging when shrinking; each output
/// pixel integrates the source footprint it covers when enlarging.
Image resize_area(const Image& img, int width, int height);

}  // namespace dvd
