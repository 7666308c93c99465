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

#include "dvd/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dvd {

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw ImageError("image dimensions must be positive, got " + std::to_string(width) +
                     "x" + std::to_string(height));
  }
  pixels_.assign(plane_size() * kChannels, fill);
}

void require_valid(const Image& img, const char* what) {
  if (img.empty()) throw ImageError(std::string(what) + ": zero-sized image");
  for (double v : img.values()) {
    if (!std::isfinite(v)) throw ImageError(std::string(what) + ": non-finite pixel value");
  }
}

bool in_unit_range(const Image& img) {
  return std::all_of(img.values().begin(), img.values().end(),
                     [](double v) { return v >= 0.0 && v <= 1.0; });
}

void clamp_unit(Image& img) {
  for (double& v : img.values()) v = std::clamp(v, 0.0, 1.0);
}

double max_abs_diff(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ImageError("max_abs_diff: dimension mismatch");
  }
  double worst = 0.0;
  auto va = a.values();
  auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) worst = std::max(worst, std::abs(va[i] - vb[i]));
  return worst;
}

double mean_value(const Image& img) {
  double sum = 0.0;
  for (double v : img.values()) sum += v;
  return img.empty() ? 0.0 : sum / static_cast<double>(img.values().size());
}

double psnr(const Image& reference, const Image& test) {
  if (reference.width() != test.width() || reference.height() != test.height()) {
    throw ImageError("psnr: dimension mismatch");
  }
  double sq = 0.0;
  auto r = reference.values();
  auto t = test.values();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = r[i] - t[i];
    sq += d * d;
  }
  const double mse = sq / static_cast<double>(r.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

struct Footprint {
  int first;
  std::vector<double> weights;
};

// Source coverage of each destination cell along one axis.
std::vector<Footprint> axis_footprints(int src, int dst) {
  std::vector<Footprint> out(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int d = 0; d < dst; ++d) {
    const double lo = d * scale;
    const double hi = (d + 1) * scale;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(src - 1, static_cast<int>(std::ceil(hi)) - 1);
    Footprint fp{first, {}};
    for (int s = first; s <= last; ++s) {
      const double overlap = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      fp.weights.push_back(std::max(0.0, overlap) / scale);
    }
    out[static_cast<std::size_t>(d)] = std::move(fp);
  }
  return out;
}

}  // namespace

Image resize_area(const Image& img, int width, int height) {
  require_valid(img, "resize_area");
  if (width == img.width() && height == img.height()) return img;
  const auto fx = axis_footprints(img.width(), width);
  const auto fy = axis_footprints(img.height(), height);

  Image rows(width, img.height());
  for (int c = 0; c < Image::kChannels; ++c) {
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < width; ++x) {
        const auto& fp = fx[static_cast<std::size_t>(x)];
        double acc = 0.0;
        for (std::size_t k = 0; k < fp.weights.size(); ++k) {
          acc += fp.weights[k] * img.at(c, y, fp.first + static_cast<int>(k));
        }
        rows.at(c, y, x) = acc;
      }
    }
  }
  Image out(width, height);
  for (int c = 0; c < Image::kChannels; ++c) {
    for (int y = 0; y < height; ++y) {
      const auto& fp = fy[static_cast<std::size_t>(y)];
      for (int x = 0; x < width; ++x) {
        double acc = 0.0;
        for (std::size_t k = 0; k < fp.weights.size(); ++k) {
          acc += fp.weights[k] * rows.at(c, fp.first + static_cast<int>(k), x);
        }
        out.at(c, y, x) = acc;
      }
    }
  }
  return out;
}

}  // namespace dvd
