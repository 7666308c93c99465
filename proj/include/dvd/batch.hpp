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

// Buffer-level entry points for in-process callers such as language
// bindings. Images are exchanged as contiguous N x H x W x 3 float32 arrays.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dvd/degradations.hpp"
#include "dvd/image.hpp"
#include "dvd/schedules.hpp"
#include "dvd/transforms.hpp"

namespace dvd {

class BindingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BatchShape {
  std::size_t n = 0;
  int height = 0;
  int width = 0;

  std::size_t elements() const {
    return n * static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * 3;
  }
};

/// Copies image `i` of an NHWC buffer into an Image.
Image image_from_nhwc(std::span<const float> data, const BatchShape& shape, std::size_t i);
/// Writes an Image into slot `i` of an NHWC buffer, rounding to float.
void image_to_nhwc(const Image& img, std::span<float> data, const BatchShape& shape, std::size_t i);

/// Immutable snapshot of a config and its schedules. Safe to share between
/// threads; every call allocates its own output.
class TransformHandle {
 public:
  TransformHandle(DvdConfig cfg, ScheduleSet schedules);

  /// Strict config: alpha, beta and lambda are required. An optional
  /// "schedules" entry names an anchors or fitted-schedule file, resolved
  /// relative to `base_dir`; the built-in anchors are used otherwise.
  static TransformHandle from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  static TransformHandle from_config_file(const std::filesystem::path& path);

  const DvdConfig& config() const { return cfg_; }
  const ScheduleSet& schedules() const { return schedules_; }
  /// Same value the pipeline records as transform_fingerprint.
  const std::string& fingerprint() const { return fingerprint_; }

  /// Per-image dvd_transform at one age. Shape and values are validated
  /// before any work; the input is never modified.
  std::vector<float> transform_batch(std::span<const float> images, const BatchShape& shape,
                                     AgeMonths age) const;

  /// Per-image corrupt(). Image i uses the seed derived from (seed,
  /// image_ids[i], kind), or from (seed, decimal i, kind) when no ids are
  /// given, matching the pipeline when ids are the dataset image_ids.
  std::vector<float> corrupt_batch(std::span<const float> images, const BatchShape& shape,
                                   const CorruptionSpec& spec, std::uint64_t seed,
                                   const std::vector<std::string>& image_ids = {}) const;

  /// Per-image perturb() with the same seed derivation, keyed on spec.seed.
  std::vector<float> perturb_batch(std::span<const float> images, const BatchShape& shape,
                                   const NoiseAttackSpec& spec,
                                   const std::vector<std::string>& image_ids = {}) const;

 private:
  DvdConfig cfg_;
  ScheduleSet schedules_;
  std::string fingerprint_;
};

}  // namespace dvd
