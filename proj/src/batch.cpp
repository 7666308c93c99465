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

#include "dvd/batch.hpp"

#include <cmath>
#include <fstream>

#include "dvd/pipeline.hpp"

using json = nlohmann::json;

namespace dvd {
namespace {

void check_buffer(std::span<const float> images, const BatchShape& shape) {
  if (shape.n == 0 || shape.height <= 0 || shape.width <= 0) {
    throw BindingError("batch shape must have N, H, W > 0");
  }
  if (images.size() != shape.elements()) {
    throw BindingError("buffer holds " + std::to_string(images.size()) + " floats, shape needs " +
                       std::to_string(shape.elements()));
  }
  for (std::size_t i = 0; i < images.size(); ++i) {
    const float v = images[i];
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw BindingError("buffer value at flat index " + std::to_string(i) + " is outside [0,1]");
    }
  }
}

std::string id_for(const std::vector<std::string>& ids, std::size_t i, std::size_t n) {
  if (ids.empty()) return std::to_string(i);
  if (ids.size() != n) throw BindingError("image_ids must be empty or one per image");
  return ids[i];
}

}  // namespace

Image image_from_nhwc(std::span<const float> data, const BatchShape& shape, std::size_t i) {
  Image img(shape.width, shape.height);
  const std::size_t base = i * static_cast<std::size_t>(shape.height) * shape.width * 3;
  for (int y = 0; y < shape.height; ++y) {
    for (int x = 0; x < shape.width; ++x) {
      const std::size_t p = base + (static_cast<std::size_t>(y) * shape.width + x) * 3;
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = static_cast<double>(data[p + c]);
    }
  }
  return img;
}

void image_to_nhwc(const Image& img, std::span<float> data, const BatchShape& shape, std::size_t i) {
  if (img.width() != shape.width || img.height() != shape.height) {
    throw BindingError("image size does not match the batch shape");
  }
  const std::size_t base = i * static_cast<std::size_t>(shape.height) * shape.width * 3;
  for (int y = 0; y < shape.height; ++y) {
    for (int x = 0; x < shape.width; ++x) {
      const std::size_t p = base + (static_cast<std::size_t>(y) * shape.width + x) * 3;
      for (int c = 0; c < 3; ++c) data[p + c] = static_cast<float>(img.at(c, y, x));
    }
  }
}

TransformHandle::TransformHandle(DvdConfig cfg, ScheduleSet schedules)
    : cfg_(std::move(cfg)), schedules_(std::move(schedules)) {
  cfg_.validate();
  fingerprint_ = transform_fingerprint(cfg_, schedules_);
}

TransformHandle TransformHandle::from_json(const json& doc, const std::filesystem::path& base_dir) {
  DvdConfig cfg = DvdConfig::from_json_strict(doc);
  if (doc.contains("schedules")) {
    if (!doc["schedules"].is_string()) throw ConfigError("field 'schedules' must be a file path");
    std::filesystem::path p = doc["schedules"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return TransformHandle(std::move(cfg), ScheduleSet::from_file(p.string()));
  }
  return TransformHandle(std::move(cfg), ScheduleSet::defaults());
}

TransformHandle TransformHandle::from_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(doc, path.parent_path());
}

std::vector<float> TransformHandle::transform_batch(std::span<const float> images, const BatchShape& shape,
                                                    AgeMonths age) const {
  check_buffer(images, shape);
  std::vector<float> out(images.size());
  for (std::size_t i = 0; i < shape.n; ++i) {
    const Image result = dvd_transform(image_from_nhwc(images, shape, i), age, cfg_, schedules_, Exec::serial);
    image_to_nhwc(result, out, shape, i);
  }
  return out;
}

std::vector<float> TransformHandle::corrupt_batch(std::span<const float> images, const BatchShape& shape,
                                                  const CorruptionSpec& spec, std::uint64_t seed,
                                                  const std::vector<std::string>& image_ids) const {
  spec.validate();
  check_buffer(images, shape);
  if (!image_ids.empty() && image_ids.size() != shape.n) {
    throw BindingError("image_ids must be empty or one per image");
  }
  const std::string kind(to_string(spec.kind));
  std::vector<float> out(images.size());
  for (std::size_t i = 0; i < shape.n; ++i) {
    const std::uint64_t s = derive_corruption_seed(seed, id_for(image_ids, i, shape.n), kind);
    image_to_nhwc(corrupt(image_from_nhwc(images, shape, i), spec, s), out, shape, i);
  }
  return out;
}

std::vector<float> TransformHandle::perturb_batch(std::span<const float> images, const BatchShape& shape,
                                                  const NoiseAttackSpec& spec,
                                                  const std::vector<std::string>& image_ids) const {
  CorruptionTable::builtin().validate(spec);
  check_buffer(images, shape);
  if (!image_ids.empty() && image_ids.size() != shape.n) {
    throw BindingError("image_ids must be empty or one per image");
  }
  const std::string kind(to_string(spec.kind));
  std::vector<float> out(images.size());
  for (std::size_t i = 0; i < shape.n; ++i) {
    NoiseAttackSpec per = spec;
    per.seed = derive_corruption_seed(spec.seed, id_for(image_ids, i, shape.n), kind);
    image_to_nhwc(perturb(image_from_nhwc(images, shape, i), per), out, shape, i);
  }
  return out;
}

}  // namespace dvd
