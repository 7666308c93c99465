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

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "dvd/image.hpp"

namespace dvd {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Decodes PNG (8/16-bit, any colour type) or baseline/progressive JPEG,
/// detected by signature. Gray inputs are expanded to three channels and
/// alpha is dropped. Values are code values scaled to [0,1]; no gamma
/// decoding is applied.
Image decode_image(std::span<const std::uint8_t> bytes);
Image read_image(const std::filesystem::path& path);

/// 8-bit RGB PNG. Each value is clamped to [0,1] and rounded to the nearest
/// code value. Encoder settings are fixed so output bytes are reproducible.
std::vector<std::uint8_t> encode_png(const Image& img);
void write_png(const std::filesystem::path& path, const Image& img);

/// Baseline JPEG encode at the given quality (1-100) followed by decode.
Image jpeg_roundtrip(const Image& img, int quality);

/// The 8-bit code value an image value is written as.
std::uint8_t quantize8(double v);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace dvd
