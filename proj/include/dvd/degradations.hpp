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

// Image corruptions at five severities and black-box noise perturbations.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dvd/image.hpp"

namespace dvd {

class CorruptionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class CorruptionKind {
  gaussian_noise,
  shot_noise,
  impulse_noise,
  speckle_noise,
  motion_blur,
  zoom_blur,
  gaussian_blur,
  defocus_blur,
  rain,
  icy_window,
  drizzle,
  snow,
  pixelate,
  jpeg_compression,
  pixel_dropout,
  wave_distortion,
};

inline constexpr int kNumCorruptionKinds = 16;
inline constexpr int kNumSeverities = 5;

std::string_view to_string(CorruptionKind k);
/// Throws CorruptionError listing the valid names.
CorruptionKind parse_corruption_kind(std::string_view name);
const std::array<CorruptionKind, kNumCorruptionKinds>& all_corruption_kinds();

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::gaussian_noise;
  int severity = 1;  ///< 1..5

  void validate() const;
  bool operator==(const CorruptionSpec&) const = default;
};

enum class AttackKind { l2_gaussian, l2_uniform, salt_and_pepper };

std::string_view to_string(AttackKind k);
AttackKind parse_attack_kind(std::string_view name);

struct NoiseAttackSpec {
  AttackKind kind = AttackKind::l2_gaussian;
  double amplitude = 10.0;  ///< 255-scale pixel units
  std::uint64_t seed = 0;

  bool operator==(const NoiseAttackSpec&) const = default;
};

/// Per-severity constants loaded from the corruption data file.
class CorruptionTable {
 public:
  /// The table compiled into the library (data/corruptions.json).
  static const CorruptionTable& builtin();
  static CorruptionTable from_json(const nlohmann::json& doc);

  const std::string& version() const { return version_; }
  double reference_size_px() const { return reference_size_px_; }
  /// Parameter vector for a kind at severity 1..5, in data-file order.
  const std::vector<double>& params(CorruptionKind kind, int severity) const;
  const std::vector<double>& attack_amplitudes() const { return attack_amplitudes_; }
  double amplitude_scale() const { return amplitude_scale_; }
  double salt_pepper_fraction_per_amplitude() const { return sp_fraction_; }

  /// Throws CorruptionError unless the amplitude is one of the listed values.
  void validate(const NoiseAttackSpec& spec) const;

 private:
  std::string version_;
  double reference_size_px_ = 224.0;
  std::map<CorruptionKind, std::array<std::vector<double>, kNumSeverities>> params_;
  std::vector<double> attack_amplitudes_;
  double amplitude_scale_ = 255.0;
  double sp_fraction_ = 0.001;
};

/// Seed for one (image, kind) pair. Severity is deliberately not part of the
/// key, so all five severities of a kind share their random draws.
std::uint64_t derive_corruption_seed(std::uint64_t seed, std::string_view image_id,
                                     std::string_view kind_name);

/// Deterministic in (img, spec, seed); output has the input dimensions and
/// lies in [0,1].
Image corrupt(const Image& img, const CorruptionSpec& spec, std::uint64_t seed,
              const CorruptionTable& table = CorruptionTable::builtin());

/// The additive perturbation, in unit pixel scale and before clamping. Its L2
/// norm times amplitude_scale equals the amplitude for the two L2 kinds. Empty
/// for salt_and_pepper, which is not additive.
std::vector<double> attack_perturbation(const Image& img, const NoiseAttackSpec& spec,
                                        const CorruptionTable& table = CorruptionTable::builtin());

Image perturb(const Image& img, const NoiseAttackSpec& spec,
              const CorruptionTable& table = CorruptionTable::builtin());

}  // namespace dvd
