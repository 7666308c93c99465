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

// The three developmental image transforms (acuity blur, contrast limit,
// chromatic fidelity) and their age-parameterised composition.

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dvd/image.hpp"
#include "dvd/schedules.hpp"

namespace dvd {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Visual acuity

/// Blur that simulates an observer with the given minimum angle of
/// resolution on an image `width_px` wide: 4 px at 100 px and MAR 30
/// (20/600), linear in both arguments.
double snellen_to_sigma(double width_px, double mar);

/// Below this sigma the blur is the exact identity.
inline constexpr double kMinBlurSigma = 0.05;

/// Sampled, normalised Gaussian taps for offsets 0..ceil(3 sigma).
std::vector<double> gaussian_half_kernel(double sigma);

/// Separable Gaussian convolution with half-sample symmetric borders.
Image apply_acuity_blur(const Image& img, double sigma, Exec exec = Exec::parallel);

// ---------------------------------------------------------------------------
// Contrast sensitivity

/// Spectral power threshold T = P_max * (1 - C) * beta / max(floor(t / lambda), 1).
double contrast_threshold_value(double p_max, double contrast_sensitivity, double age_months,
                                double beta, double lambda);

/// DFT, zero every non-DC coefficient with power below T, inverse DFT,
/// clamp to [0,1].
Image apply_contrast_limit(const Image& img, AgeMonths t, double contrast_sensitivity, double beta,
                           double lambda, Exec exec = Exec::parallel);

// ---------------------------------------------------------------------------
// Chromatic sensitivity

struct LuminanceWeights {
  double r = 0.299;
  double g = 0.587;
  double b = 0.114;

  void validate() const;
  bool operator==(const LuminanceWeights&) const = default;
};

/// All three channels set to the luminance. Computed as
/// g + wr (r - g) + wb (b - g), which leaves grey pixels exactly unchanged.
Image to_grayscale(const Image& img, const LuminanceWeights& w = {}, Exec exec = Exec::parallel);

/// (1 - s) * gray + s * rgb per pixel and channel.
Image apply_chromatic_fidelity(const Image& img, double chromatic_sensitivity,
                               const LuminanceWeights& w = {}, Exec exec = Exec::parallel);

// ---------------------------------------------------------------------------
// Composition

enum class Stage { acuity, contrast, chroma };
std::string_view to_string(Stage s);
Stage parse_stage(std::string_view name);

/// Which image dimension stands in for w in the blur formula.
enum class SigmaReference { width, min_dimension };

struct ComponentFlags {
  bool acuity = true;
  bool contrast = true;
  bool chroma = true;
  bool operator==(const ComponentFlags&) const = default;
};

/// Controlled-rearing conditions: all, acuity+chromatic, acuity+contrast,
/// contrast+chromatic, acuity only, chromatic only, contrast only. "baseline"
/// disables everything. Separators ' ', '+', '-', '_' are interchangeable.
ComponentFlags rearing_condition(std::string_view name);
std::vector<std::string> rearing_condition_names();

struct DvdConfig {
  double alpha = 2.0;     ///< months per epoch
  double beta = 1e-4;     ///< base spectral threshold
  double lambda = 100.0;  ///< threshold decay period, months
  ComponentFlags enabled;
  std::uint64_t seed = 0;
  std::array<Stage, 3> order{Stage::acuity, Stage::contrast, Stage::chroma};
  SigmaReference sigma_reference = SigmaReference::width;
  LuminanceWeights luminance;

  void validate() const;
  nlohmann::json to_json() const;

  /// Overlays the fields present in `doc` on this config.
  void merge_json(const nlohmann::json& doc);
  /// Requires alpha, beta and lambda to be present; the error names the
  /// missing field.
  static DvdConfig from_json_strict(const nlohmann::json& doc);
};

/// Applies the enabled stages in cfg.order with parameters looked up at age t.
/// With every stage disabled the result is an exact copy.
Image dvd_transform(const Image& img, AgeMonths t, const DvdConfig& cfg, const ScheduleSet& s,
                    Exec exec = Exec::parallel);

}  // namespace dvd
