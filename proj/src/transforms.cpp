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

#include "dvd/transforms.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "dvd/spectral.hpp"

namespace dvd {

using nlohmann::json;

double snellen_to_sigma(double width_px, double mar) {
  if (!(width_px > 0.0)) throw ConfigError("snellen_to_sigma: width must be positive");
  if (!(mar >= 1.0)) throw ConfigError("snellen_to_sigma: MAR must be >= 1");
  return 4.0 * (width_px / 100.0) * (mar / 30.0);
}

std::vector<double> gaussian_half_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(radius) + 1);
  const double denom = 2.0 * sigma * sigma;
  double total = 0.0;
  for (int i = 0; i <= radius; ++i) {
    taps[static_cast<std::size_t>(i)] = std::exp(-static_cast<double>(i) * i / denom);
    total += (i == 0 ? 1.0 : 2.0) * taps[static_cast<std::size_t>(i)];
  }
  for (double& t : taps) t /= total;
  return taps;
}

namespace {

// Half-sample symmetric extension (... b a | a b c ... z | z y ...), periodic
// with period 2n so any offset maps into range.
inline int reflect_index(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

void blur_plane(std::span<const double> src, std::span<double> dst, std::span<double> tmp, int width,
                int height, const std::vector<double>& half, bool par) {
  const int radius = static_cast<int>(half.size()) - 1;
#pragma omp parallel if (par)
  {
    std::vector<double> padded(static_cast<std::size_t>(width + 2 * radius));
    std::vector<int> idx(static_cast<std::size_t>(2 * radius + 1));
#pragma omp for schedule(static)
    for (int y = 0; y < height; ++y) {
      const double* row = src.data() + static_cast<std::size_t>(y) * width;
      for (int i = 0; i < width + 2 * radius; ++i) {
        padded[static_cast<std::size_t>(i)] = row[reflect_index(i - radius, width)];
      }
      const double* centre = padded.data() + radius;
      double* out = tmp.data() + static_cast<std::size_t>(y) * width;
      for (int x = 0; x < width; ++x) {
        double acc = half[0] * centre[x];
        for (int k = 1; k <= radius; ++k) acc += half[static_cast<std::size_t>(k)] * (centre[x - k] + centre[x + k]);
        out[x] = acc;
      }
    }
#pragma omp for schedule(static)
    for (int y = 0; y < height; ++y) {
      for (int k = -radius; k <= radius; ++k) {
        idx[static_cast<std::size_t>(k + radius)] = reflect_index(y + k, height);
      }
      double* out = dst.data() + static_cast<std::size_t>(y) * width;
      const double* mid = tmp.data() + static_cast<std::size_t>(idx[static_cast<std::size_t>(radius)]) * width;
      for (int x = 0; x < width; ++x) out[x] = half[0] * mid[x];
      for (int k = 1; k <= radius; ++k) {
        const double w = half[static_cast<std::size_t>(k)];
        const double* up = tmp.data() + static_cast<std::size_t>(idx[static_cast<std::size_t>(radius - k)]) * width;
        const double* down = tmp.data() + static_cast<std::size_t>(idx[static_cast<std::size_t>(radius + k)]) * width;
        for (int x = 0; x < width; ++x) out[x] += w * (up[x] + down[x]);
      }
    }
  }
}

}  // namespace

Image apply_acuity_blur(const Image& img, double sigma, Exec exec) {
  require_valid(img, "apply_acuity_blur");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("blur sigma must be >= 0");
  if (sigma < kMinBlurSigma) return img;
  const auto half = gaussian_half_kernel(sigma);
  Image out(img.width(), img.height());
  std::vector<double> tmp(img.plane_size());
  for (int c = 0; c < Image::kChannels; ++c) {
    blur_plane(img.plane(c), out.plane(c), tmp, img.width(), img.height(), half,
               exec == Exec::parallel);
  }
  return out;
}

double contrast_threshold_value(double p_max, double contrast_sensitivity, double age_months,
                                double beta, double lambda) {
  if (!(p_max >= 0.0) || !(age_months >= 0.0) || !(beta >= 0.0)) {
    throw ConfigError("contrast_threshold_value: P_max, age and beta must be non-negative");
  }
  if (!(contrast_sensitivity >= 0.0 && contrast_sensitivity <= 1.0)) {
    throw ConfigError("contrast_threshold_value: contrast sensitivity must lie in [0,1]");
  }
  if (!(lambda > 0.0)) throw ConfigError("contrast_threshold_value: lambda must be > 0");
  const double periods = std::max(std::floor(age_months / lambda), 1.0);
  return p_max * (1.0 - contrast_sensitivity) * (1.0 / periods) * beta;
}

Image apply_contrast_limit(const Image& img, AgeMonths t, double contrast_sensitivity, double beta,
                           double lambda, Exec exec) {
  require_valid(img, "apply_contrast_limit");
  // Validates the parameters even on the shortcut path.
  contrast_threshold_value(0.0, contrast_sensitivity, t.months(), beta, lambda);
  if (contrast_sensitivity >= 1.0) return img;
  const SpectralImage spec = forward_transform(img, exec);
  const double threshold =
      contrast_threshold_value(max_power(spec), contrast_sensitivity, t.months(), beta, lambda);
  Image out = inverse_transform(apply_amplitude_threshold(spec, threshold), exec);
  clamp_unit(out);
  return out;
}

void LuminanceWeights::validate() const {
  if (r < 0.0 || g < 0.0 || b < 0.0 || std::abs(r + g + b - 1.0) > 1e-9) {
    throw ConfigError("luminance weights must be non-negative and sum to 1");
  }
}

namespace {

inline double luminance(double r, double g, double b, const LuminanceWeights& w) {
  return g + w.r * (r - g) + w.b * (b - g);
}

template <typename PixelFn>
Image map_pixels(const Image& img, Exec exec, PixelFn fn) {
  Image out(img.width(), img.height());
  const auto n = static_cast<std::ptrdiff_t>(img.plane_size());
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  auto ro = out.plane(0), go = out.plane(1), bo = out.plane(2);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    fn(r[k], g[k], b[k], ro[k], go[k], bo[k]);
  }
  return out;
}

}  // namespace

Image to_grayscale(const Image& img, const LuminanceWeights& w, Exec exec) {
  require_valid(img, "to_grayscale");
  w.validate();
  return map_pixels(img, exec, [&w](double r, double g, double b, double& ro, double& go, double& bo) {
    const double y = luminance(r, g, b, w);
    ro = y;
    go = y;
    bo = y;
  });
}

Image apply_chromatic_fidelity(const Image& img, double chromatic_sensitivity,
                               const LuminanceWeights& w, Exec exec) {
  require_valid(img, "apply_chromatic_fidelity");
  w.validate();
  const double s = chromatic_sensitivity;
  if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("chromatic sensitivity must lie in [0,1]");
  const double keep = 1.0 - s;
  return map_pixels(img, exec, [&w, s, keep](double r, double g, double b, double& ro, double& go,
                                             double& bo) {
    const double y = luminance(r, g, b, w);
    ro = keep * y + s * r;
    go = keep * y + s * g;
    bo = keep * y + s * b;
  });
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::acuity: return "acuity";
    case Stage::contrast: return "contrast";
    case Stage::chroma: return "chroma";
  }
  return "unknown";
}

Stage parse_stage(std::string_view name) {
  if (name == "acuity") return Stage::acuity;
  if (name == "contrast") return Stage::contrast;
  if (name == "chroma" || name == "chromatic") return Stage::chroma;
  throw ConfigError("unknown transform stage '" + std::string(name) +
                    "' (expected acuity, contrast or chroma)");
}

namespace {

std::string normalize_condition(std::string_view name) {
  std::string out;
  for (char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    if (ch == ' ' || ch == '+' || ch == '-' || ch == '_') {
      if (!out.empty() && out.back() != '_') out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

}  // namespace

std::vector<std::string> rearing_condition_names() {
  return {"all",           "acuity_chromatic", "acuity_contrast", "contrast_chromatic",
          "acuity_only",   "chromatic_only",   "contrast_only",   "baseline"};
}

ComponentFlags rearing_condition(std::string_view name) {
  const std::string n = normalize_condition(name);
  if (n == "all" || n == "all_three") return {true, true, true};
  if (n == "acuity_chromatic" || n == "acuity_chroma") return {true, false, true};
  if (n == "acuity_contrast") return {true, true, false};
  if (n == "contrast_chromatic" || n == "contrast_chroma") return {false, true, true};
  if (n == "acuity_only") return {true, false, false};
  if (n == "chromatic_only" || n == "chroma_only") return {false, false, true};
  if (n == "contrast_only") return {false, true, false};
  if (n == "baseline" || n == "none") return {false, false, false};
  std::string valid;
  for (const auto& v : rearing_condition_names()) valid += (valid.empty() ? "" : ", ") + v;
  throw ConfigError("unknown rearing condition '" + std::string(name) + "' (valid: " + valid + ")");
}

void DvdConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be > 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be > 0");
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != std::array<Stage, 3>{Stage::acuity, Stage::contrast, Stage::chroma}) {
    throw ConfigError("transform order must list acuity, contrast and chroma exactly once");
  }
  luminance.validate();
}

json DvdConfig::to_json() const {
  json order_json = json::array();
  for (Stage s : order) order_json.push_back(std::string(to_string(s)));
  return json{{"alpha", alpha},
              {"beta", beta},
              {"lambda", lambda},
              {"enable_acuity", enabled.acuity},
              {"enable_contrast", enabled.contrast},
              {"enable_chroma", enabled.chroma},
              {"seed", seed},
              {"order", std::move(order_json)},
              {"sigma_reference", sigma_reference == SigmaReference::width ? "width" : "min_dimension"},
              {"luminance", {luminance.r, luminance.g, luminance.b}}};
}

void DvdConfig::merge_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("DVD config must be a JSON object");
  try {
    if (doc.contains("alpha")) alpha = doc["alpha"].get<double>();
    if (doc.contains("beta")) beta = doc["beta"].get<double>();
    if (doc.contains("lambda")) lambda = doc["lambda"].get<double>();
    if (doc.contains("rearing")) enabled = rearing_condition(doc["rearing"].get<std::string>());
    if (doc.contains("enable_acuity")) enabled.acuity = doc["enable_acuity"].get<bool>();
    if (doc.contains("enable_contrast")) enabled.contrast = doc["enable_contrast"].get<bool>();
    if (doc.contains("enable_chroma")) enabled.chroma = doc["enable_chroma"].get<bool>();
    if (doc.contains("seed")) seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("order")) {
      const auto& o = doc["order"];
      if (!o.is_array() || o.size() != 3) throw ConfigError("order must list three stages");
      for (std::size_t i = 0; i < 3; ++i) order[i] = parse_stage(o[i].get<std::string>());
    }
    if (doc.contains("sigma_reference")) {
      const auto ref = doc["sigma_reference"].get<std::string>();
      if (ref == "width") {
        sigma_reference = SigmaReference::width;
      } else if (ref == "min_dimension") {
        sigma_reference = SigmaReference::min_dimension;
      } else {
        throw ConfigError("sigma_reference must be 'width' or 'min_dimension'");
      }
    }
    if (doc.contains("luminance")) {
      const auto& l = doc["luminance"];
      if (!l.is_array() || l.size() != 3) throw ConfigError("luminance must be [r, g, b]");
      luminance = {l[0].get<double>(), l[1].get<double>(), l[2].get<double>()};
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("DVD config: ") + e.what());
  }
}

DvdConfig DvdConfig::from_json_strict(const json& doc) {
  if (!doc.is_object()) throw ConfigError("DVD config must be a JSON object");
  for (const char* field : {"alpha", "beta", "lambda"}) {
    if (!doc.contains(field)) throw ConfigError(std::string("missing required field '") + field + "'");
    if (!doc[field].is_number()) throw ConfigError(std::string("field '") + field + "' must be a number");
  }
  DvdConfig cfg;
  cfg.merge_json(doc);
  cfg.validate();
  return cfg;
}

Image dvd_transform(const Image& img, AgeMonths t, const DvdConfig& cfg, const ScheduleSet& s,
                    Exec exec) {
  require_valid(img, "dvd_transform");
  cfg.validate();
  Image out = img;
  for (Stage stage : cfg.order) {
    switch (stage) {
      case Stage::acuity:
        if (cfg.enabled.acuity) {
          const double ref = cfg.sigma_reference == SigmaReference::width
                                 ? out.width()
                                 : std::min(out.width(), out.height());
          out = apply_acuity_blur(out, snellen_to_sigma(ref, s.acuity_at(t)), exec);
        }
        break;
      case Stage::contrast:
        if (cfg.enabled.contrast) {
          out = apply_contrast_limit(out, t, s.contrast_sensitivity_at(t), cfg.beta, cfg.lambda, exec);
        }
        break;
      case Stage::chroma:
        if (cfg.enabled.chroma) {
          out = apply_chromatic_fidelity(out, s.chromatic_sensitivity_at(t), cfg.luminance, exec);
        }
        break;
    }
  }
  clamp_unit(out);
  return out;
}

}  // namespace dvd
