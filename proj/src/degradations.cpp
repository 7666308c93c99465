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

#include "dvd/degradations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dvd/embedded_data.hpp"
#include "dvd/hashing.hpp"
#include "dvd/image_io.hpp"
#include "dvd/rng.hpp"
#include "dvd/transforms.hpp"

namespace dvd {
namespace {

constexpr std::array<std::string_view, kNumCorruptionKinds> kKindNames = {
    "gaussian_noise", "shot_noise",    "impulse_noise", "speckle_noise",
    "motion_blur",    "zoom_blur",     "gaussian_blur", "defocus_blur",
    "rain",           "icy_window",    "drizzle",       "snow",
    "pixelate",       "jpeg_compression", "pixel_dropout", "wave_distortion"};

constexpr std::array<std::size_t, kNumCorruptionKinds> kParamCounts = {1, 1, 1, 1, 2, 3, 1, 2,
                                                                     4, 3, 4, 7, 1, 1, 1, 2};

constexpr std::array<std::string_view, 3> kAttackNames = {"l2_gaussian", "l2_uniform",
                                                          "salt_and_pepper"};

// Independent random streams within one (image, kind) seed.
enum Stream : std::uint64_t { kPixels = 1, kGlobal = 2, kTexture = 3 };

std::string joined_kind_names() {
  std::string s;
  for (auto n : kKindNames) {
    if (!s.empty()) s += ", ";
    s += n;
  }
  return s;
}

int reflect(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

Image clamped(Image img) {
  clamp_unit(img);
  return img;
}

// Bilinear sample with replicated edges.
double sample(const Image& img, int c, double fy, double fx) {
  const int w = img.width(), h = img.height();
  const double y0f = std::floor(fy), x0f = std::floor(fx);
  const double ty = fy - y0f, tx = fx - x0f;
  const int y0 = static_cast<int>(y0f), x0 = static_cast<int>(x0f);
  const int ya = clamp_index(y0, h), yb = clamp_index(y0 + 1, h);
  const int xa = clamp_index(x0, w), xb = clamp_index(x0 + 1, w);
  const double top = img.at(c, ya, xa) + tx * (img.at(c, ya, xb) - img.at(c, ya, xa));
  const double bot = img.at(c, yb, xa) + tx * (img.at(c, yb, xb) - img.at(c, yb, xa));
  return top + ty * (bot - top);
}

// Magnification about the image centre; the enlarged image is cropped back
// to the original frame.
Image zoom_centre(const Image& img, double zoom) {
  if (zoom == 1.0) return img;
  Image out(img.width(), img.height());
  const double cy = img.height() / 2.0, cx = img.width() / 2.0;
  for (int c = 0; c < Image::kChannels; ++c) {
    for (int y = 0; y < img.height(); ++y) {
      const double sy = cy + (y + 0.5 - cy) / zoom - 0.5;
      for (int x = 0; x < img.width(); ++x) {
        out.at(c, y, x) = sample(img, c, sy, cx + (x + 0.5 - cx) / zoom - 0.5);
      }
    }
  }
  return out;
}

// Weighted sum of copies shifted along a direction, one-sided Gaussian
// weights, replicated borders.
Image motion_blur(const Image& img, double radius, double sigma, double angle_deg) {
  const int r = std::max(0, static_cast<int>(std::lround(radius)));
  const int width = 2 * r + 1;
  if (width == 1 || sigma <= 0.0) return img;
  std::vector<double> k(static_cast<std::size_t>(width));
  double total = 0.0;
  for (int i = 0; i < width; ++i) {
    k[static_cast<std::size_t>(i)] = std::exp(-static_cast<double>(i) * i / (2.0 * sigma * sigma));
    total += k[static_cast<std::size_t>(i)];
  }
  for (double& v : k) v /= total;
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const double py = std::sin(rad), px = std::cos(rad);

  Image out(img.width(), img.height(), 0.0);
  for (int i = 0; i < width; ++i) {
    const int dy = -static_cast<int>(std::ceil(i * py - 0.5));
    const int dx = -static_cast<int>(std::ceil(i * px - 0.5));
    if (std::abs(dy) >= img.height() || std::abs(dx) >= img.width()) break;
    const double wt = k[static_cast<std::size_t>(i)];
    for (int c = 0; c < Image::kChannels; ++c) {
      for (int y = 0; y < img.height(); ++y) {
        const int sy = clamp_index(y - dy, img.height());
        for (int x = 0; x < img.width(); ++x) {
          out.at(c, y, x) += wt * img.at(c, sy, clamp_index(x - dx, img.width()));
        }
      }
    }
  }
  return out;
}

// Full 2-D convolution with half-sample symmetric borders.
Image convolve2d(const Image& img, const std::vector<double>& kernel, int radius) {
  const int size = 2 * radius + 1;
  Image out(img.width(), img.height());
  for (int c = 0; c < Image::kChannels; ++c) {
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        double acc = 0.0;
        for (int j = -radius; j <= radius; ++j) {
          const int sy = reflect(y + j, img.height());
          for (int i = -radius; i <= radius; ++i) {
            acc += kernel[static_cast<std::size_t>((j + radius) * size + i + radius)] *
                   img.at(c, sy, reflect(x + i, img.width()));
          }
        }
        out.at(c, y, x) = acc;
      }
    }
  }
  return out;
}

// Pixel-coverage disk (8x8 supersampled) softened by a small Gaussian.
Image defocus(const Image& img, double radius, double alias_sigma) {
  const int ga = alias_sigma >= kMinBlurSigma ? static_cast<int>(std::ceil(3.0 * alias_sigma)) : 0;
  const int R = static_cast<int>(std::ceil(radius + 0.5)) + ga;
  const int size = 2 * R + 1;
  std::vector<double> disk(static_cast<std::size_t>(size * size), 0.0);
  constexpr int kSub = 8;
  for (int j = -R; j <= R; ++j) {
    for (int i = -R; i <= R; ++i) {
      int inside = 0;
      for (int sj = 0; sj < kSub; ++sj) {
        for (int si = 0; si < kSub; ++si) {
          const double yy = j - 0.5 + (sj + 0.5) / kSub;
          const double xx = i - 0.5 + (si + 0.5) / kSub;
          if (xx * xx + yy * yy <= radius * radius) ++inside;
        }
      }
      disk[static_cast<std::size_t>((j + R) * size + i + R)] = inside;
    }
  }
  disk[static_cast<std::size_t>(R * size + R)] = std::max(disk[static_cast<std::size_t>(R * size + R)], 1.0);

  std::vector<double> kernel = disk;
  if (ga > 0) {
    const auto half = gaussian_half_kernel(alias_sigma);
    std::vector<double> tmp(kernel.size(), 0.0);
    for (int pass = 0; pass < 2; ++pass) {
      std::fill(tmp.begin(), tmp.end(), 0.0);
      for (int j = 0; j < size; ++j) {
        for (int i = 0; i < size; ++i) {
          double acc = 0.0;
          for (int k = -ga; k <= ga; ++k) {
            const int jj = pass == 0 ? j : j + k;
            const int ii = pass == 0 ? i + k : i;
            if (jj < 0 || jj >= size || ii < 0 || ii >= size) continue;
            acc += half[static_cast<std::size_t>(std::abs(k))] * kernel[static_cast<std::size_t>(jj * size + ii)];
          }
          tmp[static_cast<std::size_t>(j * size + i)] = acc;
        }
      }
      kernel.swap(tmp);
    }
  }
  double total = 0.0;
  for (double v : kernel) total += v;
  for (double& v : kernel) v /= total;
  return convolve2d(img, kernel, R);
}

// Streak mask in [0,1]. Drop i always consumes the same three draws, so a
// longer ladder step only ever adds drops to a shorter one.
std::vector<double> streak_mask(int w, int h, std::size_t drops, double length, double angle_deg,
                                PhiloxStream& rng) {
  std::vector<double> mask(static_cast<std::size_t>(w) * h, 0.0);
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const double dx = std::sin(rad), dy = std::cos(rad);
  const int steps = std::max(1, static_cast<int>(std::ceil(length * 2.0)));
  for (std::size_t d = 0; d < drops; ++d) {
    const double x0 = rng.uniform(0.0, w);
    const double y0 = rng.uniform(0.0, h);
    const double strength = 0.7 + 0.3 * rng.uniform();
    for (int s = 0; s <= steps; ++s) {
      const double t = length * s / steps;
      const int x = static_cast<int>(std::floor(x0 + t * dx));
      const int y = static_cast<int>(std::floor(y0 + t * dy));
      if (x < 0 || x >= w || y < 0 || y >= h) continue;
      double& m = mask[static_cast<std::size_t>(y) * w + x];
      m = std::max(m, strength);
    }
  }
  return mask;
}

Image plane_image(const std::vector<double>& plane, int w, int h) {
  Image img(w, h);
  for (int c = 0; c < Image::kChannels; ++c) std::copy(plane.begin(), plane.end(), img.plane(c).begin());
  return img;
}

std::size_t drop_count(double per_10k, int w, int h) {
  return static_cast<std::size_t>(std::llround(per_10k * w * h / 1e4));
}

double luma601(const Image& img, int y, int x) {
  return 0.299 * img.at(0, y, x) + 0.587 * img.at(1, y, x) + 0.114 * img.at(2, y, x);
}

// -------------------------------------------------------------------------

Image gaussian_noise(const Image& img, double sd, std::uint64_t seed) {
  PhiloxStream rng(seed, kPixels);
  Image out = img;
  for (double& v : out.values()) v += sd * rng.normal();
  return clamped(std::move(out));
}

Image shot_noise(const Image& img, double photons, std::uint64_t seed) {
  PhiloxStream rng(seed, kPixels);
  Image out = img;
  for (double& v : out.values()) v = static_cast<double>(rng.poisson(v * photons)) / photons;
  return clamped(std::move(out));
}

Image impulse_noise(const Image& img, double amount, std::uint64_t seed) {
  PhiloxStream rng(seed, kPixels);
  Image out = img;
  for (double& v : out.values()) {
    const double hit = rng.uniform();
    const double salt = rng.uniform();
    if (hit < amount) v = salt < 0.5 ? 1.0 : 0.0;
  }
  return out;
}

Image speckle_noise(const Image& img, double sd, std::uint64_t seed) {
  PhiloxStream rng(seed, kPixels);
  Image out = img;
  for (double& v : out.values()) v += v * sd * rng.normal();
  return clamped(std::move(out));
}

Image zoom_blur(const Image& img, double first, double step, int count) {
  Image acc = img;
  for (int i = 0; i < count; ++i) {
    const Image z = zoom_centre(img, first + step * i);
    auto a = acc.values();
    auto b = z.values();
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
  }
  for (double& v : acc.values()) v /= (count + 1);
  return clamped(std::move(acc));
}

Image rain(const Image& img, const std::vector<double>& p, double scale, std::uint64_t seed) {
  const int w = img.width(), h = img.height();
  PhiloxStream global(seed, kGlobal);
  const double angle = global.uniform(-20.0, 20.0);
  PhiloxStream drops(seed, kPixels);
  const auto mask = streak_mask(w, h, drop_count(p[0], w, h), p[1] * std::min(w, h), angle, drops);
  const Image soft = apply_acuity_blur(plane_image(mask, w, h), 0.5 * std::max(scale, 1.0), Exec::serial);
  const double alpha = p[2], dim = p[3];
  Image out(w, h);
  for (int c = 0; c < Image::kChannels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double m = alpha * soft.at(0, y, x);
        out.at(c, y, x) = (1.0 - m) * (1.0 - dim) * img.at(c, y, x) + m * 0.85;
      }
    }
  }
  return clamped(std::move(out));
}

Image icy_window(const Image& img, const std::vector<double>& p, double scale, std::uint64_t seed) {
  const int w = img.width(), h = img.height();
  const double coverage = p[0], opacity = p[1], blur = p[2] * scale;
  PhiloxStream noise(seed, kPixels);
  std::vector<double> white(img.plane_size());
  for (double& v : white) v = noise.normal();
  const Image field = apply_acuity_blur(plane_image(white, w, h), 0.05 * std::min(w, h), Exec::serial);
  PhiloxStream grain(seed, kTexture);
  for (double& v : white) v = grain.normal();
  const Image crystals = apply_acuity_blur(plane_image(white, w, h), 0.7, Exec::serial);

  auto f = field.plane(0);
  std::vector<double> sorted(f.begin(), f.end());
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::floor((1.0 - coverage) * (sorted.size() - 1)));
  const double threshold = sorted[rank];
  double mean = 0.0, sq = 0.0;
  for (double v : sorted) mean += v;
  mean /= sorted.size();
  for (double v : sorted) sq += (v - mean) * (v - mean);
  const double edge = std::max(0.5 * std::sqrt(sq / sorted.size()), 1e-12);

  const Image base = apply_acuity_blur(img, blur, Exec::serial);
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = opacity * clamp01((field.at(0, y, x) - threshold) / edge + 0.5);
      const double ice = clamp01(0.82 + 0.25 * crystals.at(0, y, x));
      for (int c = 0; c < Image::kChannels; ++c) {
        out.at(c, y, x) = (1.0 - m) * base.at(c, y, x) + m * ice;
      }
    }
  }
  return clamped(std::move(out));
}

Image drizzle(const Image& img, const std::vector<double>& p, double scale, std::uint64_t seed) {
  const int w = img.width(), h = img.height();
  PhiloxStream global(seed, kGlobal);
  const double angle = global.uniform(-10.0, 10.0);
  PhiloxStream drops(seed, kPixels);
  const auto mask = streak_mask(w, h, drop_count(p[0], w, h), p[1] * std::min(w, h), angle, drops);
  const double alpha = p[2];
  const Image hazy = apply_acuity_blur(img, p[3] * scale, Exec::serial);
  Image out(w, h);
  for (int c = 0; c < Image::kChannels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double m = alpha * mask[static_cast<std::size_t>(y) * w + x];
        const double v = (1.0 - m) * hazy.at(c, y, x) + m * 0.8;
        out.at(c, y, x) = (1.0 - 0.25 * alpha) * v + 0.25 * alpha * 0.7;
      }
    }
  }
  return clamped(std::move(out));
}

Image snow(const Image& img, const std::vector<double>& p, double scale, std::uint64_t seed) {
  const int w = img.width(), h = img.height();
  const double loc = p[0], spread = p[1], zoom = p[2], threshold = p[3];
  const double radius = p[4] * scale, sigma = p[5] * scale, blend = p[6];
  PhiloxStream noise(seed, kPixels);
  std::vector<double> layer(img.plane_size());
  for (double& v : layer) v = loc + spread * noise.normal();
  Image flakes = zoom_centre(plane_image(layer, w, h), zoom);
  for (double& v : flakes.values()) v = v < threshold ? 0.0 : clamp01(v);
  PhiloxStream global(seed, kGlobal);
  flakes = motion_blur(flakes, radius, sigma, global.uniform(-135.0, -45.0));

  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double lifted = luma601(img, y, x) * 1.5 + 0.5;
      const double s = flakes.at(0, y, x) + flakes.at(0, h - 1 - y, w - 1 - x);
      for (int c = 0; c < Image::kChannels; ++c) {
        const double v = img.at(c, y, x);
        out.at(c, y, x) = blend * v + (1.0 - blend) * std::max(v, lifted) + s;
      }
    }
  }
  return clamped(std::move(out));
}

Image pixelate(const Image& img, double factor) {
  const int sw = std::max(1, static_cast<int>(img.width() * factor));
  const int sh = std::max(1, static_cast<int>(img.height() * factor));
  // Box filter both ways.
  return resize_area(resize_area(img, sw, sh), img.width(), img.height());
}

Image pixel_dropout(const Image& img, double fraction, std::uint64_t seed) {
  PhiloxStream rng(seed, kPixels);
  Image out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (rng.uniform() < fraction) {
        for (int c = 0; c < Image::kChannels; ++c) out.at(c, y, x) = 0.0;
      }
    }
  }
  return out;
}

Image wave_distortion(const Image& img, double amplitude_frac, double period_frac, std::uint64_t seed) {
  const double side = std::min(img.width(), img.height());
  const double amp = amplitude_frac * side;
  const double k = 2.0 * std::numbers::pi / (period_frac * side);
  PhiloxStream global(seed, kGlobal);
  const double phase_x = global.uniform(0.0, 2.0 * std::numbers::pi);
  const double phase_y = global.uniform(0.0, 2.0 * std::numbers::pi);
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double sx = x + amp * std::sin(k * y + phase_x);
      const double sy = y + amp * std::sin(k * x + phase_y);
      for (int c = 0; c < Image::kChannels; ++c) out.at(c, y, x) = sample(img, c, sy, sx);
    }
  }
  return clamped(std::move(out));
}

}  // namespace

std::string_view to_string(CorruptionKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

CorruptionKind parse_corruption_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<CorruptionKind>(i);
  }
  throw CorruptionError("unknown corruption kind '" + std::string(name) +
                        "'; valid kinds: " + joined_kind_names());
}

const std::array<CorruptionKind, kNumCorruptionKinds>& all_corruption_kinds() {
  static const auto kinds = [] {
    std::array<CorruptionKind, kNumCorruptionKinds> a{};
    for (int i = 0; i < kNumCorruptionKinds; ++i) a[static_cast<std::size_t>(i)] = static_cast<CorruptionKind>(i);
    return a;
  }();
  return kinds;
}

void CorruptionSpec::validate() const {
  const int k = static_cast<int>(kind);
  if (k < 0 || k >= kNumCorruptionKinds) throw CorruptionError("corruption kind out of range");
  if (severity < 1 || severity > kNumSeverities) {
    throw CorruptionError("severity must be in 1..5, got " + std::to_string(severity));
  }
}

std::string_view to_string(AttackKind k) { return kAttackNames[static_cast<std::size_t>(k)]; }

AttackKind parse_attack_kind(std::string_view name) {
  for (std::size_t i = 0; i < kAttackNames.size(); ++i) {
    if (kAttackNames[i] == name) return static_cast<AttackKind>(i);
  }
  throw CorruptionError("unknown attack '" + std::string(name) +
                        "'; valid attacks: l2_gaussian, l2_uniform, salt_and_pepper");
}

// -------------------------------------------------------------------------

const CorruptionTable& CorruptionTable::builtin() {
  static const CorruptionTable table = from_json(nlohmann::json::parse(embedded::corruptions_json()));
  return table;
}

CorruptionTable CorruptionTable::from_json(const nlohmann::json& doc) {
  CorruptionTable t;
  try {
    t.version_ = doc.at("version").get<std::string>();
    t.reference_size_px_ = doc.at("reference_size_px").get<double>();
    if (!(t.reference_size_px_ > 0.0)) throw CorruptionError("reference_size_px must be > 0");
    const auto& kinds = doc.at("kinds");
    for (CorruptionKind kind : all_corruption_kinds()) {
      const std::string name(to_string(kind));
      if (!kinds.contains(name)) throw CorruptionError("corruption table is missing kind '" + name + "'");
      const auto& sev = kinds.at(name).at("severities");
      if (!sev.is_array() || sev.size() != kNumSeverities) {
        throw CorruptionError("kind '" + name + "' needs exactly 5 severities");
      }
      auto& slot = t.params_[kind];
      for (std::size_t s = 0; s < kNumSeverities; ++s) {
        slot[s] = sev[s].get<std::vector<double>>();
        if (slot[s].size() != kParamCounts[static_cast<std::size_t>(kind)]) {
          throw CorruptionError("kind '" + name + "' severity " + std::to_string(s + 1) +
                                " has the wrong number of parameters");
        }
      }
    }
    const auto& attacks = doc.at("attacks");
    t.attack_amplitudes_ = attacks.at("amplitudes").get<std::vector<double>>();
    t.amplitude_scale_ = attacks.at("amplitude_scale").get<double>();
    t.sp_fraction_ = attacks.at("salt_and_pepper_fraction_per_amplitude").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError(std::string("malformed corruption table: ") + e.what());
  }
  return t;
}

const std::vector<double>& CorruptionTable::params(CorruptionKind kind, int severity) const {
  CorruptionSpec{kind, severity}.validate();
  return params_.at(kind)[static_cast<std::size_t>(severity - 1)];
}

void CorruptionTable::validate(const NoiseAttackSpec& spec) const {
  if (std::find(attack_amplitudes_.begin(), attack_amplitudes_.end(), spec.amplitude) ==
      attack_amplitudes_.end()) {
    std::string list;
    for (double a : attack_amplitudes_) list += (list.empty() ? "" : ", ") + std::to_string(static_cast<int>(a));
    throw CorruptionError("attack amplitude must be one of {" + list + "}");
  }
}

std::uint64_t derive_corruption_seed(std::uint64_t seed, std::string_view image_id,
                                     std::string_view kind_name) {
  return hash64(seed, image_id, kind_name);
}

Image corrupt(const Image& img, const CorruptionSpec& spec, std::uint64_t seed,
              const CorruptionTable& table) {
  spec.validate();
  require_valid(img, "corrupt");
  const auto& p = table.params(spec.kind, spec.severity);
  const double scale = std::min(img.width(), img.height()) / table.reference_size_px();
  switch (spec.kind) {
    case CorruptionKind::gaussian_noise: return gaussian_noise(img, p[0], seed);
    case CorruptionKind::shot_noise: return shot_noise(img, p[0], seed);
    case CorruptionKind::impulse_noise: return impulse_noise(img, p[0], seed);
    case CorruptionKind::speckle_noise: return speckle_noise(img, p[0], seed);
    case CorruptionKind::motion_blur: {
      PhiloxStream global(seed, kGlobal);
      return clamped(motion_blur(img, p[0] * scale, p[1] * scale, global.uniform(-45.0, 45.0)));
    }
    case CorruptionKind::zoom_blur: return zoom_blur(img, p[0], p[1], static_cast<int>(p[2]));
    case CorruptionKind::gaussian_blur: return clamped(apply_acuity_blur(img, p[0] * scale, Exec::serial));
    case CorruptionKind::defocus_blur: return clamped(defocus(img, p[0] * scale, p[1] * scale));
    case CorruptionKind::rain: return rain(img, p, scale, seed);
    case CorruptionKind::icy_window: return icy_window(img, p, scale, seed);
    case CorruptionKind::drizzle: return drizzle(img, p, scale, seed);
    case CorruptionKind::snow: return snow(img, p, scale, seed);
    case CorruptionKind::pixelate: return pixelate(img, p[0]);
    case CorruptionKind::jpeg_compression: return jpeg_roundtrip(img, static_cast<int>(p[0]));
    case CorruptionKind::pixel_dropout: return pixel_dropout(img, p[0], seed);
    case CorruptionKind::wave_distortion: return wave_distortion(img, p[0], p[1], seed);
  }
  throw CorruptionError("unhandled corruption kind");
}

std::vector<double> attack_perturbation(const Image& img, const NoiseAttackSpec& spec,
                                        const CorruptionTable& table) {
  table.validate(spec);
  require_valid(img, "attack_perturbation");
  if (spec.kind == AttackKind::salt_and_pepper) return {};
  PhiloxStream rng(spec.seed, kPixels);
  std::vector<double> delta(img.values().size());
  for (double& v : delta) v = spec.kind == AttackKind::l2_gaussian ? rng.normal() : rng.uniform(-1.0, 1.0);
  double sq = 0.0;
  for (double v : delta) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0)) throw CorruptionError("degenerate perturbation direction");
  const double target = spec.amplitude / table.amplitude_scale();
  for (double& v : delta) v *= target / norm;
  return delta;
}

Image perturb(const Image& img, const NoiseAttackSpec& spec, const CorruptionTable& table) {
  if (spec.kind != AttackKind::salt_and_pepper) {
    const auto delta = attack_perturbation(img, spec, table);
    Image out = img;
    auto v = out.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += delta[i];
    return clamped(std::move(out));
  }
  table.validate(spec);
  require_valid(img, "perturb");
  const double fraction = spec.amplitude * table.salt_pepper_fraction_per_amplitude();
  PhiloxStream rng(spec.seed, kPixels);
  Image out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double hit = rng.uniform();
      const double salt = rng.uniform();
      if (hit < fraction) {
        for (int c = 0; c < Image::kChannels; ++c) out.at(c, y, x) = salt < 0.5 ? 1.0 : 0.0;
      }
    }
  }
  return out;
}

}  // namespace dvd
