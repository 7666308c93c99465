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

#include "dvd/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace dvd {
namespace {

using cplx = std::complex<double>;

// 1-D plans keyed by (length, sign). FFTW planning is not thread-safe, so
// creation is serialised; execution through fftw_execute_dft on other arrays
// is. Plans are FFTW_UNALIGNED so any buffer may be used and the chosen
// codelets never depend on alignment.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, int sign) {
    std::lock_guard lock(mu_);
    auto it = plans_.find({n, sign});
    if (it != plans_.end()) return it->second;
    std::vector<cplx> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(a.data()),
                                   reinterpret_cast<fftw_complex*>(b.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw SpectralError("FFTW failed to create a plan of length " + std::to_string(n));
    plans_.emplace(std::pair{n, sign}, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void run(fftw_plan p, cplx* in, cplx* out) {
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in), reinterpret_cast<fftw_complex*>(out));
}

// In-place 2-D transform of one row-major plane: rows, then columns.
void transform_plane(std::vector<cplx>& data, int width, int height, int sign, Exec exec) {
  fftw_plan row_plan = plan_cache().get(width, sign);
  fftw_plan col_plan = plan_cache().get(height, sign);
  const bool par = exec == Exec::parallel;

#pragma omp parallel if (par)
  {
    std::vector<cplx> in(static_cast<std::size_t>(std::max(width, height)));
    std::vector<cplx> out(in.size());
#pragma omp for schedule(static)
    for (int y = 0; y < height; ++y) {
      cplx* row = data.data() + static_cast<std::size_t>(y) * width;
      std::copy(row, row + width, in.begin());
      run(row_plan, in.data(), out.data());
      std::copy(out.begin(), out.begin() + width, row);
    }
#pragma omp for schedule(static)
    for (int x = 0; x < width; ++x) {
      for (int y = 0; y < height; ++y) in[static_cast<std::size_t>(y)] = data[static_cast<std::size_t>(y) * width + x];
      run(col_plan, in.data(), out.data());
      for (int y = 0; y < height; ++y) data[static_cast<std::size_t>(y) * width + x] = out[static_cast<std::size_t>(y)];
    }
  }
}

}  // namespace

SpectralImage forward_transform(const Image& img, Exec exec) {
  require_valid(img, "forward_transform");
  SpectralImage spec{img.width(), img.height(), {}};
  for (int c = 0; c < Image::kChannels; ++c) {
    auto plane = img.plane(c);
    auto& coeffs = spec.channels[static_cast<std::size_t>(c)];
    coeffs.assign(plane.begin(), plane.end());
    transform_plane(coeffs, img.width(), img.height(), FFTW_FORWARD, exec);
  }
  return spec;
}

Image inverse_transform(const SpectralImage& spec, Exec exec) {
  if (spec.width <= 0 || spec.height <= 0) throw SpectralError("inverse_transform: empty spectrum");
  const std::size_t n = static_cast<std::size_t>(spec.width) * static_cast<std::size_t>(spec.height);
  for (const auto& ch : spec.channels) {
    if (ch.size() != n) throw SpectralError("inverse_transform: channel size does not match dimensions");
  }
  Image out(spec.width, spec.height);
  const double scale = 1.0 / static_cast<double>(n);
  double worst_imag = 0.0;
  for (int c = 0; c < Image::kChannels; ++c) {
    std::vector<cplx> work = spec.channels[static_cast<std::size_t>(c)];
    transform_plane(work, spec.width, spec.height, FFTW_BACKWARD, exec);
    auto plane = out.plane(c);
    for (std::size_t i = 0; i < n; ++i) {
      plane[i] = work[i].real() * scale;
      worst_imag = std::max(worst_imag, std::abs(work[i].imag() * scale));
    }
  }
  if (worst_imag > kImaginaryResidualTolerance) {
    throw NumericalIntegrityError("inverse_transform: imaginary residual " + std::to_string(worst_imag) +
                                  " exceeds tolerance; spectrum is not Hermitian");
  }
  return out;
}

double max_power(const SpectralImage& spec) {
  double best = 0.0;
  for (const auto& ch : spec.channels) {
    for (const auto& v : ch) best = std::max(best, std::norm(v));
  }
  return best;
}

SpectralImage apply_amplitude_threshold(const SpectralImage& spec, double threshold) {
  if (!(threshold >= 0.0)) throw SpectralError("threshold must be non-negative");
  SpectralImage out = spec;
  for (auto& ch : out.channels) {
    for (std::size_t i = 1; i < ch.size(); ++i) {
      if (!survives_threshold(ch[i], threshold)) ch[i] = cplx(0.0, 0.0);
    }
  }
  return out;
}

std::size_t count_nonzero(const SpectralImage& spec) {
  std::size_t n = 0;
  for (const auto& ch : spec.channels) {
    n += static_cast<std::size_t>(std::count_if(ch.begin(), ch.end(), [](cplx v) { return v != cplx(0.0, 0.0); }));
  }
  return n;
}

SpectralImage reference_dft(const Image& img) {
  require_valid(img, "reference_dft");
  if (img.width() > kReferenceDftMaxSide || img.height() > kReferenceDftMaxSide) {
    throw SpectralError("reference_dft: image exceeds 64x64 oracle limit");
  }
  const int w = img.width(), h = img.height();
  SpectralImage spec{w, h, {}};
  const double two_pi = 2.0 * std::numbers::pi;
  for (int c = 0; c < Image::kChannels; ++c) {
    auto& coeffs = spec.channels[static_cast<std::size_t>(c)];
    coeffs.assign(static_cast<std::size_t>(w) * h, cplx(0.0, 0.0));
    for (int ky = 0; ky < h; ++ky) {
      for (int kx = 0; kx < w; ++kx) {
        cplx acc(0.0, 0.0);
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            // Reduce the phase index modulo N before scaling to keep the
            // angle small and accurate.
            const long py = (static_cast<long>(ky) * y) % h;
            const long px = (static_cast<long>(kx) * x) % w;
            const double angle = -two_pi * (static_cast<double>(py) / h + static_cast<double>(px) / w);
            acc += img.at(c, y, x) * cplx(std::cos(angle), std::sin(angle));
          }
        }
        coeffs[static_cast<std::size_t>(ky) * w + kx] = acc;
      }
    }
  }
  return spec;
}

}  // namespace dvd
