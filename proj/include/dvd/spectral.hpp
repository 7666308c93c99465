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

// 2-D discrete Fourier machinery for the contrast-sensitivity transform.
//
// Convention: the forward transform is unnormalised, the inverse divides by
// H*W. Coefficients are stored in standard DFT order (DC at index 0, no
// fftshift), row-major per channel.

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dvd/image.hpp"

namespace dvd {

inline constexpr const char* kDftConvention = "forward unnormalized, inverse 1/(H*W), no fftshift";

class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The inverse transform left an imaginary residual above tolerance.
class NumericalIntegrityError : public SpectralError {
 public:
  using SpectralError::SpectralError;
};

struct SpectralImage {
  int width = 0;
  int height = 0;
  std::array<std::vector<std::complex<double>>, Image::kChannels> channels;

  std::complex<double>& at(int c, int ky, int kx) {
    return channels[static_cast<std::size_t>(c)][static_cast<std::size_t>(ky) * width + kx];
  }
  std::complex<double> at(int c, int ky, int kx) const {
    return channels[static_cast<std::size_t>(c)][static_cast<std::size_t>(ky) * width + kx];
  }
};

inline constexpr double kImaginaryResidualTolerance = 1e-4;

SpectralImage forward_transform(const Image& img, Exec exec = Exec::parallel);

/// Real part of the inverse transform. No clamping.
/// Throws NumericalIntegrityError if any |imag| exceeds 1e-4.
Image inverse_transform(const SpectralImage& spec, Exec exec = Exec::parallel);

/// Largest squared magnitude over all channels and frequencies.
double max_power(const SpectralImage& spec);

/// The single comparison deciding whether a coefficient survives a threshold:
/// squared magnitude (power) against the threshold, survivors satisfy
/// |X|^2 >= T.
inline bool survives_threshold(std::complex<double> coeff, double threshold) {
  return std::norm(coeff) >= threshold;
}

/// Zeroes every non-DC coefficient whose power is below the threshold; the
/// DC term of each channel is always kept.
SpectralImage apply_amplitude_threshold(const SpectralImage& spec, double threshold);

/// Number of coefficients (all channels) that are non-zero.
std::size_t count_nonzero(const SpectralImage& spec);

inline constexpr int kReferenceDftMaxSide = 64;

/// Direct double-sum DFT with the same convention as forward_transform.
/// O((HW)^2); rejects images larger than 64x64.
SpectralImage reference_dft(const Image& img);

}  // namespace dvd
