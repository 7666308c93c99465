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

#include <doctest.h>

#include <cmath>

#include "dvd/spectral.hpp"
#include "dvd/transforms.hpp"
#include "../support/fixtures.hpp"

using namespace dvd;

TEST_CASE("snellen_to_sigma is linear in width and MAR") {
  CHECK(snellen_to_sigma(100, 30) == 4.0);
  CHECK(snellen_to_sigma(224, 30) == doctest::Approx(8.96));
  CHECK(snellen_to_sigma(100, 1) == doctest::Approx(4.0 / 30.0));
  CHECK_THROWS_AS(snellen_to_sigma(0, 30), ConfigError);
  CHECK_THROWS_AS(snellen_to_sigma(100, 0.5), ConfigError);
}

TEST_CASE("gaussian kernel matches the normalised closed form") {
  for (double sigma : {0.3, 1.0, 2.5, 4.0}) {
    const auto half = gaussian_half_kernel(sigma);
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    REQUIRE(half.size() == static_cast<std::size_t>(r) + 1);
    double z = 0.0;
    for (int i = -r; i <= r; ++i) z += std::exp(-i * i / (2.0 * sigma * sigma));
    for (int i = 0; i <= r; ++i) {
      CHECK(half[i] == doctest::Approx(std::exp(-i * i / (2.0 * sigma * sigma)) / z).epsilon(1e-13));
    }
  }
}

TEST_CASE("blur impulse response is the separable kernel") {
  const double sigma = 1.5;
  Image img(31, 31, 0.0);
  img.at(1, 15, 15) = 1.0;
  const Image out = apply_acuity_blur(img, sigma);
  const auto half = gaussian_half_kernel(sigma);
  for (int dy = -4; dy <= 4; ++dy) {
    for (int dx = -4; dx <= 4; ++dx) {
      CHECK(out.at(1, 15 + dy, 15 + dx) ==
            doctest::Approx(half[std::abs(dy)] * half[std::abs(dx)]).epsilon(1e-12));
    }
  }
  CHECK(out.at(0, 15, 15) == 0.0);
}

TEST_CASE("blur: constants, tiny sigma, bad sigma") {
  const Image flat(20, 11, 0.4);
  const Image blurred = apply_acuity_blur(flat, 3.0);
  for (double v : blurred.values()) CHECK(v == doctest::Approx(0.4).epsilon(1e-14));
  const Image img = testing::random_image(2, 16, 16);
  CHECK(apply_acuity_blur(img, 0.01) == img);
  CHECK_THROWS_AS(apply_acuity_blur(img, -1.0), ConfigError);
}

TEST_CASE("contrast limit: C=1 identity, clamped, coefficient count grows with age") {
  const Image img = testing::synthetic_image(4, 32, 24);
  CHECK(apply_contrast_limit(img, AgeMonths(50), 1.0, 1e-4, 100) == img);
  const Image lim = apply_contrast_limit(img, AgeMonths(0), 0.0, 1e-2, 100);
  CHECK(in_unit_range(lim));
  CHECK(lim != img);
  const SpectralImage spec = forward_transform(img);
  const double p = max_power(spec);
  std::size_t prev = 0;
  for (double t : {0.0, 50.0, 100.0, 200.0, 300.0}) {
    const double c = t / 300.0;
    const std::size_t n =
        count_nonzero(apply_amplitude_threshold(spec, contrast_threshold_value(p, c, t, 4e-4, 100)));
    CHECK(n >= prev);
    prev = n;
  }
  CHECK_THROWS_AS(apply_contrast_limit(img, AgeMonths(1), 1.2, 1e-4, 100), ConfigError);
  CHECK_THROWS_AS(contrast_threshold_value(1, 0.5, 1, 1e-4, 0), ConfigError);
  CHECK_THROWS_AS(contrast_threshold_value(-1, 0.5, 1, 1e-4, 10), ConfigError);
}

TEST_CASE("threshold is floor-stepped in age") {
  const double a = contrast_threshold_value(1e6, 0.5, 100, 1e-4, 100);
  CHECK(contrast_threshold_value(1e6, 0.5, 199.9, 1e-4, 100) == a);
  CHECK(contrast_threshold_value(1e6, 0.5, 200, 1e-4, 100) == doctest::Approx(a / 2));
  CHECK(contrast_threshold_value(1e6, 0.5, 0, 1e-4, 100) == a);
}

TEST_CASE("chromatic fidelity endpoints and luminance") {
  const Image img = testing::random_image(3, 10, 10);
  CHECK(apply_chromatic_fidelity(img, 1.0) == img);
  const Image g = apply_chromatic_fidelity(img, 0.0);
  CHECK(g == to_grayscale(img));
  for (int y = 0; y < 10; ++y) {
    const double l = 0.299 * img.at(0, y, 3) + 0.587 * img.at(1, y, 3) + 0.114 * img.at(2, y, 3);
    CHECK(g.at(0, y, 3) == doctest::Approx(l).epsilon(1e-14));
    CHECK(g.at(0, y, 3) == g.at(2, y, 3));
  }
  CHECK_THROWS_AS(apply_chromatic_fidelity(img, -0.1), ConfigError);
  CHECK_THROWS_AS(to_grayscale(img, LuminanceWeights{0.5, 0.5, 0.5}), ConfigError);
}

TEST_CASE("serial and parallel kernels are bitwise equal") {
  const Image img = testing::synthetic_image(11, 97, 61);
  CHECK(apply_acuity_blur(img, 2.2, Exec::serial) == apply_acuity_blur(img, 2.2, Exec::parallel));
  CHECK(apply_contrast_limit(img, AgeMonths(30), 0.3, 2e-4, 50, Exec::serial) ==
        apply_contrast_limit(img, AgeMonths(30), 0.3, 2e-4, 50, Exec::parallel));
  CHECK(apply_chromatic_fidelity(img, 0.4, {}, Exec::serial) ==
        apply_chromatic_fidelity(img, 0.4, {}, Exec::parallel));
  const DvdConfig cfg;
  CHECK(dvd_transform(img, AgeMonths(12), cfg, ScheduleSet::defaults(), Exec::serial) ==
        dvd_transform(img, AgeMonths(12), cfg, ScheduleSet::defaults(), Exec::parallel));
}

TEST_CASE("rearing conditions") {
  CHECK(rearing_condition("all") == ComponentFlags{true, true, true});
  CHECK(rearing_condition("contrast_only") == ComponentFlags{false, true, false});
  CHECK(rearing_condition("acuity_chromatic") == ComponentFlags{true, false, true});
  CHECK(rearing_condition("baseline") == ComponentFlags{false, false, false});
  CHECK(rearing_condition_names().size() == 8);
  for (const auto& n : rearing_condition_names()) CHECK_NOTHROW(rearing_condition(n));
  CHECK_THROWS_WITH_AS(rearing_condition("acuity_and_friends"), doctest::Contains("valid"), ConfigError);
}

TEST_CASE("dvd_transform: disabled components, order, infant output") {
  const Image img = testing::synthetic_image(12, 48, 48);
  const ScheduleSet& s = ScheduleSet::defaults();
  DvdConfig none;
  none.enabled = rearing_condition("baseline");
  CHECK(dvd_transform(img, AgeMonths(0), none, s) == img);

  DvdConfig chroma_only;
  chroma_only.enabled = rearing_condition("chromatic_only");
  CHECK(dvd_transform(img, AgeMonths(0), chroma_only, s) == to_grayscale(img));

  DvdConfig cfg;
  const Image infant = dvd_transform(img, AgeMonths(0), cfg, s);
  CHECK(in_unit_range(infant));
  CHECK(max_abs_diff(infant, img) > 0.05);

  DvdConfig reversed = cfg;
  reversed.order = {Stage::chroma, Stage::contrast, Stage::acuity};
  CHECK(dvd_transform(img, AgeMonths(6), reversed, s) != dvd_transform(img, AgeMonths(6), cfg, s));
  reversed.order = {Stage::chroma, Stage::chroma, Stage::acuity};
  CHECK_THROWS_AS(dvd_transform(img, AgeMonths(6), reversed, s), ConfigError);
}

TEST_CASE("sigma reference dimension") {
  const Image wide = testing::synthetic_image(13, 96, 32);
  const ScheduleSet& s = ScheduleSet::defaults();
  DvdConfig cfg;
  cfg.enabled = rearing_condition("acuity_only");
  DvdConfig by_min = cfg;
  by_min.sigma_reference = SigmaReference::min_dimension;
  const double mar = s.acuity_at(AgeMonths(3));
  CHECK(dvd_transform(wide, AgeMonths(3), cfg, s) == apply_acuity_blur(wide, snellen_to_sigma(96, mar)));
  CHECK(dvd_transform(wide, AgeMonths(3), by_min, s) == apply_acuity_blur(wide, snellen_to_sigma(32, mar)));
}

TEST_CASE("config JSON") {
  DvdConfig cfg;
  cfg.merge_json({{"alpha", 4}, {"order", {"contrast", "acuity", "chroma"}}, {"enable_chroma", false}});
  CHECK(cfg.alpha == 4.0);
  CHECK(cfg.order[0] == Stage::contrast);
  CHECK_FALSE(cfg.enabled.chroma);
  DvdConfig back;
  back.merge_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());

  CHECK_THROWS_WITH_AS(DvdConfig::from_json_strict({{"alpha", 2}, {"lambda", 100}}), doctest::Contains("beta"),
                       ConfigError);
  CHECK_THROWS_AS(DvdConfig::from_json_strict({{"alpha", 2}, {"beta", 1e-4}, {"lambda", -1}}), ConfigError);
  CHECK_THROWS_AS(DvdConfig::from_json_strict({{"alpha", 2}, {"beta", "x"}, {"lambda", 1}}), ConfigError);
  DvdConfig bad;
  CHECK_THROWS_AS(bad.merge_json({{"sigma_reference", "height"}}), ConfigError);
}
