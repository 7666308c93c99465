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

#include "dvd/hashing.hpp"
#include "dvd/image.hpp"
#include "dvd/rng.hpp"
#include "../support/fixtures.hpp"

using namespace dvd;

TEST_CASE("image stores planar channels and validates range") {
  Image img(3, 2, 0.25);
  CHECK(img.plane_size() == 6);
  img.at(2, 1, 2) = 0.75;
  CHECK(img.plane(2)[5] == 0.75);
  CHECK(in_unit_range(img));
  img.at(0, 0, 0) = 1.5;
  CHECK_FALSE(in_unit_range(img));
  // Out-of-range but finite values are legal intermediates.
  CHECK_NOTHROW(require_valid(img, "t"));
  clamp_unit(img);
  CHECK(img.at(0, 0, 0) == 1.0);
  img.at(0, 0, 1) = std::nan("");
  CHECK_THROWS_AS(require_valid(img, "t"), ImageError);
  CHECK_THROWS_AS(require_valid(Image(), "t"), ImageError);
}

TEST_CASE("psnr and max_abs_diff") {
  const Image a(4, 4, 0.5);
  Image b = a;
  CHECK(std::isinf(psnr(a, b)));
  for (double& v : b.values()) v += 0.1;
  CHECK(max_abs_diff(a, b) == doctest::Approx(0.1));
  CHECK(psnr(a, b) == doctest::Approx(20.0));
  CHECK_THROWS(psnr(a, Image(3, 4)));
}

TEST_CASE("resize_area preserves means and constants") {
  const Image img = testing::random_image(3, 40, 30);
  const Image down = resize_area(img, 20, 15);
  CHECK(mean_value(down) == doctest::Approx(mean_value(img)).epsilon(1e-12));
  const Image odd = resize_area(img, 13, 7);
  CHECK(mean_value(odd) == doctest::Approx(mean_value(img)).epsilon(1e-12));
  const Image flat(17, 9, 0.3);
  const Image up = resize_area(flat, 40, 5);
  for (double v : up.values()) CHECK(v == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex(std::string_view("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex(std::string_view("")) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("hash64 separates fields") {
  CHECK(hash64(1, "ab", "c") != hash64(1, "a", "bc"));
  CHECK(hash64(1, "a", "b") != hash64(2, "a", "b"));
  CHECK(hash64(1, "a", "b") == hash64(1, "a", "b"));
}

TEST_CASE("philox4x32-10 known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("philox streams: reproducible, independent, sane moments") {
  PhiloxStream a(42, 1), b(42, 1), c(42, 2);
  bool differ = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a.next_u32();
    CHECK(x == b.next_u32());
    differ = differ || x != c.next_u32();
  }
  CHECK(differ);

  PhiloxStream r(7, 0);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, sp = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK_MESSAGE((u >= 0.0 && u < 1.0), "uniform out of range");
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
    sp += static_cast<double>(r.poisson(3.5));
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sn / n == doctest::Approx(0.0).scale(1.0).epsilon(0.01));
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(sp / n == doctest::Approx(3.5).epsilon(0.01));
  for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7);
}
