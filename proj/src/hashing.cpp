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

#include "dvd/hashing.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace dvd {
namespace {

std::array<unsigned char, 32> digest(const void* data, std::size_t size) {
  std::array<unsigned char, 32> md{};
  unsigned int len = 0;
  if (EVP_Digest(data, size, md.data(), &len, EVP_sha256(), nullptr) != 1 || len != md.size()) {
    throw std::runtime_error("sha256 digest failed");
  }
  return md;
}

std::string to_hex(const std::array<unsigned char, 32>& md) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(64, '0');
  for (std::size_t i = 0; i < md.size(); ++i) {
    out[2 * i] = kHex[md[i] >> 4];
    out[2 * i + 1] = kHex[md[i] & 0xf];
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  return to_hex(digest(bytes.data(), bytes.size()));
}

std::string sha256_hex(std::string_view text) { return to_hex(digest(text.data(), text.size())); }

std::uint64_t hash64(std::uint64_t seed, std::string_view a, std::string_view b) {
  std::string buf = std::to_string(seed);
  buf.push_back('\x1f');
  buf.append(a);
  buf.push_back('\x1f');
  buf.append(b);
  const auto md = digest(buf.data(), buf.size());
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | md[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace dvd
