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

#include "dvd/image_io.hpp"

#include <png.h>
// jpeglib.h needs size_t and FILE declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

namespace dvd {
namespace {

bool is_png(std::span<const std::uint8_t> b) {
  return b.size() >= 8 && png_sig_cmp(b.data(), 0, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

// ---------------------------------------------------------------- PNG

struct PngReadState {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_read_cb(png_structp png, png_bytep out, png_size_t len) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->offset + len > st->bytes.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, st->bytes.data() + st->offset, len);
  st->offset += len;
}

void png_error_cb(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err) *err = msg;
  png_longjmp(png, 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

// libpng and libjpeg report errors with longjmp. Everything touched between
// setjmp and a possible jump lives behind a heap pointer that is itself never
// reassigned, so no automatic variable is left indeterminate.
struct PngDecodeCtx {
  std::string err;
  PngReadState state;
  std::vector<std::uint8_t> raw;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int depth = 0;
};

Image decode_png(std::span<const std::uint8_t> bytes) {
  const auto ctx = std::make_unique<PngDecodeCtx>();
  ctx->state = PngReadState{bytes, 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx->err, png_error_cb, png_warning_cb);
  if (!png) throw ImageIoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw ImageIoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError("PNG decode failed: " + ctx->err);
  }
  png_set_read_fn(png, &ctx->state, png_read_cb);
  png_read_info(png, info);
  ctx->width = png_get_image_width(png, info);
  ctx->height = png_get_image_height(png, info);
  const int in_depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && in_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  if (in_depth == 16) png_set_swap(png);  // host little-endian 16-bit samples
  png_read_update_info(png, info);
  ctx->depth = png_get_bit_depth(png, info);
  const png_size_t rowbytes = png_get_rowbytes(png, info);
  if (ctx->width == 0 || ctx->height == 0 || ctx->width > (1u << 15) || ctx->height > (1u << 15)) {
    png_error(png, "unsupported PNG dimensions");
  }
  ctx->raw.resize(rowbytes * ctx->height);
  ctx->rows.resize(ctx->height);
  for (png_uint_32 y = 0; y < ctx->height; ++y) ctx->rows[y] = ctx->raw.data() + y * rowbytes;
  png_read_image(png, ctx->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(static_cast<int>(ctx->width), static_cast<int>(ctx->height));
  for (png_uint_32 y = 0; y < ctx->height; ++y) {
    for (png_uint_32 x = 0; x < ctx->width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double v;
        if (ctx->depth == 16) {
          std::uint16_t s;
          std::memcpy(&s, ctx->rows[y] + (x * 3 + c) * 2, 2);
          v = s / 65535.0;
        } else {
          v = ctx->rows[y][x * 3 + c] / 255.0;
        }
        img.at(c, static_cast<int>(y), static_cast<int>(x)) = v;
      }
    }
  }
  return img;
}

struct PngWriteState {
  std::vector<std::uint8_t>* out;
};

void png_write_cb(png_structp png, png_bytep data, png_size_t len) {
  auto* st = static_cast<PngWriteState*>(png_get_io_ptr(png));
  st->out->insert(st->out->end(), data, data + len);
}

void png_flush_cb(png_structp) {}

// ---------------------------------------------------------------- JPEG

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, mgr->message);
  std::longjmp(mgr->jump, 1);
}

void jpeg_silence(j_common_ptr, int) {}

struct JpegDecodeCtx {
  jpeg_decompress_struct cinfo{};
  JpegErrorMgr err{};
  std::vector<std::uint8_t> pixels;
};

Image decode_jpeg(std::span<const std::uint8_t> bytes) {
  const auto ctx = std::make_unique<JpegDecodeCtx>();
  jpeg_decompress_struct& cinfo = ctx->cinfo;
  cinfo.err = jpeg_std_error(&ctx->err.pub);
  ctx->err.pub.error_exit = jpeg_error_exit;
  ctx->err.pub.emit_message = jpeg_silence;
  if (setjmp(ctx->err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw ImageIoError(std::string("JPEG decode failed: ") + ctx->err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_decompress(&cinfo);
  ctx->pixels.resize(static_cast<std::size_t>(cinfo.output_width) * cinfo.output_height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = ctx->pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * cinfo.output_width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  const unsigned w = cinfo.output_width, h = cinfo.output_height;
  jpeg_destroy_decompress(&cinfo);

  Image img(static_cast<int>(w), static_cast<int>(h));
  for (unsigned y = 0; y < h; ++y) {
    for (unsigned x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        img.at(c, static_cast<int>(y), static_cast<int>(x)) =
            ctx->pixels[(static_cast<std::size_t>(y) * w + x) * 3 + c] / 255.0;
      }
    }
  }
  return img;
}

std::vector<std::uint8_t> interleave8(const Image& img) {
  std::vector<std::uint8_t> buf(img.plane_size() * 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        buf[(static_cast<std::size_t>(y) * img.width() + x) * 3 + c] = quantize8(img.at(c, y, x));
      }
    }
  }
  return buf;
}

struct JpegEncodeCtx {
  jpeg_compress_struct cinfo{};
  JpegErrorMgr err{};
  unsigned char* mem = nullptr;
  unsigned long mem_size = 0;
};

std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality) {
  const std::vector<std::uint8_t> pixels = interleave8(img);
  const auto ctx = std::make_unique<JpegEncodeCtx>();
  jpeg_compress_struct& cinfo = ctx->cinfo;
  cinfo.err = jpeg_std_error(&ctx->err.pub);
  ctx->err.pub.error_exit = jpeg_error_exit;
  ctx->err.pub.emit_message = jpeg_silence;
  if (setjmp(ctx->err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(ctx->mem);
    throw ImageIoError(std::string("JPEG encode failed: ") + ctx->err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &ctx->mem, &ctx->mem_size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(pixels.data() + static_cast<std::size_t>(cinfo.next_scanline) *
                                                         img.width() * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::vector<std::uint8_t> out(ctx->mem, ctx->mem + ctx->mem_size);
  std::free(ctx->mem);
  return out;
}

}  // namespace

std::uint8_t quantize8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

Image decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_jpeg(bytes)) return decode_jpeg(bytes);
  throw ImageIoError("unrecognised image format (expected PNG or JPEG)");
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw ImageIoError("read error on '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ImageIoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw ImageIoError("write error on '" + path.string() + "'");
}

Image read_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const ImageIoError& e) {
    throw ImageIoError(path.string() + ": " + e.what());
  }
}

namespace {

struct PngEncodeCtx {
  std::string err;
  std::vector<std::uint8_t> out;
  PngWriteState state;
  std::vector<png_bytep> rows;
};

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& img) {
  require_valid(img, "encode_png");
  const std::vector<std::uint8_t> pixels = interleave8(img);
  const auto ctx = std::make_unique<PngEncodeCtx>();
  ctx->state.out = &ctx->out;
  ctx->rows.resize(static_cast<std::size_t>(img.height()));
  for (int y = 0; y < img.height(); ++y) {
    ctx->rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * img.width() * 3);
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx->err, png_error_cb, png_warning_cb);
  if (!png) throw ImageIoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw ImageIoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ImageIoError("PNG encode failed: " + ctx->err);
  }
  png_set_write_fn(png, &ctx->state, png_write_cb, png_flush_cb);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()),
               8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_PAETH);
  png_write_info(png, info);
  png_write_image(png, ctx->rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return std::move(ctx->out);
}

void write_png(const std::filesystem::path& path, const Image& img) { write_file(path, encode_png(img)); }

Image jpeg_roundtrip(const Image& img, int quality) {
  require_valid(img, "jpeg_roundtrip");
  if (quality < 1 || quality > 100) throw ImageIoError("JPEG quality must be in [1, 100]");
  return decode_jpeg(encode_jpeg(img, quality));
}

}  // namespace dvd
