// Copyright 2026 The mlsreenact Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mlsr/image_io.hpp"

#include <png.h>

#include <bit>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>

#include "mlsr/error.hpp"

namespace mlsr {
namespace {

constexpr std::size_t kMessageSize = 256;

struct ErrorSink {
  char message[kMessageSize] = {0};
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, kMessageSize, "%s", msg);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct MemoryReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t len) {
  auto* r = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (len > r->size - r->pos) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, r->data + r->pos, len);
  r->pos += len;
}

void write_to_memory(png_structp png, png_bytep in, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + len);
}

void flush_noop(png_structp) {}

struct RawImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> bytes;  // native-endian samples
  std::vector<png_bytep> rows;
};

// Only trivially destructible locals live in this frame: png_longjmp returns
// here without unwinding.
bool decode_raw(const std::uint8_t* data, std::size_t size, RawImage* out,
                ErrorSink* sink) {
  MemoryReader reader{data, size, 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, sink,
                                           on_png_error, on_png_warning);
  if (png == nullptr) {
    std::snprintf(sink->message, kMessageSize, "out of memory");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &reader, read_from_memory);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  png_set_expand(png);
  if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (png_get_bit_depth(png, info) == 16 &&
      std::endian::native == std::endian::little) {
    png_set_swap(png);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->channels = png_get_channels(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  if (out->width == 0 || out->height == 0 || out->width > (1u << 15) ||
      out->height > (1u << 15)) {
    png_error(png, "unsupported image dimensions");
  }
  if (out->channels != 1 && out->channels != 3 && out->channels != 4) {
    png_error(png, "unsupported channel layout");
  }
  const std::size_t stride = png_get_rowbytes(png, info);
  out->bytes.resize(stride * out->height);
  out->rows.resize(out->height);
  for (std::uint32_t y = 0; y < out->height; ++y) {
    out->rows[y] = out->bytes.data() + stride * y;
  }
  png_read_image(png, out->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode_raw(std::uint32_t width, std::uint32_t height, int color_type,
                int bit_depth, png_bytep* rows, std::vector<std::uint8_t>* out,
                ErrorSink* sink) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, sink,
                                            on_png_error, on_png_warning);
  if (png == nullptr) {
    std::snprintf(sink->message, kMessageSize, "out of memory");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, write_to_memory, flush_noop);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, width, height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

DecodedImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw FormatError("png", "data is not a PNG image");
  }
  RawImage raw;
  ErrorSink sink;
  if (!decode_raw(bytes.data(), bytes.size(), &raw, &sink)) {
    throw FormatError("png", sink.message);
  }
  const std::size_t samples = static_cast<std::size_t>(raw.width) * raw.height *
                              static_cast<std::size_t>(raw.channels);
  std::vector<float> pixels(samples);
  if (raw.bit_depth == 16) {
    for (std::size_t i = 0; i < samples; ++i) {
      std::uint16_t v;
      std::memcpy(&v, raw.bytes.data() + 2 * i, 2);
      pixels[i] = static_cast<float>(v / 65535.0);
    }
  } else {
    for (std::size_t i = 0; i < samples; ++i) {
      pixels[i] = static_cast<float>(raw.bytes[i] / 255.0);
    }
  }
  return {ImageBuffer(static_cast<int>(raw.width), static_cast<int>(raw.height),
                      raw.channels, std::move(pixels)),
          raw.bit_depth == 16 ? 16 : 8};
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& image, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw InvalidInputError("PNG bit depth must be 8 or 16");
  }
  if (image.empty()) throw InvalidInputError("cannot encode an empty image");
  const int color_type = image.channels() == 1   ? PNG_COLOR_TYPE_GRAY
                         : image.channels() == 3 ? PNG_COLOR_TYPE_RGB
                                                 : PNG_COLOR_TYPE_RGBA;
  const auto w = static_cast<std::size_t>(image.width());
  const auto h = static_cast<std::size_t>(image.height());
  const auto c = static_cast<std::size_t>(image.channels());
  const std::size_t bytes_per_sample = bit_depth == 16 ? 2 : 1;
  std::vector<std::uint8_t> buffer(w * h * c * bytes_per_sample);
  const auto pixels = image.pixels();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (bit_depth == 16) {
      const auto v = static_cast<std::uint16_t>(std::lround(pixels[i] * 65535.0));
      buffer[2 * i] = static_cast<std::uint8_t>(v >> 8);  // PNG is big-endian
      buffer[2 * i + 1] = static_cast<std::uint8_t>(v & 0xff);
    } else {
      buffer[i] = static_cast<std::uint8_t>(std::lround(pixels[i] * 255.0));
    }
  }
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) {
    rows[y] = buffer.data() + y * w * c * bytes_per_sample;
  }
  std::vector<std::uint8_t> out;
  ErrorSink sink;
  if (!encode_raw(static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h),
                  color_type, bit_depth, rows.data(), &out, &sink)) {
    throw FormatError("png", sink.message);
  }
  return out;
}

DecodedImage read_png(const std::filesystem::path& path) {
  return decode_png(read_file_bytes(path));
}

void write_png(const std::filesystem::path& path, const ImageBuffer& image,
               int bit_depth) {
  write_file_bytes(path, encode_png(image, bit_depth));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

}  // namespace mlsr
