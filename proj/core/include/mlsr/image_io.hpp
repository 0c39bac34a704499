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

#ifndef MLSR_IMAGE_IO_HPP_
#define MLSR_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mlsr/image.hpp"

namespace mlsr {

struct DecodedImage {
  ImageBuffer image;
  int bit_depth = 8;  // 8 or 16
};

// PNG codec. Palette and low-bit-depth inputs are expanded; grayscale+alpha
// is widened to RGBA. Decode failures throw FormatError, file access
// failures throw IoError.
DecodedImage decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const ImageBuffer& image,
                                     int bit_depth = 8);

DecodedImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageBuffer& image,
               int bit_depth = 8);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

}  // namespace mlsr

#endif  // MLSR_IMAGE_IO_HPP_
