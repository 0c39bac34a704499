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

#include "mlsr/image.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "mlsr/error.hpp"

namespace mlsr {
namespace {

float clamp_unit(float v) {
  if (!(v > 0.0f)) return 0.0f;  // also maps NaN to 0
  return v < 1.0f ? v : 1.0f;
}

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw InvalidInputError("image dimensions must be positive, got " +
                            std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, int channels, float fill)
    : ImageBuffer(width, height, channels,
                  std::vector<float>(static_cast<std::size_t>(width > 0 ? width : 0) *
                                         static_cast<std::size_t>(height > 0 ? height : 0) *
                                         static_cast<std::size_t>(channels > 0 ? channels : 0),
                                     fill)) {}

ImageBuffer::ImageBuffer(int width, int height, int channels,
                         std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_dims(width, height);
  if (channels != 1 && channels != 3 && channels != 4) {
    throw InvalidInputError("channel count must be 1, 3 or 4, got " +
                            std::to_string(channels));
  }
  if (data_.size() != static_cast<std::size_t>(width) *
                          static_cast<std::size_t>(height) *
                          static_cast<std::size_t>(channels)) {
    throw ShapeError("pixel buffer size does not match " + std::to_string(width) +
                     "x" + std::to_string(height) + "x" +
                     std::to_string(channels));
  }
  for (float& v : data_) v = clamp_unit(v);
}

void ImageBuffer::set(int x, int y, int c, float v) {
  data_[index(x, y, c)] = clamp_unit(v);
}

MaskBuffer::MaskBuffer(int width, int height, float fill)
    : MaskBuffer(width, height,
                 std::vector<float>(static_cast<std::size_t>(width > 0 ? width : 0) *
                                        static_cast<std::size_t>(height > 0 ? height : 0),
                                    fill)) {}

MaskBuffer::MaskBuffer(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() !=
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ShapeError("mask buffer size does not match its dimensions");
  }
  for (float& v : data_) v = clamp_unit(v);
}

MaskBuffer MaskBuffer::from_image(const ImageBuffer& image) {
  std::vector<float> data(static_cast<std::size_t>(image.width()) *
                          static_cast<std::size_t>(image.height()));
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      data[static_cast<std::size_t>(y * image.width() + x)] = image.at(x, y, 0);
    }
  }
  return MaskBuffer(image.width(), image.height(), std::move(data));
}

}  // namespace mlsr
