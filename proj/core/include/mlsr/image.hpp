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

#ifndef MLSR_IMAGE_HPP_
#define MLSR_IMAGE_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace mlsr {

// Interleaved H x W x C float image with values in [0,1]. Channel count is
// 1, 3 or 4. Values are clamped (NaN to 0) when the buffer is built.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, float fill = 0.0f);
  ImageBuffer(int width, int height, int channels, std::vector<float> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }

  float at(int x, int y, int c) const {
    return data_[index(x, y, c)];
  }
  // Writes are clamped to [0,1].
  void set(int x, int y, int c, float v);

  std::span<const float> pixels() const noexcept { return data_; }
  std::span<float> mutable_pixels() noexcept { return data_; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

// Single-channel [0,1] weights modulating an image of the same size.
class MaskBuffer {
 public:
  MaskBuffer() = default;
  MaskBuffer(int width, int height, float fill);
  MaskBuffer(int width, int height, std::vector<float> data);

  // First channel of an image.
  static MaskBuffer from_image(const ImageBuffer& image);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  float at(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(x)];
  }
  std::span<const float> values() const noexcept { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

}  // namespace mlsr

#endif  // MLSR_IMAGE_HPP_
