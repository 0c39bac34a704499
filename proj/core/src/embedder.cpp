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

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "mlsr/attention.hpp"
#include "mlsr/error.hpp"
#include "mlsr/heatmap.hpp"

namespace mlsr {
namespace {

constexpr int kGrid = kHeatmapSide;
constexpr int kStatistics = 8;

struct Span {
  int begin;
  int end;
};

Span block_span(int cell, int extent) {
  int begin = cell * extent / kGrid;
  int end = (cell + 1) * extent / kGrid;
  if (end <= begin) end = begin + 1;
  begin = std::min(begin, extent - 1);
  end = std::min(end, extent);
  return {begin, end};
}

// Per-pixel luminance: mean of the color channels, alpha excluded.
std::vector<double> luminance(const ImageBuffer& image) {
  const int color = image.channels() == 4 ? 3 : image.channels();
  std::vector<double> lum(static_cast<std::size_t>(image.width()) *
                          static_cast<std::size_t>(image.height()));
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      double s = 0.0;
      for (int c = 0; c < color; ++c) s += image.at(x, y, c);
      lum[static_cast<std::size_t>(y * image.width() + x)] = s / color;
    }
  }
  return lum;
}

// Eight statistic maps on the 32x32 block grid:
//   0 mean luminance, 1 luminance std-dev, 2 mean |d/dx|, 3 mean |d/dy|,
//   4..6 mean of the first three color channels, 7 darkness.
std::array<std::array<double, kGrid * kGrid>, kStatistics> block_statistics(
    const ImageBuffer& image) {
  const int w = image.width();
  const int h = image.height();
  const std::vector<double> lum = luminance(image);
  auto l = [&](int x, int y) {
    return lum[static_cast<std::size_t>(y * w + x)];
  };
  std::array<std::array<double, kGrid * kGrid>, kStatistics> stats{};
  for (int by = 0; by < kGrid; ++by) {
    const Span ys = block_span(by, h);
    for (int bx = 0; bx < kGrid; ++bx) {
      const Span xs = block_span(bx, w);
      double sum = 0, sum2 = 0, gx = 0, gy = 0;
      std::array<double, 3> color{};
      for (int y = ys.begin; y < ys.end; ++y) {
        for (int x = xs.begin; x < xs.end; ++x) {
          const double v = l(x, y);
          sum += v;
          sum2 += v * v;
          gx += std::abs(l(std::min(x + 1, w - 1), y) - v);
          gy += std::abs(l(x, std::min(y + 1, h - 1)) - v);
          for (int c = 0; c < 3; ++c) {
            color[static_cast<std::size_t>(c)] +=
                image.at(x, y, std::min(c, image.channels() - 1));
          }
        }
      }
      const double count = static_cast<double>(ys.end - ys.begin) *
                           static_cast<double>(xs.end - xs.begin);
      const double mean = sum / count;
      const auto cell = static_cast<std::size_t>(by * kGrid + bx);
      stats[0][cell] = mean;
      stats[1][cell] = std::sqrt(std::max(0.0, sum2 / count - mean * mean));
      stats[2][cell] = gx / count;
      stats[3][cell] = gy / count;
      stats[4][cell] = color[0] / count;
      stats[5][cell] = color[1] / count;
      stats[6][cell] = color[2] / count;
      stats[7][cell] = 1.0 - mean;
    }
  }
  return stats;
}

}  // namespace

Matrix stub_embedder(const ImageBuffer& image, int n, int dim) {
  if (image.empty() || image.width() <= 0 || image.height() <= 0) {
    throw InvalidInputError("stub embedder needs a non-empty image");
  }
  if (n < 1 || dim < 1) throw ShapeError("embedding shape must be positive");
  const auto stats = block_statistics(image);
  Matrix out(n, dim);
  for (int r = 0; r < n; ++r) {
    const auto& map = stats[static_cast<std::size_t>(r % kStatistics)];
    double mean = 0.0;
    for (double v : map) mean += v;
    mean /= map.size();
    double var = 0.0;
    for (double v : map) var += (v - mean) * (v - mean);
    const double scale = 1.0 / (std::sqrt(var / map.size()) + 1e-6);
    // Later rows reuse a statistic with a sharper gain.
    const double gain = 2.0 * (1.0 + r / kStatistics);
    for (int j = 0; j < dim; ++j) {
      const double z = (map[static_cast<std::size_t>(j % (kGrid * kGrid))] - mean) * scale;
      out(r, j) = gain * z;
    }
  }
  return out;
}

}  // namespace mlsr
