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

#include "mlsr/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlsr/error.hpp"

namespace mlsr {
namespace {

constexpr double kNormalizationTolerance = 1e-6;

void softmax_into(std::span<const double> logits, std::span<double> out) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    sum += out[i];
  }
  const double inv = 1.0 / sum;
  for (double& v : out) v *= inv;
}

Point2 expectation(std::span<const double> map) {
  Point2 p;
  for (int row = 0; row < kHeatmapSide; ++row) {
    for (int col = 0; col < kHeatmapSide; ++col) {
      const double w = map[static_cast<std::size_t>(row * kHeatmapSide + col)];
      const Point2 c = heatmap_cell_center(row, col);
      p.x += w * c.x;
      p.y += w * c.y;
    }
  }
  return p;
}

}  // namespace

ExtractedPoints embeddings_to_points(const Matrix& embedding) {
  if (embedding.cols() != kHeatmapCells) {
    throw ShapeError("embedding rows must have " +
                     std::to_string(kHeatmapCells) + " entries, got " +
                     std::to_string(embedding.cols()));
  }
  if (embedding.rows() < 1) throw ShapeError("embedding has no rows");
  if (!embedding.allFinite()) {
    throw InvalidInputError("embedding contains non-finite values");
  }
  const auto n = static_cast<std::size_t>(embedding.rows());
  ExtractedPoints out{std::vector<Point2>(n), HeatmapStack(n)};
  for (std::size_t r = 0; r < n; ++r) {
    const std::span<const double> logits(embedding.row(static_cast<Eigen::Index>(r)).data(),
                                         kHeatmapCells);
    auto map = out.heatmaps.channel(r);
    softmax_into(logits, map);
    out.points[r] = expectation(map);
  }
  return out;
}

Point2 soft_argmax(std::span<const double> map) {
  if (map.size() != static_cast<std::size_t>(kHeatmapCells)) {
    throw ShapeError("heatmap must have " + std::to_string(kHeatmapCells) +
                     " cells, got " + std::to_string(map.size()));
  }
  double sum = 0.0;
  for (double v : map) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidInputError("heatmap entries must be finite and nonnegative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    throw InvalidInputError("heatmap is not normalized (sum " +
                            std::to_string(sum) + ")");
  }
  return expectation(map);
}

std::vector<double> render_gaussian(Point2 p, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidInputError("gaussian sigma must be positive");
  }
  if (!is_finite(p)) throw InvalidInputError("gaussian center is not finite");
  std::vector<double> map(kHeatmapCells);
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  double sum = 0.0;
  for (int row = 0; row < kHeatmapSide; ++row) {
    for (int col = 0; col < kHeatmapSide; ++col) {
      const double v =
          std::exp(-squared_norm(heatmap_cell_center(row, col) - p) * inv_two_var);
      map[static_cast<std::size_t>(row * kHeatmapSide + col)] = v;
      sum += v;
    }
  }
  if (!(sum > 0.0)) {
    throw InvalidInputError("gaussian underflows on the heatmap grid");
  }
  for (double& v : map) v /= sum;
  return map;
}

double spreading_loss(std::span<const Point2> points, const SpreadConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw ConfigurationError("tau must be positive");
  double loss = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double gap = cfg.tau - distance(points[i], points[j]);
      if (gap > 0.0) loss += gap * gap;
    }
  }
  return loss;
}

}  // namespace mlsr
