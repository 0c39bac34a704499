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

#ifndef MLSR_HEATMAP_HPP_
#define MLSR_HEATMAP_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "mlsr/geometry.hpp"
#include "mlsr/matrix.hpp"

namespace mlsr {

inline constexpr int kHeatmapSide = 32;
inline constexpr int kHeatmapCells = kHeatmapSide * kHeatmapSide;

// Center of heatmap cell (row, col) in normalized coordinates.
constexpr Point2 heatmap_cell_center(int row, int col) {
  return {(col + 0.5) / kHeatmapSide, (row + 0.5) / kHeatmapSide};
}

// N channels of 32x32 nonnegative maps, each summing to one.
class HeatmapStack {
 public:
  HeatmapStack() = default;
  explicit HeatmapStack(std::size_t channels)
      : channels_(channels), values_(channels * kHeatmapCells, 0.0) {}

  std::size_t channels() const noexcept { return channels_; }
  std::span<const double> channel(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * kHeatmapCells,
                                                    kHeatmapCells);
  }
  std::span<double> channel(std::size_t i) {
    return std::span<double>(values_).subspan(i * kHeatmapCells,
                                              kHeatmapCells);
  }

 private:
  std::size_t channels_ = 0;
  std::vector<double> values_;
};

struct ExtractedPoints {
  std::vector<Point2> points;
  HeatmapStack heatmaps;
};

/// Reshapes each 1024-wide row to 32x32, applies a softmax over the cells and
/// reduces the resulting heatmap to its spatial mean.
ExtractedPoints embeddings_to_points(const Matrix& embedding);

/// Spatial expectation of a normalized 32x32 map over cell centers.
Point2 soft_argmax(std::span<const double> map);

inline constexpr double kDefaultGaussianSigma = 0.1;

/// Isotropic Gaussian at p sampled on cell centers, normalized to sum 1.
std::vector<double> render_gaussian(Point2 p,
                                    double sigma = kDefaultGaussianSigma);

struct SpreadConfig {
  double tau = 0.1;
};

/// Squared hinge on pairwise distances: sum_{i<j} max(0, tau - |p_i - p_j|)^2.
double spreading_loss(std::span<const Point2> points,
                      const SpreadConfig& cfg = {});

}  // namespace mlsr

#endif  // MLSR_HEATMAP_HPP_
