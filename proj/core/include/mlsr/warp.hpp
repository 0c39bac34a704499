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

#ifndef MLSR_WARP_HPP_
#define MLSR_WARP_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mlsr/geometry.hpp"
#include "mlsr/image.hpp"
#include "mlsr/mls.hpp"

namespace mlsr {

// Normalized center of pixel (col, row) on a width x height grid.
constexpr Point2 pixel_center(int col, int row, int width, int height) {
  return {(col + 0.5) / width, (row + 0.5) / height};
}

// Backward map: for every driving-frame pixel, the normalized source-frame
// coordinate to sample.
class FlowField {
 public:
  FlowField() = default;
  FlowField(int width, int height);
  FlowField(int width, int height, std::vector<Point2> map);

  static FlowField identity(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Point2 at(int col, int row) const { return map_[offset(col, row)]; }
  Point2& at(int col, int row) { return map_[offset(col, row)]; }
  std::span<const Point2> values() const noexcept { return map_; }

  friend bool operator==(const FlowField&, const FlowField&) = default;

 private:
  std::size_t offset(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Point2> map_;
};

struct ParallelOptions {
  // 0 selects resolve_thread_count().
  int threads = 0;
};

/// motion_at evaluated at every pixel center. Rows are evaluated
/// independently, so the result is bit-identical for any thread count.
FlowField dense_flow(const PairedPointSet& pairs, const MlsConfig& cfg,
                     int width, int height,
                     const std::optional<TransformMatrix>& external_m =
                         std::nullopt,
                     const ParallelOptions& par = {});

/// mask * fg + (1 - mask) * identity.
FlowField blend_background(const FlowField& fg_flow, const MaskBuffer& fg_mask);

/// Bilinear sample of `source` at flow(x) for every output pixel, clamping to
/// the border. Output size is the flow size.
ImageBuffer backward_warp(const ImageBuffer& source, const FlowField& flow,
                          const ParallelOptions& par = {});

/// Bilinear sample of one channel at a normalized coordinate, clamp-to-edge.
float sample_bilinear(const ImageBuffer& image, Point2 p, int channel);

/// mask * warped + (1 - mask) * fill.
ImageBuffer apply_occlusion(const ImageBuffer& warped, const MaskBuffer& mask,
                            const ImageBuffer& fill);
// Constant fill color; a single value is broadcast to every channel.
ImageBuffer apply_occlusion(const ImageBuffer& warped, const MaskBuffer& mask,
                            std::span<const float> fill_color);

// Displacement |flow(x) - x| statistics plus the coordinate bounding box.
struct FlowStats {
  double min_x = 0.0;
  double max_x = 0.0;
  double min_y = 0.0;
  double max_y = 0.0;
  double mean_displacement = 0.0;
  double max_displacement = 0.0;
};

FlowStats flow_stats(const FlowField& flow);

/// Mean over pixels of |a(x) - b(x)|.
double mean_endpoint_error(const FlowField& a, const FlowField& b);
double max_endpoint_error(const FlowField& a, const FlowField& b);

// Nearest-neighbour resample of a flow onto a coarser grid (visualization).
FlowField downsample_flow(const FlowField& flow, int width, int height);

}  // namespace mlsr

#endif  // MLSR_WARP_HPP_
