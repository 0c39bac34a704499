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

#include "mlsr/warp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "mlsr/error.hpp"
#include "mlsr/parallel.hpp"

namespace mlsr {
namespace {

void check_same_size(int w1, int h1, int w2, int h2, const char* what) {
  if (w1 != w2 || h1 != h2) {
    throw ShapeError(std::string(what) + ": " + std::to_string(w1) + "x" +
                     std::to_string(h1) + " vs " + std::to_string(w2) + "x" +
                     std::to_string(h2));
  }
}

// Clamp-to-edge pixel coordinate; NaN collapses onto the first sample.
double clamp_coord(double u, int extent) {
  if (!(u > 0.0)) return 0.0;
  const double hi = extent - 1;
  return u < hi ? u : hi;
}

}  // namespace

FlowField::FlowField(int width, int height)
    : FlowField(width, height,
                std::vector<Point2>(static_cast<std::size_t>(width > 0 ? width : 0) *
                                    static_cast<std::size_t>(height > 0 ? height : 0))) {}

FlowField::FlowField(int width, int height, std::vector<Point2> map)
    : width_(width), height_(height), map_(std::move(map)) {
  if (width <= 0 || height <= 0) {
    throw InvalidInputError("flow dimensions must be positive");
  }
  if (map_.size() !=
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ShapeError("flow map size does not match its dimensions");
  }
  for (const Point2& p : map_) {
    if (!is_finite(p)) throw InvalidInputError("flow contains non-finite entries");
  }
}

FlowField FlowField::identity(int width, int height) {
  FlowField f(width, height);
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      f.at(col, row) = pixel_center(col, row, width, height);
    }
  }
  return f;
}

FlowField dense_flow(const PairedPointSet& pairs, const MlsConfig& cfg,
                     int width, int height,
                     const std::optional<TransformMatrix>& external_m,
                     const ParallelOptions& par) {
  cfg.validate();
  if (width <= 0 || height <= 0) {
    throw InvalidInputError("flow dimensions must be positive");
  }
  if (cfg.mode == TransformMode::kExternal && !external_m) {
    throw ConfigurationError("external mode requires a transform matrix");
  }
  if (external_m && !external_m->is_finite()) {
    throw InvalidInputError("external transform has non-finite entries");
  }
  const TransformMatrix* ext = external_m ? &*external_m : nullptr;
  FlowField flow(width, height);
  parallel_for_rows(height, resolve_thread_count(par.threads),
                    [&](int begin, int end) {
                      std::vector<double> scratch(pairs.size());
                      for (int row = begin; row < end; ++row) {
                        for (int col = 0; col < width; ++col) {
                          flow.at(col, row) = detail::motion_at(
                              pixel_center(col, row, width, height), pairs, cfg,
                              ext, scratch);
                        }
                      }
                    });
  return flow;
}

FlowField blend_background(const FlowField& fg_flow, const MaskBuffer& fg_mask) {
  check_same_size(fg_flow.width(), fg_flow.height(), fg_mask.width(),
                  fg_mask.height(), "foreground mask does not match flow");
  const int w = fg_flow.width();
  const int h = fg_flow.height();
  FlowField out(w, h);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const double m = fg_mask.at(col, row);
      const Point2 id = pixel_center(col, row, w, h);
      const Point2 f = fg_flow.at(col, row);
      out.at(col, row) = {m * f.x + (1.0 - m) * id.x, m * f.y + (1.0 - m) * id.y};
    }
  }
  return out;
}

float sample_bilinear(const ImageBuffer& image, Point2 p, int channel) {
  const int w = image.width();
  const int h = image.height();
  const double u = clamp_coord(p.x * w - 0.5, w);
  const double v = clamp_coord(p.y * h - 0.5, h);
  const int x0 = static_cast<int>(u);
  const int y0 = static_cast<int>(v);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = u - x0;
  const double fy = v - y0;
  const double top = (1.0 - fx) * image.at(x0, y0, channel) +
                     fx * image.at(x1, y0, channel);
  const double bottom = (1.0 - fx) * image.at(x0, y1, channel) +
                        fx * image.at(x1, y1, channel);
  return static_cast<float>((1.0 - fy) * top + fy * bottom);
}

ImageBuffer backward_warp(const ImageBuffer& source, const FlowField& flow,
                          const ParallelOptions& par) {
  if (source.empty()) throw InvalidInputError("cannot warp an empty image");
  const int w = flow.width();
  const int h = flow.height();
  const int channels = source.channels();
  ImageBuffer out(w, h, channels);
  parallel_for_rows(h, resolve_thread_count(par.threads), [&](int begin, int end) {
    for (int row = begin; row < end; ++row) {
      for (int col = 0; col < w; ++col) {
        const Point2 p = flow.at(col, row);
        for (int c = 0; c < channels; ++c) {
          out.set(col, row, c, sample_bilinear(source, p, c));
        }
      }
    }
  });
  return out;
}

ImageBuffer apply_occlusion(const ImageBuffer& warped, const MaskBuffer& mask,
                            const ImageBuffer& fill) {
  check_same_size(warped.width(), warped.height(), mask.width(), mask.height(),
                  "occlusion mask does not match image");
  check_same_size(warped.width(), warped.height(), fill.width(), fill.height(),
                  "fill image does not match image");
  if (fill.channels() != warped.channels()) {
    throw ShapeError("fill image has " + std::to_string(fill.channels()) +
                     " channels, warped image has " +
                     std::to_string(warped.channels()));
  }
  ImageBuffer out = warped;
  for (int y = 0; y < warped.height(); ++y) {
    for (int x = 0; x < warped.width(); ++x) {
      const float m = mask.at(x, y);
      for (int c = 0; c < warped.channels(); ++c) {
        out.set(x, y, c, m * warped.at(x, y, c) + (1.0f - m) * fill.at(x, y, c));
      }
    }
  }
  return out;
}

ImageBuffer apply_occlusion(const ImageBuffer& warped, const MaskBuffer& mask,
                            std::span<const float> fill_color) {
  const auto channels = static_cast<std::size_t>(warped.channels());
  if (fill_color.size() != 1 && fill_color.size() != channels) {
    throw ShapeError("fill color needs 1 or " + std::to_string(channels) +
                     " components, got " + std::to_string(fill_color.size()));
  }
  ImageBuffer fill(warped.width(), warped.height(), warped.channels());
  for (int y = 0; y < warped.height(); ++y) {
    for (int x = 0; x < warped.width(); ++x) {
      for (int c = 0; c < warped.channels(); ++c) {
        fill.set(x, y, c, fill_color[fill_color.size() == 1 ? 0 : static_cast<std::size_t>(c)]);
      }
    }
  }
  return apply_occlusion(warped, mask, fill);
}

FlowStats flow_stats(const FlowField& flow) {
  FlowStats s;
  s.min_x = s.min_y = std::numeric_limits<double>::infinity();
  s.max_x = s.max_y = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int row = 0; row < flow.height(); ++row) {
    for (int col = 0; col < flow.width(); ++col) {
      const Point2 p = flow.at(col, row);
      s.min_x = std::min(s.min_x, p.x);
      s.max_x = std::max(s.max_x, p.x);
      s.min_y = std::min(s.min_y, p.y);
      s.max_y = std::max(s.max_y, p.y);
      const double d =
          distance(p, pixel_center(col, row, flow.width(), flow.height()));
      sum += d;
      s.max_displacement = std::max(s.max_displacement, d);
    }
  }
  s.mean_displacement =
      sum / (static_cast<double>(flow.width()) * flow.height());
  return s;
}

double mean_endpoint_error(const FlowField& a, const FlowField& b) {
  check_same_size(a.width(), a.height(), b.width(), b.height(),
                  "flow fields differ in size");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    sum += distance(a.values()[i], b.values()[i]);
  }
  return sum / static_cast<double>(a.values().size());
}

double max_endpoint_error(const FlowField& a, const FlowField& b) {
  check_same_size(a.width(), a.height(), b.width(), b.height(),
                  "flow fields differ in size");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    worst = std::max(worst, distance(a.values()[i], b.values()[i]));
  }
  return worst;
}

FlowField downsample_flow(const FlowField& flow, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw InvalidInputError("downsampled size must be positive");
  }
  FlowField out(width, height);
  for (int row = 0; row < height; ++row) {
    const int src_row = std::min(flow.height() - 1, row * flow.height() / height +
                                                        flow.height() / (2 * height));
    for (int col = 0; col < width; ++col) {
      const int src_col = std::min(flow.width() - 1, col * flow.width() / width +
                                                         flow.width() / (2 * width));
      out.at(col, row) = flow.at(src_col, src_row);
    }
  }
  return out;
}

}  // namespace mlsr
