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

#ifndef MLSR_GEOMETRY_HPP_
#define MLSR_GEOMETRY_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mlsr {

// Normalized image coordinate: origin top-left, x rightward, y downward,
// [0,1] spanning the image. Intermediate math may leave the unit square.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) {
    return {a.x + b.x, a.y + b.y};
  }
  friend constexpr Point2 operator-(Point2 a, Point2 b) {
    return {a.x - b.x, a.y - b.y};
  }
  friend constexpr Point2 operator*(double s, Point2 p) {
    return {s * p.x, s * p.y};
  }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

inline double squared_norm(Point2 p) { return p.x * p.x + p.y * p.y; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) {
  return std::isfinite(p.x) && std::isfinite(p.y);
}

// 2x2 linear map acting on row vectors: v' = v * M.
struct TransformMatrix {
  // Row-major {m00, m01, m10, m11}.
  std::array<double, 4> m{1.0, 0.0, 0.0, 1.0};

  static constexpr TransformMatrix identity() { return {}; }

  constexpr double operator()(int row, int col) const {
    return m[static_cast<std::size_t>(row * 2 + col)];
  }
  constexpr Point2 apply(Point2 v) const {
    return {v.x * m[0] + v.y * m[2], v.x * m[1] + v.y * m[3]};
  }
  bool is_finite() const {
    for (double v : m) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }
  friend constexpr bool operator==(const TransformMatrix&,
                                   const TransformMatrix&) = default;
};

// N corresponding feature points on the source (k_s) and driving (k_d)
// frames. Construction validates equal lengths, N >= 1 and finiteness.
class PairedPointSet {
 public:
  PairedPointSet(std::vector<Point2> source, std::vector<Point2> driving);

  std::size_t size() const noexcept { return source_.size(); }
  std::span<const Point2> source() const noexcept { return source_; }
  std::span<const Point2> driving() const noexcept { return driving_; }

  // Copy with the driving point at `index` replaced.
  PairedPointSet with_driving(std::size_t index, Point2 p) const;

 private:
  std::vector<Point2> source_;
  std::vector<Point2> driving_;
};

}  // namespace mlsr

#endif  // MLSR_GEOMETRY_HPP_
