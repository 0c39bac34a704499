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

#ifndef MLSR_MLS_HPP_
#define MLSR_MLS_HPP_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mlsr/geometry.hpp"

namespace mlsr {

enum class TransformMode {
  kAffine,
  kSimilarity,
  // Similarity with the scale normalized to one.
  kRigid,
  // M supplied by the caller instead of solved per query point.
  kExternal,
};

std::string_view to_string(TransformMode mode);
// Throws ConfigurationError on unknown names.
TransformMode parse_transform_mode(std::string_view name);

struct MlsConfig {
  double alpha = 1.0;
  double eps = 1e-8;
  TransformMode mode = TransformMode::kAffine;

  // Throws ConfigurationError unless 0 < alpha <= 1 and eps > 0.
  void validate() const;
};

// Inverse-distance weights of every driving point for one query point.
struct WeightVector {
  std::vector<double> w;
  double alpha = 1.0;
  double eps = 1e-8;
};

struct Centroids {
  Point2 driving;  // k_d*
  Point2 source;   // k_s*
};

/// w_n = 1 / max(|k_dn - x|^(2 alpha), eps).
WeightVector compute_weights(Point2 x, std::span<const Point2> driving,
                             const MlsConfig& cfg);

Centroids weighted_centroids(const PairedPointSet& pairs,
                             const WeightVector& w);

/// Weighted least-squares linear map between the centroid-subtracted driving
/// and source points: argmin_M sum_n w_n |d_n M - s_n|^2. Needs at least
/// three driving points spanning the plane.
TransformMatrix solve_affine(const PairedPointSet& pairs,
                             const WeightVector& w);

/// Same objective restricted to M = s * R (scaled rotation).
TransformMatrix solve_similarity(const PairedPointSet& pairs,
                                 const WeightVector& w);

/// solve_similarity with s forced to 1.
TransformMatrix solve_rigid(const PairedPointSet& pairs,
                            const WeightVector& w);

/// Per-pixel motion f_x = (x - k_d*) M + k_s*, mapping a driving-frame
/// coordinate to the source-frame coordinate it should sample.
Point2 motion_at(Point2 x, const PairedPointSet& pairs, const MlsConfig& cfg,
                 const std::optional<TransformMatrix>& external_m =
                     std::nullopt);

/// sum_n w_n(x) |(k_dn - k_d*) M - (k_sn - k_s*)|^2 with centroids at x.
double motion_loss(const PairedPointSet& pairs, const TransformMatrix& m,
                   Point2 x, const MlsConfig& cfg);

namespace detail {

// Allocation-free variant shared by motion_at and dense flow evaluation.
// `scratch` must hold at least pairs.size() doubles.
Point2 motion_at(Point2 x, const PairedPointSet& pairs, const MlsConfig& cfg,
                 const TransformMatrix* external_m, std::span<double> scratch);

}  // namespace detail

}  // namespace mlsr

#endif  // MLSR_MLS_HPP_
