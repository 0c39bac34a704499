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

#include "mlsr/mls.hpp"

#include <cmath>
#include <string>

#include "mlsr/error.hpp"

namespace mlsr {
namespace {

// det(P) below this fraction of trace(P)^2 counts as rank deficient.
constexpr double kRankTolerance = 1e-12;
// Mean squared centered distance below this (in normalized units^2) means all
// driving points sit on the centroid.
constexpr double kCoincidentTolerance = 1e-20;

void fill_weights(Point2 x, std::span<const Point2> driving,
                  const MlsConfig& cfg, std::span<double> out) {
  const bool squared = cfg.alpha == 1.0;
  for (std::size_t n = 0; n < driving.size(); ++n) {
    const double d2 = squared_norm(driving[n] - x);
    const double p = squared ? d2 : std::pow(d2, cfg.alpha);
    out[n] = 1.0 / (p > cfg.eps ? p : cfg.eps);
  }
}

Centroids centroids(const PairedPointSet& pairs, std::span<const double> w) {
  const auto src = pairs.source();
  const auto drv = pairs.driving();
  double sw = 0.0;
  Point2 cd, cs;
  for (std::size_t n = 0; n < w.size(); ++n) {
    sw += w[n];
    cd.x += w[n] * drv[n].x;
    cd.y += w[n] * drv[n].y;
    cs.x += w[n] * src[n].x;
    cs.y += w[n] * src[n].y;
  }
  return {{cd.x / sw, cd.y / sw}, {cs.x / sw, cs.y / sw}};
}

TransformMatrix affine(const PairedPointSet& pairs, std::span<const double> w,
                       const Centroids& c) {
  if (pairs.size() < 3) {
    throw DegenerateConfigurationError(
        "affine solve needs at least 3 points, got " +
        std::to_string(pairs.size()));
  }
  const auto src = pairs.source();
  const auto drv = pairs.driving();
  // P = sum w d^T d, Q = sum w d^T s over centered row vectors.
  double pxx = 0, pxy = 0, pyy = 0;
  double qxx = 0, qxy = 0, qyx = 0, qyy = 0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    const Point2 d = drv[n] - c.driving;
    const Point2 s = src[n] - c.source;
    pxx += w[n] * d.x * d.x;
    pxy += w[n] * d.x * d.y;
    pyy += w[n] * d.y * d.y;
    qxx += w[n] * d.x * s.x;
    qxy += w[n] * d.x * s.y;
    qyx += w[n] * d.y * s.x;
    qyy += w[n] * d.y * s.y;
  }
  const double det = pxx * pyy - pxy * pxy;
  const double trace = pxx + pyy;
  if (!(det > kRankTolerance * trace * trace)) {
    throw DegenerateConfigurationError(
        "driving points do not span two dimensions (collinear or coincident)");
  }
  const double inv = 1.0 / det;
  // P^-1 = inv * [[pyy, -pxy], [-pxy, pxx]]
  TransformMatrix m;
  m.m[0] = inv * (pyy * qxx - pxy * qyx);
  m.m[1] = inv * (pyy * qxy - pxy * qyy);
  m.m[2] = inv * (pxx * qyx - pxy * qxx);
  m.m[3] = inv * (pxx * qyy - pxy * qxy);
  return m;
}

// Returns (a, b) of M = [[a, b], [-b, a]].
std::pair<double, double> similarity_terms(const PairedPointSet& pairs,
                                           std::span<const double> w,
                                           const Centroids& c) {
  const auto src = pairs.source();
  const auto drv = pairs.driving();
  double mu = 0, dot = 0, cross = 0, sw = 0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    const Point2 d = drv[n] - c.driving;
    const Point2 s = src[n] - c.source;
    sw += w[n];
    mu += w[n] * squared_norm(d);
    dot += w[n] * (d.x * s.x + d.y * s.y);
    cross += w[n] * (d.x * s.y - d.y * s.x);
  }
  if (pairs.size() < 2 || !(mu > kCoincidentTolerance * sw)) {
    throw DegenerateConfigurationError(
        "all driving points coincide with their weighted centroid");
  }
  return {dot / mu, cross / mu};
}

TransformMatrix similarity(const PairedPointSet& pairs,
                           std::span<const double> w, const Centroids& c) {
  const auto [a, b] = similarity_terms(pairs, w, c);
  return {{a, b, -b, a}};
}

TransformMatrix rigid(const PairedPointSet& pairs, std::span<const double> w,
                      const Centroids& c) {
  const auto [a, b] = similarity_terms(pairs, w, c);
  const double s = std::hypot(a, b);
  if (!(s > 0.0)) {
    throw DegenerateConfigurationError(
        "rotation undefined: source and driving offsets are orthogonal in "
        "aggregate");
  }
  return {{a / s, b / s, -b / s, a / s}};
}

void check_lengths(const PairedPointSet& pairs, const WeightVector& w) {
  if (w.w.size() != pairs.size()) {
    throw InvalidInputError("weight vector has " + std::to_string(w.w.size()) +
                            " entries for " + std::to_string(pairs.size()) +
                            " points");
  }
}

}  // namespace

std::string_view to_string(TransformMode mode) {
  switch (mode) {
    case TransformMode::kAffine:
      return "affine";
    case TransformMode::kSimilarity:
      return "similarity";
    case TransformMode::kRigid:
      return "rigid";
    case TransformMode::kExternal:
      return "external";
  }
  return "unknown";
}

TransformMode parse_transform_mode(std::string_view name) {
  if (name == "affine") return TransformMode::kAffine;
  if (name == "similarity") return TransformMode::kSimilarity;
  if (name == "rigid") return TransformMode::kRigid;
  if (name == "external") return TransformMode::kExternal;
  throw ConfigurationError("unknown transform mode '" + std::string(name) +
                           "' (expected affine, similarity, rigid or external)");
}

void MlsConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigurationError("alpha must lie in (0, 1], got " +
                             std::to_string(alpha));
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw ConfigurationError("eps must be positive and finite");
  }
}

WeightVector compute_weights(Point2 x, std::span<const Point2> driving,
                             const MlsConfig& cfg) {
  cfg.validate();
  if (driving.empty()) {
    throw InvalidInputError("cannot weight an empty point list");
  }
  if (!is_finite(x)) throw InvalidInputError("query point is not finite");
  WeightVector out{std::vector<double>(driving.size()), cfg.alpha, cfg.eps};
  fill_weights(x, driving, cfg, out.w);
  return out;
}

Centroids weighted_centroids(const PairedPointSet& pairs,
                             const WeightVector& w) {
  check_lengths(pairs, w);
  return centroids(pairs, w.w);
}

TransformMatrix solve_affine(const PairedPointSet& pairs,
                             const WeightVector& w) {
  check_lengths(pairs, w);
  return affine(pairs, w.w, centroids(pairs, w.w));
}

TransformMatrix solve_similarity(const PairedPointSet& pairs,
                                 const WeightVector& w) {
  check_lengths(pairs, w);
  return similarity(pairs, w.w, centroids(pairs, w.w));
}

TransformMatrix solve_rigid(const PairedPointSet& pairs,
                            const WeightVector& w) {
  check_lengths(pairs, w);
  return rigid(pairs, w.w, centroids(pairs, w.w));
}

namespace detail {

Point2 motion_at(Point2 x, const PairedPointSet& pairs, const MlsConfig& cfg,
                 const TransformMatrix* external_m, std::span<double> scratch) {
  const std::span<double> w = scratch.first(pairs.size());
  fill_weights(x, pairs.driving(), cfg, w);
  const Centroids c = centroids(pairs, w);
  TransformMatrix m;
  switch (cfg.mode) {
    case TransformMode::kAffine:
      m = affine(pairs, w, c);
      break;
    case TransformMode::kSimilarity:
      m = similarity(pairs, w, c);
      break;
    case TransformMode::kRigid:
      m = rigid(pairs, w, c);
      break;
    case TransformMode::kExternal:
      if (external_m == nullptr) {
        throw ConfigurationError("external mode requires a transform matrix");
      }
      m = *external_m;
      break;
  }
  return m.apply(x - c.driving) + c.source;
}

}  // namespace detail

Point2 motion_at(Point2 x, const PairedPointSet& pairs, const MlsConfig& cfg,
                 const std::optional<TransformMatrix>& external_m) {
  cfg.validate();
  if (!is_finite(x)) throw InvalidInputError("query point is not finite");
  if (external_m && !external_m->is_finite()) {
    throw InvalidInputError("external transform has non-finite entries");
  }
  std::vector<double> scratch(pairs.size());
  return detail::motion_at(x, pairs, cfg,
                           external_m ? &*external_m : nullptr, scratch);
}

double motion_loss(const PairedPointSet& pairs, const TransformMatrix& m,
                   Point2 x, const MlsConfig& cfg) {
  if (!m.is_finite()) throw InvalidInputError("transform has non-finite entries");
  const WeightVector w = compute_weights(x, pairs.driving(), cfg);
  const Centroids c = centroids(pairs, w.w);
  const auto src = pairs.source();
  const auto drv = pairs.driving();
  double loss = 0.0;
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    const Point2 r = m.apply(drv[n] - c.driving) - (src[n] - c.source);
    loss += w.w[n] * squared_norm(r);
  }
  return loss;
}

}  // namespace mlsr
