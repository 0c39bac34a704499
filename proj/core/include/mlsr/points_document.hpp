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

#ifndef MLSR_POINTS_DOCUMENT_HPP_
#define MLSR_POINTS_DOCUMENT_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlsr/geometry.hpp"
#include "mlsr/mls.hpp"

namespace mlsr {

struct MaskRefs {
  std::optional<std::string> foreground;
  std::optional<std::string> occlusion;

  friend bool operator==(const MaskRefs&, const MaskRefs&) = default;
};

// Interchange format for paired points shared by the CLI, the HTTP service
// and the workbench:
//
//   {"n": 10, "alpha": 1.0, "mode": "affine",
//    "source": [[x, y], ...], "driving": [[x, y], ...],
//    "external_m": [[m00, m01], [m10, m11]],        (external mode only)
//    "masks": {"foreground": "fg.png", "occlusion": "occ.png"}}
//
// Coordinates are normalized to [0,1]. "eps" is accepted as an optional
// override of the weight clamp.
struct PointsDocument {
  double alpha = 1.0;
  double eps = 1e-8;
  TransformMode mode = TransformMode::kAffine;
  std::vector<Point2> source;
  std::vector<Point2> driving;
  std::optional<TransformMatrix> external_m;
  MaskRefs masks;

  std::size_t n() const noexcept { return source.size(); }

  // Throws InvalidInputError describing the first violation.
  void validate() const;

  PairedPointSet pairs() const;
  MlsConfig config() const;

  // `n` grid points with source == driving.
  static PointsDocument identity(std::size_t n = 10);

  friend bool operator==(const PointsDocument&,
                         const PointsDocument&) = default;
};

// Malformed JSON throws ParseError carrying the line and column; schema
// violations throw InvalidInputError.
PointsDocument parse_points_document(std::string_view json);
std::string to_json(const PointsDocument& doc);

PointsDocument load_points_document(const std::filesystem::path& path);
void save_points_document(const PointsDocument& doc,
                          const std::filesystem::path& path);

// Driving-point sequence sharing one source set:
//   {"alpha": 1.0, "mode": "affine", "source": [[x, y], ...],
//    "frames": [{"driving": [[x, y], ...]}, ...]}
struct TrackDocument {
  double alpha = 1.0;
  double eps = 1e-8;
  TransformMode mode = TransformMode::kAffine;
  std::optional<TransformMatrix> external_m;
  std::vector<Point2> source;
  std::vector<std::vector<Point2>> frames;

  PointsDocument frame(std::size_t i) const;
};

TrackDocument parse_track_document(std::string_view json);
TrackDocument load_track_document(const std::filesystem::path& path);
std::string to_json(const TrackDocument& track);

}  // namespace mlsr

#endif  // MLSR_POINTS_DOCUMENT_HPP_
