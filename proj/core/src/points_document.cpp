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

#include "mlsr/points_document.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "json.hpp"
#include "mlsr/error.hpp"
#include "mlsr/image_io.hpp"

namespace mlsr {
namespace {

using nlohmann::json;

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw InvalidInputError(field + " must be a number");
  return j.get<double>();
}

std::vector<Point2> point_list(const json& doc, const std::string& field) {
  if (!doc.contains(field)) throw InvalidInputError("missing '" + field + "'");
  const json& list = doc.at(field);
  if (!list.is_array()) throw InvalidInputError("'" + field + "' must be an array");
  std::vector<Point2> out;
  out.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& p = list[i];
    const std::string where = field + "[" + std::to_string(i) + "]";
    if (!p.is_array() || p.size() != 2) {
      throw InvalidInputError(where + " must be an [x, y] pair");
    }
    out.push_back({number(p[0], where), number(p[1], where)});
  }
  return out;
}

json to_json_points(const std::vector<Point2>& pts) {
  json list = json::array();
  for (const Point2& p : pts) list.push_back({p.x, p.y});
  return list;
}

TransformMatrix matrix_field(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
      !j[1].is_array() || j[1].size() != 2) {
    throw InvalidInputError("external_m must be a 2x2 nested array");
  }
  TransformMatrix m{{number(j[0][0], "external_m"), number(j[0][1], "external_m"),
                     number(j[1][0], "external_m"), number(j[1][1], "external_m")}};
  if (!m.is_finite()) throw InvalidInputError("external_m must be finite");
  return m;
}

void check_unit_square(const std::vector<Point2>& pts, const char* field) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point2 p = pts[i];
    if (!is_finite(p) || p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0) {
      throw InvalidInputError(std::string(field) + "[" + std::to_string(i) +
                              "] = (" + std::to_string(p.x) + ", " +
                              std::to_string(p.y) + ") lies outside [0,1]^2");
    }
  }
}

// Shared scalar fields of points and track documents.
struct Common {
  double alpha = 1.0;
  double eps = 1e-8;
  TransformMode mode = TransformMode::kAffine;
  std::optional<TransformMatrix> external_m;
};

Common parse_common(const json& doc) {
  Common c;
  if (doc.contains("alpha")) c.alpha = number(doc["alpha"], "alpha");
  if (doc.contains("eps")) c.eps = number(doc["eps"], "eps");
  if (doc.contains("mode")) {
    if (!doc["mode"].is_string()) throw InvalidInputError("mode must be a string");
    try {
      c.mode = parse_transform_mode(doc["mode"].get<std::string>());
    } catch (const ConfigurationError& e) {
      throw InvalidInputError(e.what());
    }
  }
  if (doc.contains("external_m") && !doc["external_m"].is_null()) {
    c.external_m = matrix_field(doc["external_m"]);
  }
  return c;
}

void validate_common(double alpha, double eps, TransformMode mode,
                     const std::optional<TransformMatrix>& external_m) {
  try {
    MlsConfig{alpha, eps, mode}.validate();
  } catch (const ConfigurationError& e) {
    throw InvalidInputError(e.what());
  }
  if (mode == TransformMode::kExternal && !external_m) {
    throw InvalidInputError("mode 'external' requires external_m");
  }
}

}  // namespace

void PointsDocument::validate() const {
  if (source.empty()) throw InvalidInputError("document needs at least one point");
  if (source.size() != driving.size()) {
    throw InvalidInputError("source has " + std::to_string(source.size()) +
                            " points but driving has " +
                            std::to_string(driving.size()));
  }
  check_unit_square(source, "source");
  check_unit_square(driving, "driving");
  validate_common(alpha, eps, mode, external_m);
}

PairedPointSet PointsDocument::pairs() const {
  return PairedPointSet(source, driving);
}

MlsConfig PointsDocument::config() const { return {alpha, eps, mode}; }

PointsDocument PointsDocument::identity(std::size_t n) {
  if (n == 0) throw InvalidInputError("identity document needs n >= 1");
  const std::size_t rows =
      n < 3 ? 1 : std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(std::sqrt(n / 2.5))));
  const std::size_t cols = (n + rows - 1) / rows;
  PointsDocument doc;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = i / cols;
    const std::size_t c = i % cols;
    doc.source.push_back({(c + 0.5) / static_cast<double>(cols),
                          (r + 0.5) / static_cast<double>(rows)});
  }
  doc.driving = doc.source;
  return doc;
}

PointsDocument parse_points_document(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw InvalidInputError("points document must be an object");
  PointsDocument out;
  const Common c = parse_common(doc);
  out.alpha = c.alpha;
  out.eps = c.eps;
  out.mode = c.mode;
  out.external_m = c.external_m;
  out.source = point_list(doc, "source");
  out.driving = point_list(doc, "driving");
  if (doc.contains("n")) {
    if (!doc["n"].is_number_integer()) throw InvalidInputError("n must be an integer");
    const auto n = doc["n"].get<long long>();
    if (n < 1 || static_cast<std::size_t>(n) != out.source.size() ||
        static_cast<std::size_t>(n) != out.driving.size()) {
      throw InvalidInputError("n = " + std::to_string(n) +
                              " does not match list lengths (source " +
                              std::to_string(out.source.size()) + ", driving " +
                              std::to_string(out.driving.size()) + ")");
    }
  }
  if (doc.contains("masks") && !doc["masks"].is_null()) {
    const json& m = doc["masks"];
    if (!m.is_object()) throw InvalidInputError("masks must be an object");
    for (const char* key : {"foreground", "occlusion"}) {
      if (m.contains(key) && !m[key].is_null()) {
        if (!m[key].is_string()) {
          throw InvalidInputError(std::string("masks.") + key + " must be a path");
        }
        (std::string(key) == "foreground" ? out.masks.foreground
                                          : out.masks.occlusion) =
            m[key].get<std::string>();
      }
    }
  }
  out.validate();
  return out;
}

std::string to_json(const PointsDocument& doc) {
  json j;
  j["n"] = doc.n();
  j["alpha"] = doc.alpha;
  if (doc.eps != 1e-8) j["eps"] = doc.eps;
  j["mode"] = std::string(to_string(doc.mode));
  j["source"] = to_json_points(doc.source);
  j["driving"] = to_json_points(doc.driving);
  if (doc.external_m) {
    const auto& m = doc.external_m->m;
    j["external_m"] = {{m[0], m[1]}, {m[2], m[3]}};
  }
  if (doc.masks.foreground || doc.masks.occlusion) {
    json masks = json::object();
    if (doc.masks.foreground) masks["foreground"] = *doc.masks.foreground;
    if (doc.masks.occlusion) masks["occlusion"] = *doc.masks.occlusion;
    j["masks"] = std::move(masks);
  }
  return j.dump(2);
}

PointsDocument load_points_document(const std::filesystem::path& path) {
  return parse_points_document(read_text(path));
}

void save_points_document(const PointsDocument& doc,
                          const std::filesystem::path& path) {
  const std::string text = to_json(doc) + "\n";
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                   text.size()));
}

PointsDocument TrackDocument::frame(std::size_t i) const {
  PointsDocument doc;
  doc.alpha = alpha;
  doc.eps = eps;
  doc.mode = mode;
  doc.external_m = external_m;
  doc.source = source;
  doc.driving = frames.at(i);
  return doc;
}

TrackDocument parse_track_document(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw InvalidInputError("track document must be an object");
  TrackDocument out;
  const Common c = parse_common(doc);
  out.alpha = c.alpha;
  out.eps = c.eps;
  out.mode = c.mode;
  out.external_m = c.external_m;
  out.source = point_list(doc, "source");
  if (out.source.empty()) throw InvalidInputError("track source set is empty");
  check_unit_square(out.source, "source");
  validate_common(out.alpha, out.eps, out.mode, out.external_m);
  if (!doc.contains("frames") || !doc["frames"].is_array()) {
    throw InvalidInputError("track needs a 'frames' array");
  }
  const json& frames = doc["frames"];
  if (frames.empty()) throw InvalidInputError("track has no frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string where = "frames[" + std::to_string(i) + "]";
    if (!frames[i].is_object()) throw InvalidInputError(where + " must be an object");
    std::vector<Point2> driving = point_list(frames[i], "driving");
    if (driving.size() != out.source.size()) {
      throw InvalidInputError(where + " has " + std::to_string(driving.size()) +
                              " driving points, source has " +
                              std::to_string(out.source.size()));
    }
    check_unit_square(driving, (where + ".driving").c_str());
    out.frames.push_back(std::move(driving));
  }
  return out;
}

TrackDocument load_track_document(const std::filesystem::path& path) {
  return parse_track_document(read_text(path));
}

std::string to_json(const TrackDocument& track) {
  json j;
  j["alpha"] = track.alpha;
  j["mode"] = std::string(to_string(track.mode));
  if (track.external_m) {
    const auto& m = track.external_m->m;
    j["external_m"] = {{m[0], m[1]}, {m[2], m[3]}};
  }
  j["source"] = to_json_points(track.source);
  json frames = json::array();
  for (const auto& f : track.frames) frames.push_back({{"driving", to_json_points(f)}});
  j["frames"] = std::move(frames);
  return j.dump(2);
}

}  // namespace mlsr
