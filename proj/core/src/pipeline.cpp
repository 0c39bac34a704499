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

#include "mlsr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "json.hpp"
#include "mlsr/error.hpp"
#include "mlsr/heatmap.hpp"
#include "mlsr/image_io.hpp"

namespace mlsr {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

const WeightBundle& default_stub_bundle() {
  static const WeightBundle bundle = WeightBundle::stub(kStubWeightSeed);
  return bundle;
}

json stats_json(const FlowStats& s) {
  return {{"min_x", s.min_x},
          {"max_x", s.max_x},
          {"min_y", s.min_y},
          {"max_y", s.max_y},
          {"mean_displacement", s.mean_displacement},
          {"max_displacement", s.max_displacement}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                   text.size()));
}

MaskBuffer load_mask(const std::filesystem::path& path) {
  return MaskBuffer::from_image(read_png(path).image);
}

// 53-bit uniform in [0,1) from the raw engine output.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

PerturbReport perturb_against(const FlowField& base, const PointsDocument& doc,
                              const PairedPointSet& pairs, std::size_t index,
                              Point2 displacement, const ParallelOptions& par) {
  if (index >= pairs.size()) {
    throw InvalidInputError("point index " + std::to_string(index) +
                            " out of range for " + std::to_string(pairs.size()) +
                            " points");
  }
  const MlsConfig cfg = doc.config();
  const PairedPointSet moved =
      pairs.with_driving(index, pairs.driving()[index] + displacement);
  const FlowField changed =
      dense_flow(moved, cfg, base.width(), base.height(), doc.external_m, par);

  PerturbReport r;
  r.delta = norm(displacement);
  r.perturbed_index = index;
  r.mean_flow_change = mean_endpoint_error(base, changed);
  r.max_flow_change = max_endpoint_error(base, changed);
  double sum = 0.0;
  for (const Point2& k : pairs.driving()) {
    sum += distance(motion_at(k, moved, cfg, doc.external_m),
                    motion_at(k, pairs, cfg, doc.external_m));
  }
  r.point_error_change = sum / static_cast<double>(pairs.size());
  return r;
}

json report_json(const PerturbReport& r) {
  return {{"delta", r.delta},
          {"perturbed_index", r.perturbed_index},
          {"mean_flow_change", r.mean_flow_change},
          {"max_flow_change", r.max_flow_change},
          {"point_error_change", r.point_error_change}};
}

}  // namespace

PairedPointSet extract_paired_points(const ImageBuffer& source,
                                     const ImageBuffer& driving,
                                     const std::optional<WeightBundle>& weights,
                                     int n, const AttentionOptions& opts) {
  const WeightBundle& bundle = weights ? *weights : default_stub_bundle();
  bundle.validate();
  if (bundle.dim != kHeatmapCells) {
    throw ShapeError("point extraction needs " + std::to_string(kHeatmapCells) +
                     "-wide embeddings, weights have dim " +
                     std::to_string(bundle.dim));
  }
  const Matrix l_s = stub_embedder(source, n, bundle.dim);
  const Matrix l_d = stub_embedder(driving, n, bundle.dim);
  const PairedEmbeddings paired = pair_transform(l_s, l_d, bundle, opts);
  return PairedPointSet(embeddings_to_points(paired.source).points,
                        embeddings_to_points(paired.driving).points);
}

WarpResult render_warp(const ImageBuffer& source, const PointsDocument& doc,
                       const WarpOptions& opts) {
  doc.validate();
  if (source.empty()) throw InvalidInputError("source image is empty");
  WarpResult out;
  const auto t0 = Clock::now();
  out.flow = dense_flow(doc.pairs(), doc.config(), opts.width, opts.height,
                        doc.external_m, opts.parallel);
  if (opts.foreground_mask) {
    out.flow = blend_background(out.flow, *opts.foreground_mask);
  }
  out.flow_ms = elapsed_ms(t0);
  const auto t1 = Clock::now();
  out.image = backward_warp(source, out.flow, opts.parallel);
  if (opts.occlusion_mask) {
    out.image = opts.fill_image
                    ? apply_occlusion(out.image, *opts.occlusion_mask, *opts.fill_image)
                    : apply_occlusion(out.image, *opts.occlusion_mask, opts.fill_color);
  }
  out.warp_ms = elapsed_ms(t1);
  out.stats = flow_stats(out.flow);
  return out;
}

RunWarpReport run_warp(const std::filesystem::path& source_path,
                       const std::filesystem::path& points_path,
                       const std::filesystem::path& out_path,
                       const std::optional<MlsConfig>& cfg_override,
                       WarpOptions opts) {
  const auto t0 = Clock::now();
  const DecodedImage source = read_png(source_path);
  PointsDocument doc = load_points_document(points_path);
  if (cfg_override) {
    doc.alpha = cfg_override->alpha;
    doc.eps = cfg_override->eps;
    doc.mode = cfg_override->mode;
  }
  const std::filesystem::path base_dir = points_path.parent_path();
  if (!opts.foreground_mask && doc.masks.foreground) {
    opts.foreground_mask = load_mask(base_dir / *doc.masks.foreground);
  }
  if (!opts.occlusion_mask && doc.masks.occlusion) {
    opts.occlusion_mask = load_mask(base_dir / *doc.masks.occlusion);
  }
  const WarpResult result = render_warp(source.image, doc, opts);
  write_png(out_path, result.image, source.bit_depth);

  RunWarpReport report;
  report.stats = result.stats;
  report.flow_ms = result.flow_ms;
  report.warp_ms = result.warp_ms;
  report.total_ms = elapsed_ms(t0);
  report.stats_path = out_path;
  report.stats_path += ".stats.json";
  json sidecar = {
      {"width", opts.width},
      {"height", opts.height},
      {"n", doc.n()},
      {"alpha", doc.alpha},
      {"mode", std::string(to_string(doc.mode))},
      {"flow", stats_json(result.stats)}};
  if (opts.record_timing) {
    sidecar["timing_ms"] = {
        {"flow", report.flow_ms}, {"warp", report.warp_ms}, {"total", report.total_ms}};
  }
  write_text(report.stats_path, sidecar.dump(2) + "\n");
  return report;
}

std::string frame_filename(std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "frame_%04zu.png", index);
  return name;
}

AnimateReport animate(const ImageBuffer& source, int source_bit_depth,
                      const TrackDocument& track,
                      const std::filesystem::path& out_dir,
                      const WarpOptions& opts) {
  if (track.frames.empty()) throw InvalidInputError("track has no frames");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string());

  AnimateReport report;
  for (std::size_t i = 0; i < track.frames.size(); ++i) {
    WarpResult result;
    try {
      result = render_warp(source, track.frame(i), opts);
    } catch (const DegenerateConfigurationError& e) {
      report.failures.push_back({i, e.what()});
      continue;
    }
    const std::filesystem::path path = out_dir / frame_filename(i);
    write_png(path, result.image, source_bit_depth);
    report.frames.push_back(path);
    report.stats.push_back(result.stats);
  }
  const std::filesystem::path failures_path = out_dir / "failures.json";
  if (!report.failures.empty()) {
    json list = json::array();
    for (const FrameFailure& f : report.failures) {
      list.push_back({{"frame", f.index}, {"error", f.message}});
    }
    write_text(failures_path,
               json{{"skipped", report.failures.size()}, {"failures", list}}.dump(2) +
                   "\n");
  } else {
    std::filesystem::remove(failures_path, ec);
  }
  return report;
}

AnimateReport run_animate(const std::filesystem::path& source_path,
                          const std::filesystem::path& track_path,
                          const std::filesystem::path& out_dir,
                          const WarpOptions& opts) {
  const DecodedImage source = read_png(source_path);
  const TrackDocument track = load_track_document(track_path);
  return animate(source.image, source.bit_depth, track, out_dir, opts);
}

PerturbReport perturb_once(const PointsDocument& doc, std::size_t index,
                           Point2 displacement, int width, int height,
                           const ParallelOptions& par) {
  doc.validate();
  if (!is_finite(displacement)) throw InvalidInputError("displacement is not finite");
  const PairedPointSet pairs = doc.pairs();
  const FlowField base =
      dense_flow(pairs, doc.config(), width, height, doc.external_m, par);
  return perturb_against(base, doc, pairs, index, displacement, par);
}

PerturbAggregate run_perturb(const PointsDocument& doc, const PerturbOptions& opts) {
  doc.validate();
  if (opts.trials < 1) throw InvalidInputError("trials must be at least 1");
  if (!(opts.delta_min >= 0.0) || !(opts.delta_max >= opts.delta_min)) {
    throw InvalidInputError("noise range must satisfy 0 <= delta_min <= delta_max");
  }
  if (opts.delta_override && !(*opts.delta_override >= 0.0)) {
    throw InvalidInputError("delta override must be nonnegative");
  }
  const PairedPointSet pairs = doc.pairs();
  const FlowField base = dense_flow(pairs, doc.config(), opts.width, opts.height,
                                    doc.external_m, opts.parallel);
  std::mt19937_64 rng(opts.seed);

  PerturbAggregate agg;
  agg.trials.reserve(opts.trials);
  for (std::size_t t = 0; t < opts.trials; ++t) {
    const std::size_t index = static_cast<std::size_t>(rng() % pairs.size());
    const double magnitude =
        opts.delta_override
            ? *opts.delta_override
            : opts.delta_min + (opts.delta_max - opts.delta_min) * uniform01(rng);
    const double angle = 2.0 * std::numbers::pi * uniform01(rng);
    const Point2 displacement{magnitude * std::cos(angle),
                              magnitude * std::sin(angle)};
    PerturbReport r =
        perturb_against(base, doc, pairs, index, displacement, opts.parallel);
    // Report the requested magnitude, not the rounded norm of its components.
    r.delta = magnitude;
    agg.trials.push_back(r);
  }

  std::vector<double> changes;
  std::size_t damped = 0;
  for (const PerturbReport& r : agg.trials) {
    agg.mean_delta += r.delta;
    agg.mean_flow_change += r.mean_flow_change;
    agg.mean_point_error_change += r.point_error_change;
    agg.max_flow_change = std::max(agg.max_flow_change, r.max_flow_change);
    changes.push_back(r.mean_flow_change);
    if (r.mean_flow_change < r.delta) ++damped;
  }
  const double count = static_cast<double>(agg.trials.size());
  agg.mean_delta /= count;
  agg.mean_flow_change /= count;
  agg.mean_point_error_change /= count;
  agg.damped_fraction = static_cast<double>(damped) / count;
  std::sort(changes.begin(), changes.end());
  const std::size_t mid = changes.size() / 2;
  agg.median_flow_change = changes.size() % 2 == 1
                               ? changes[mid]
                               : 0.5 * (changes[mid - 1] + changes[mid]);
  return agg;
}

std::string to_json(const PerturbReport& report) {
  return report_json(report).dump(2);
}

std::string to_json(const PerturbAggregate& aggregate) {
  json trials = json::array();
  for (std::size_t i = 0; i < aggregate.trials.size(); ++i) {
    json t = report_json(aggregate.trials[i]);
    t["trial"] = i;
    trials.push_back(std::move(t));
  }
  const json doc = {
      {"metric",
       "flow endpoint change in normalized units (mean/max over pixels); "
       "no facial-landmark detector is involved"},
      {"summary",
       {{"trials", aggregate.trials.size()},
        {"mean_delta", aggregate.mean_delta},
        {"mean_flow_change", aggregate.mean_flow_change},
        {"median_flow_change", aggregate.median_flow_change},
        {"max_flow_change", aggregate.max_flow_change},
        {"mean_point_error_change", aggregate.mean_point_error_change},
        {"damped_fraction", aggregate.damped_fraction}}},
      {"trials", std::move(trials)}};
  return doc.dump(2);
}

void LossWeights::validate() const {
  for (double l : {lambda_p, lambda_m, lambda_f, lambda_adv}) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw InvalidInputError("loss weights must be finite and nonnegative");
    }
  }
}

LossBreakdown total_loss(const LossTerms& terms, const LossWeights& w) {
  w.validate();
  LossBreakdown out;
  auto add = [&](std::string name, double lambda, std::optional<double> value) {
    LossEntry e{std::move(name), lambda, value, 0.0};
    if (value) {
      e.weighted = lambda * *value;
      out.total += e.weighted;
    }
    out.entries.push_back(std::move(e));
  };
  add("perceptual", w.lambda_p, std::nullopt);
  add("motion", w.lambda_m, terms.motion);
  add("spreading", w.lambda_f, terms.spreading);
  add("adversarial", w.lambda_adv, std::nullopt);
  return out;
}

std::string to_json(const LossBreakdown& breakdown) {
  json terms = json::object();
  for (const LossEntry& e : breakdown.entries) {
    json t = {{"lambda", e.lambda}};
    if (e.value) {
      t["value"] = *e.value;
      t["weighted"] = e.weighted;
      t["status"] = "available";
    } else {
      t["status"] = "unavailable";
    }
    terms[e.name] = std::move(t);
  }
  return json{{"total", breakdown.total}, {"terms", std::move(terms)}}.dump(2);
}

double aggregate_motion_loss(const PointsDocument& doc, int grid) {
  doc.validate();
  if (grid < 1) throw InvalidInputError("loss grid must be at least 1x1");
  const PairedPointSet pairs = doc.pairs();
  const MlsConfig cfg = doc.config();
  double sum = 0.0;
  for (int row = 0; row < grid; ++row) {
    for (int col = 0; col < grid; ++col) {
      const Point2 x = pixel_center(col, row, grid, grid);
      TransformMatrix m;
      if (cfg.mode == TransformMode::kExternal) {
        m = *doc.external_m;
      } else {
        const WeightVector w = compute_weights(x, pairs.driving(), cfg);
        m = cfg.mode == TransformMode::kAffine       ? solve_affine(pairs, w)
            : cfg.mode == TransformMode::kSimilarity ? solve_similarity(pairs, w)
                                                     : solve_rigid(pairs, w);
      }
      sum += motion_loss(pairs, m, x, cfg);
    }
  }
  return sum / (static_cast<double>(grid) * grid);
}

double aggregate_spreading_loss(const PointsDocument& doc, const SpreadConfig& cfg) {
  return spreading_loss(doc.source, cfg) + spreading_loss(doc.driving, cfg);
}

}  // namespace mlsr
