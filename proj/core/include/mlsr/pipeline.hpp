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

#ifndef MLSR_PIPELINE_HPP_
#define MLSR_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mlsr/attention.hpp"
#include "mlsr/geometry.hpp"
#include "mlsr/heatmap.hpp"
#include "mlsr/image.hpp"
#include "mlsr/mls.hpp"
#include "mlsr/points_document.hpp"
#include "mlsr/warp.hpp"

namespace mlsr {

inline constexpr int kDefaultOutputSize = 256;
inline constexpr std::uint64_t kStubWeightSeed = 20220603;

// ---------------------------------------------------------------------------
// Point extraction
// ---------------------------------------------------------------------------

/// stub_embedder on both images, pair_transform, then embeddings_to_points on
/// l_st and l_dt. Without a bundle the seeded stub weights are used.
PairedPointSet extract_paired_points(
    const ImageBuffer& source, const ImageBuffer& driving,
    const std::optional<WeightBundle>& weights = std::nullopt,
    int n = kDefaultFeaturePoints, const AttentionOptions& opts = {});

// ---------------------------------------------------------------------------
// Warping
// ---------------------------------------------------------------------------

struct WarpOptions {
  int width = kDefaultOutputSize;
  int height = kDefaultOutputSize;
  std::optional<MaskBuffer> foreground_mask;
  std::optional<MaskBuffer> occlusion_mask;
  // Used with the occlusion mask; broadcast when it has a single entry.
  std::vector<float> fill_color{0.5f};
  std::optional<ImageBuffer> fill_image;
  ParallelOptions parallel;
  // Wall-clock timings in the run_warp stats sidecar; the only
  // run-dependent fields it carries.
  bool record_timing = true;
};

struct WarpResult {
  ImageBuffer image;
  FlowField flow;
  FlowStats stats;
  double flow_ms = 0.0;
  double warp_ms = 0.0;
};

/// dense_flow -> optional background blend -> backward_warp -> optional
/// occlusion compositing.
WarpResult render_warp(const ImageBuffer& source, const PointsDocument& doc,
                       const WarpOptions& opts);

struct RunWarpReport {
  FlowStats stats;
  double flow_ms = 0.0;
  double warp_ms = 0.0;
  double total_ms = 0.0;
  std::filesystem::path stats_path;
};

// Loads inputs, renders, writes `out_path` (same bit depth as the source)
// and a "<out>.stats.json" sidecar. Mask references in the document are
// resolved relative to the document's directory unless overridden in opts.
RunWarpReport run_warp(const std::filesystem::path& source_path,
                       const std::filesystem::path& points_path,
                       const std::filesystem::path& out_path,
                       const std::optional<MlsConfig>& cfg_override,
                       WarpOptions opts);

// ---------------------------------------------------------------------------
// Animation
// ---------------------------------------------------------------------------

struct FrameFailure {
  std::size_t index = 0;
  std::string message;
};

struct AnimateReport {
  std::vector<std::filesystem::path> frames;
  std::vector<FrameFailure> failures;
  std::vector<FlowStats> stats;  // one per written frame
};

std::string frame_filename(std::size_t index);

/// One output frame per track entry. Frames whose solve fails are skipped
/// and listed in "failures.json" inside out_dir.
AnimateReport run_animate(const std::filesystem::path& source_path,
                          const std::filesystem::path& track_path,
                          const std::filesystem::path& out_dir,
                          const WarpOptions& opts);
AnimateReport animate(const ImageBuffer& source, int source_bit_depth,
                      const TrackDocument& track,
                      const std::filesystem::path& out_dir,
                      const WarpOptions& opts);

// ---------------------------------------------------------------------------
// Perturbation harness
// ---------------------------------------------------------------------------

struct PerturbReport {
  double delta = 0.0;
  std::size_t perturbed_index = 0;
  double mean_flow_change = 0.0;
  double max_flow_change = 0.0;
  // Mean over the original driving points of |f'(k_dm) - f(k_dm)|.
  double point_error_change = 0.0;
};

struct PerturbOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  double delta_min = 0.05;
  double delta_max = 0.5;
  // Forces every trial's displacement magnitude.
  std::optional<double> delta_override;
  int width = 64;
  int height = 64;
  ParallelOptions parallel;
};

struct PerturbAggregate {
  std::vector<PerturbReport> trials;  // sorted by trial index
  double mean_delta = 0.0;
  double mean_flow_change = 0.0;
  double median_flow_change = 0.0;
  double max_flow_change = 0.0;
  double mean_point_error_change = 0.0;
  // Fraction of trials with mean_flow_change < delta.
  double damped_fraction = 0.0;
};

/// Displaces driving point `index` by `displacement` and compares the dense
/// flow against the unperturbed one.
PerturbReport perturb_once(const PointsDocument& doc, std::size_t index,
                           Point2 displacement, int width, int height,
                           const ParallelOptions& par = {});

/// Seeded trials: one random driving point moved by a uniform magnitude in
/// [delta_min, delta_max] along a uniform random direction.
PerturbAggregate run_perturb(const PointsDocument& doc,
                             const PerturbOptions& opts);

std::string to_json(const PerturbReport& report);
std::string to_json(const PerturbAggregate& aggregate);

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

struct LossWeights {
  double lambda_p = 0.0;
  double lambda_m = 1.0;
  double lambda_f = 1.0;
  double lambda_adv = 0.0;

  void validate() const;
};

// Values this engine can evaluate; perceptual and adversarial terms need
// trained networks and are always reported as unavailable.
struct LossTerms {
  std::optional<double> motion;
  std::optional<double> spreading;
};

struct LossEntry {
  std::string name;
  double lambda = 0.0;
  std::optional<double> value;  // nullopt when unavailable
  double weighted = 0.0;
};

struct LossBreakdown {
  double total = 0.0;
  std::vector<LossEntry> entries;
};

LossBreakdown total_loss(const LossTerms& terms, const LossWeights& w);
std::string to_json(const LossBreakdown& breakdown);

/// Mean of motion_loss over a grid x grid lattice of query points, with M
/// solved at each query point (or the document's external M).
double aggregate_motion_loss(const PointsDocument& doc, int grid = 16);

/// spreading_loss on the source and on the driving points, summed.
double aggregate_spreading_loss(const PointsDocument& doc,
                                const SpreadConfig& cfg = {});

}  // namespace mlsr

#endif  // MLSR_PIPELINE_HPP_
