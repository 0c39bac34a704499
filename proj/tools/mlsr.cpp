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

// mlsr: command line front end for the reenactment motion engine.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlsr/attention.hpp"
#include "mlsr/error.hpp"
#include "mlsr/flow_io.hpp"
#include "mlsr/image_io.hpp"
#include "mlsr/pipeline.hpp"
#include "mlsr/points_document.hpp"
#include "mlsr/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Accepts "0.5" (gray) or "r,g,b[,a]".
std::vector<float> parse_fill(const std::string& text) {
  std::vector<float> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string part =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stof(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw mlsr::InvalidInputError("--fill expects numbers separated by commas, got '" +
                                    text + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::pair<int, int> parse_size(const std::string& text) {
  int w = 0, h = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%dx%d%c", &w, &h, &tail) == 2 ||
      (std::sscanf(text.c_str(), "%d%c", &w, &tail) == 1 && (h = w, true))) {
    if (w >= 1 && h >= 1) return {w, h};
  }
  throw mlsr::InvalidInputError("--size expects N or WxH with positive values, got '" +
                                text + "'");
}

mlsr::MaskBuffer load_mask_file(const fs::path& path) {
  return mlsr::MaskBuffer::from_image(mlsr::read_png(path).image);
}

struct WarpArgs {
  std::string source, points, out, mode, fg_mask, occlusion, fill, size, flow_out;
  std::optional<double> alpha;
  bool no_timing = false;
};

int cmd_warp(const WarpArgs& a, const mlsr::ParallelOptions& par) {
  std::optional<mlsr::MlsConfig> override_cfg;
  if (a.alpha || !a.mode.empty()) {
    const mlsr::PointsDocument doc = mlsr::load_points_document(a.points);
    mlsr::MlsConfig cfg = doc.config();
    if (a.alpha) cfg.alpha = *a.alpha;
    if (!a.mode.empty()) cfg.mode = mlsr::parse_transform_mode(a.mode);
    override_cfg = cfg;
  }
  mlsr::WarpOptions opts;
  opts.parallel = par;
  opts.record_timing = !a.no_timing;
  if (!a.size.empty()) std::tie(opts.width, opts.height) = parse_size(a.size);
  if (!a.fg_mask.empty()) opts.foreground_mask = load_mask_file(a.fg_mask);
  if (!a.occlusion.empty()) opts.occlusion_mask = load_mask_file(a.occlusion);
  if (!a.fill.empty()) {
    if (fs::exists(a.fill)) {
      opts.fill_image = mlsr::read_png(a.fill).image;
    } else {
      opts.fill_color = parse_fill(a.fill);
    }
  }
  const mlsr::RunWarpReport report =
      mlsr::run_warp(a.source, a.points, a.out, override_cfg, opts);
  if (!a.flow_out.empty()) {
    // Recomputing is cheap next to PNG encoding and keeps run_warp single-purpose.
    mlsr::PointsDocument doc = mlsr::load_points_document(a.points);
    if (override_cfg) {
      doc.alpha = override_cfg->alpha;
      doc.mode = override_cfg->mode;
    }
    mlsr::write_flow(a.flow_out, mlsr::dense_flow(doc.pairs(), doc.config(), opts.width,
                                                  opts.height, doc.external_m, par));
  }
  std::cout << "wrote " << a.out << " (mean displacement "
            << report.stats.mean_displacement << ", max "
            << report.stats.max_displacement << ")\n";
  return 0;
}

int cmd_animate(const std::string& source, const std::string& track,
                const std::string& out_dir, const std::string& size,
                const mlsr::ParallelOptions& par) {
  mlsr::WarpOptions opts;
  opts.parallel = par;
  if (!size.empty()) std::tie(opts.width, opts.height) = parse_size(size);
  const mlsr::AnimateReport report = mlsr::run_animate(source, track, out_dir, opts);
  std::cout << "wrote " << report.frames.size() << " frame(s) to " << out_dir << "\n";
  if (!report.failures.empty()) {
    for (const mlsr::FrameFailure& f : report.failures) {
      std::cerr << "frame " << f.index << " skipped: " << f.message << "\n";
    }
    std::cerr << report.failures.size() << " frame(s) skipped, see "
              << (fs::path(out_dir) / "failures.json").string() << "\n";
    return mlsr::exit_code_for(mlsr::ErrorKind::kDegenerate);
  }
  return 0;
}

struct PerturbArgs {
  std::string source, points, out, size;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  double delta_min = 0.05;
  double delta_max = 0.5;
  std::optional<double> delta;
};

int cmd_perturb(const PerturbArgs& a, const mlsr::ParallelOptions& par) {
  const mlsr::DecodedImage source = mlsr::read_png(a.source);
  const mlsr::PointsDocument doc = mlsr::load_points_document(a.points);
  mlsr::PerturbOptions opts;
  opts.trials = a.trials;
  opts.seed = a.seed;
  opts.delta_min = a.delta_min;
  opts.delta_max = a.delta_max;
  opts.delta_override = a.delta;
  opts.parallel = par;
  // The flow grid follows the source resolution unless told otherwise.
  opts.width = source.image.width();
  opts.height = source.image.height();
  if (!a.size.empty()) std::tie(opts.width, opts.height) = parse_size(a.size);
  const std::string text = mlsr::to_json(mlsr::run_perturb(doc, opts)) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    mlsr::write_file_bytes(a.out, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                            text.size()));
  }
  return 0;
}

int cmd_points(const std::string& source, const std::string& driving,
               const std::string& weights, const std::string& out, double alpha,
               const std::string& mode) {
  const mlsr::ImageBuffer src = mlsr::read_png(source).image;
  const mlsr::ImageBuffer drv = mlsr::read_png(driving).image;
  std::optional<mlsr::WeightBundle> bundle;
  if (!weights.empty()) bundle = mlsr::load_weights(weights);
  const mlsr::PairedPointSet pairs = mlsr::extract_paired_points(src, drv, bundle);
  mlsr::PointsDocument doc;
  doc.alpha = alpha;
  doc.mode = mlsr::parse_transform_mode(mode);
  doc.source.assign(pairs.source().begin(), pairs.source().end());
  doc.driving.assign(pairs.driving().begin(), pairs.driving().end());
  doc.validate();
  mlsr::save_points_document(doc, out);
  std::cout << "wrote " << doc.n() << " paired points to " << out << "\n";
  return 0;
}

int cmd_loss(const std::string& points, const mlsr::LossWeights& w, double tau,
             int grid) {
  const mlsr::PointsDocument doc = mlsr::load_points_document(points);
  w.validate();
  mlsr::LossTerms terms;
  terms.motion = mlsr::aggregate_motion_loss(doc, grid);
  terms.spreading = mlsr::aggregate_spreading_loss(doc, mlsr::SpreadConfig{tau});
  std::cout << mlsr::to_json(mlsr::total_loss(terms, w)) << "\n";
  return 0;
}

int cmd_serve(const std::string& host, int port, const std::string& session_dir,
              const mlsr::ParallelOptions& par) {
  mlsr::ServiceOptions opts;
  opts.host = host;
  opts.port = port;
  opts.parallel = par;
  if (!session_dir.empty()) opts.session_dir = fs::path(session_dir);
  mlsr::WarpService service(opts);
  const int bound = service.bind();
  std::cout << "listening on http://" << host << ":" << bound << "\n" << std::flush;
  service.listen();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MLS-based image reenactment motion engine"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (0 = MLSR_THREADS or hardware default)")
      ->check(CLI::NonNegativeNumber);

  WarpArgs warp;
  auto* w = app.add_subcommand("warp", "Warp a source image with a points document");
  w->add_option("--source", warp.source, "Source PNG")->required();
  w->add_option("--points", warp.points, "PointsDocument JSON")->required();
  w->add_option("--out", warp.out, "Output PNG")->required();
  w->add_option("--alpha", warp.alpha, "Weight falloff exponent");
  w->add_option("--mode", warp.mode, "affine|similarity|rigid|external");
  w->add_option("--fg-mask", warp.fg_mask, "Foreground mask PNG");
  w->add_option("--occlusion", warp.occlusion, "Occlusion mask PNG");
  w->add_option("--fill", warp.fill, "Occlusion fill: gray, r,g,b[,a] or a PNG path");
  w->add_option("--size", warp.size, "Output size N or WxH (default 256)");
  w->add_option("--flow-out", warp.flow_out, "Also write the dense flow field");
  w->add_flag("--no-timing", warp.no_timing, "Omit wall-clock timings from the sidecar");

  std::string an_source, an_track, an_out, an_size;
  auto* an = app.add_subcommand("animate", "Render one frame per track entry");
  an->add_option("--source", an_source, "Source PNG")->required();
  an->add_option("--track", an_track, "Track JSON")->required();
  an->add_option("--out-dir", an_out, "Output directory")->required();
  an->add_option("--size", an_size, "Output size N or WxH (default 256)");

  PerturbArgs pert;
  auto* pe = app.add_subcommand("perturb", "Measure flow damping under point noise");
  pe->add_option("--source", pert.source, "Source PNG (sets the flow grid)")->required();
  pe->add_option("--points", pert.points, "PointsDocument JSON")->required();
  pe->add_option("--trials", pert.trials, "Number of trials")->default_val(100);
  pe->add_option("--seed", pert.seed, "RNG seed")->default_val(0);
  pe->add_option("--delta-min", pert.delta_min, "Minimum noise magnitude")->default_val(0.05);
  pe->add_option("--delta-max", pert.delta_max, "Maximum noise magnitude")->default_val(0.5);
  pe->add_option("--delta", pert.delta, "Fixed noise magnitude for every trial");
  pe->add_option("--size", pert.size, "Flow grid N or WxH (default: source size)");
  pe->add_option("--out", pert.out, "Write the report here instead of stdout");

  std::string pt_source, pt_driving, pt_weights, pt_out, pt_mode = "affine";
  double pt_alpha = 1.0;
  auto* pt = app.add_subcommand("points", "Extract paired feature points");
  pt->add_option("--source", pt_source, "Source PNG")->required();
  pt->add_option("--driving", pt_driving, "Driving PNG")->required();
  pt->add_option("--weights", pt_weights, "Transformer weight file");
  pt->add_option("--out", pt_out, "Output PointsDocument JSON")->required();
  pt->add_option("--alpha", pt_alpha, "Alpha written into the document")->default_val(1.0);
  pt->add_option("--mode", pt_mode, "Mode written into the document")->default_val("affine");

  std::string lo_points;
  mlsr::LossWeights lw;
  double tau = 0.1;
  int grid = 16;
  auto* lo = app.add_subcommand("loss", "Evaluate the weighted training loss");
  lo->add_option("--points", lo_points, "PointsDocument JSON")->required();
  lo->add_option("--lambda-m", lw.lambda_m, "Motion loss weight")->default_val(1.0);
  lo->add_option("--lambda-f", lw.lambda_f, "Spreading loss weight")->default_val(1.0);
  lo->add_option("--lambda-p", lw.lambda_p, "Perceptual weight (reported, unavailable)")
      ->default_val(0.0);
  lo->add_option("--lambda-adv", lw.lambda_adv, "Adversarial weight (reported, unavailable)")
      ->default_val(0.0);
  lo->add_option("--tau", tau, "Spreading threshold")->default_val(0.1);
  lo->add_option("--grid", grid, "Motion loss sample grid side")->default_val(16);

  std::string sv_host = "127.0.0.1", sv_dir;
  int sv_port = 8080;
  auto* sv = app.add_subcommand("serve", "Run the HTTP warp service");
  sv->add_option("--port", sv_port, "TCP port (0 picks a free one)")->default_val(8080);
  sv->add_option("--host", sv_host, "Bind address")->default_val("127.0.0.1");
  sv->add_option("--session-dir", sv_dir, "Persist sessions under this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    mlsr::ParallelOptions par;
    par.threads = threads;
    if (w->parsed()) return cmd_warp(warp, par);
    if (an->parsed()) return cmd_animate(an_source, an_track, an_out, an_size, par);
    if (pe->parsed()) return cmd_perturb(pert, par);
    if (pt->parsed()) return cmd_points(pt_source, pt_driving, pt_weights, pt_out, pt_alpha,
                                        pt_mode);
    if (lo->parsed()) return cmd_loss(lo_points, lw, tau, grid);
    if (sv->parsed()) return cmd_serve(sv_host, sv_port, sv_dir, par);
  } catch (const mlsr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mlsr::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
