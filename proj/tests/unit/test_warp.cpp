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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "../oracles.hpp"
#include "mlsr/error.hpp"
#include "mlsr/image.hpp"
#include "mlsr/mls.hpp"
#include "mlsr/parallel.hpp"
#include "mlsr/warp.hpp"

namespace mlsr {
namespace {

ImageBuffer random_image(oracle::Rng& rng, int w, int h, int c) {
  ImageBuffer img(w, h, c);
  for (float& v : img.mutable_pixels()) v = static_cast<float>(rng.uniform());
  return img;
}

FlowField random_flow(oracle::Rng& rng, int w, int h) {
  FlowField f(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) f.at(c, r) = rng.point(-0.2, 1.2);
  }
  return f;
}

PairedPointSet random_pairs(oracle::Rng& rng, std::size_t n) {
  return PairedPointSet(oracle::random_points(rng, n), oracle::random_points(rng, n));
}

TEST(DenseFlow, EqualsPerPixelMotion) {
  oracle::Rng rng(31);
  const PairedPointSet pairs = random_pairs(rng, 10);
  for (TransformMode mode : {TransformMode::kAffine, TransformMode::kSimilarity,
                             TransformMode::kRigid}) {
    MlsConfig cfg;
    cfg.mode = mode;
    const FlowField flow = dense_flow(pairs, cfg, 23, 17);
    for (int r = 0; r < 17; ++r) {
      for (int c = 0; c < 23; ++c) {
        EXPECT_EQ(flow.at(c, r), motion_at(pixel_center(c, r, 23, 17), pairs, cfg));
      }
    }
  }
}

TEST(DenseFlow, IdentityAndTranslationLaws) {
  oracle::Rng rng(37);
  const auto drv = oracle::random_points(rng, 10);
  const Point2 t{0.07, -0.04};
  std::vector<Point2> moved;
  for (Point2 d : drv) moved.push_back(d + t);
  const FlowField id = dense_flow(PairedPointSet(drv, drv), MlsConfig{}, 32, 32);
  const FlowField tr = dense_flow(PairedPointSet(moved, drv), MlsConfig{}, 32, 32);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 32; ++c) {
      const Point2 x = pixel_center(c, r, 32, 32);
      EXPECT_LE(distance(id.at(c, r), x), 1e-12);
      EXPECT_LE(distance(tr.at(c, r), x + t), 1e-12);
    }
  }
}

TEST(DenseFlow, ExternalModeNeedsMatrix) {
  oracle::Rng rng(41);
  MlsConfig cfg;
  cfg.mode = TransformMode::kExternal;
  EXPECT_THROW(dense_flow(random_pairs(rng, 3), cfg, 4, 4), ConfigurationError);
  EXPECT_NO_THROW(dense_flow(random_pairs(rng, 3), cfg, 4, 4, TransformMatrix::identity()));
  EXPECT_THROW(dense_flow(random_pairs(rng, 3), MlsConfig{}, 0, 4), InvalidInputError);
}

TEST(DenseFlow, ThreadCountDoesNotChangeBits) {
  oracle::Rng rng(43);
  const PairedPointSet pairs = random_pairs(rng, 10);
  const FlowField one = dense_flow(pairs, MlsConfig{}, 64, 48, std::nullopt, {1});
  for (int threads : {2, 3, 8}) {
    EXPECT_TRUE(one == dense_flow(pairs, MlsConfig{}, 64, 48, std::nullopt, {threads}));
  }
}

TEST(Flow, RejectsNonFinite) {
  EXPECT_THROW(FlowField(2, 1, {{0, 0}, {NAN, 0}}), InvalidInputError);
  EXPECT_THROW(FlowField(2, 2, {{0, 0}}), ShapeError);
}

TEST(BackwardWarp, IdentityFlowReproducesImage) {
  oracle::Rng rng(47);
  const ImageBuffer img = random_image(rng, 37, 29, 3);
  const ImageBuffer out = backward_warp(img, FlowField::identity(37, 29));
  for (std::size_t i = 0; i < img.pixels().size(); ++i) {
    EXPECT_NEAR(out.pixels()[i], img.pixels()[i], 1e-6);
  }
}

TEST(BackwardWarp, MatchesBilinearOracle) {
  oracle::Rng rng(53);
  const ImageBuffer img = random_image(rng, 19, 13, 4);
  const FlowField flow = random_flow(rng, 11, 9);
  const ImageBuffer out = backward_warp(img, flow);
  ASSERT_EQ(out.width(), 11);
  ASSERT_EQ(out.height(), 9);
  ASSERT_EQ(out.channels(), 4);
  for (int r = 0; r < 9; ++r) {
    for (int c = 0; c < 11; ++c) {
      for (int ch = 0; ch < 4; ++ch) {
        const double want = oracle::bilinear(
            [&](int x, int y) { return double(img.at(x, y, ch)); }, 19, 13, flow.at(c, r));
        EXPECT_NEAR(out.at(c, r, ch), want, 1e-6);
      }
    }
  }
}

TEST(BackwardWarp, LinearInImageAndStaysInRange) {
  oracle::Rng rng(59);
  for (int trial = 0; trial < 20; ++trial) {
    const ImageBuffer a = random_image(rng, 16, 16, 1);
    const ImageBuffer b = random_image(rng, 16, 16, 1);
    ImageBuffer mix(16, 16, 1);
    for (std::size_t i = 0; i < mix.pixels().size(); ++i) {
      mix.mutable_pixels()[i] = 0.3f * a.pixels()[i] + 0.7f * b.pixels()[i];
    }
    const FlowField flow = random_flow(rng, 16, 16);
    const ImageBuffer wa = backward_warp(a, flow), wb = backward_warp(b, flow);
    const ImageBuffer wm = backward_warp(mix, flow);
    for (std::size_t i = 0; i < wm.pixels().size(); ++i) {
      EXPECT_NEAR(wm.pixels()[i], 0.3f * wa.pixels()[i] + 0.7f * wb.pixels()[i], 1e-6);
      EXPECT_GE(wm.pixels()[i], 0.0f);
      EXPECT_LE(wm.pixels()[i], 1.0f);
    }
  }
}

TEST(BackwardWarp, ThreadCountDoesNotChangeBits) {
  oracle::Rng rng(61);
  const ImageBuffer img = random_image(rng, 40, 40, 3);
  const FlowField flow = random_flow(rng, 50, 30);
  const ImageBuffer one = backward_warp(img, flow, {1});
  EXPECT_TRUE(one == backward_warp(img, flow, {2}));
  EXPECT_TRUE(one == backward_warp(img, flow, {8}));
}

TEST(SampleBilinear, ClampsToEdge) {
  ImageBuffer img(2, 1, 1, std::vector<float>{0.2f, 0.8f});
  EXPECT_FLOAT_EQ(sample_bilinear(img, {-5.0, 0.5}, 0), 0.2f);
  EXPECT_FLOAT_EQ(sample_bilinear(img, {5.0, 0.5}, 0), 0.8f);
  EXPECT_FLOAT_EQ(sample_bilinear(img, {0.5, 0.5}, 0), 0.5f);
}

TEST(Background, MaskBlendsTowardIdentity) {
  FlowField fg(2, 1, {{0.9, 0.9}, {0.1, 0.1}});
  const FlowField out = blend_background(fg, MaskBuffer(2, 1, std::vector<float>{1.0f, 0.0f}));
  EXPECT_EQ(out.at(0, 0), (Point2{0.9, 0.9}));
  EXPECT_EQ(out.at(1, 0), pixel_center(1, 0, 2, 1));
  EXPECT_THROW(blend_background(fg, MaskBuffer(3, 1, 1.0f)), ShapeError);
}

TEST(Occlusion, MixesWithFill) {
  ImageBuffer warped(1, 2, 3, 1.0f);
  const MaskBuffer mask(1, 2, std::vector<float>{0.25f, 1.0f});
  const std::vector<float> gray{0.5f};
  const ImageBuffer out = apply_occlusion(warped, mask, gray);
  EXPECT_FLOAT_EQ(out.at(0, 0, 1), 0.25f + 0.75f * 0.5f);
  EXPECT_FLOAT_EQ(out.at(0, 1, 2), 1.0f);
  const std::vector<float> rgb{0.0f, 0.5f, 1.0f};
  EXPECT_FLOAT_EQ(apply_occlusion(warped, mask, rgb).at(0, 0, 0), 0.25f);
  const std::vector<float> two{0.0f, 0.5f};
  EXPECT_THROW(apply_occlusion(warped, mask, two), ShapeError);
}

TEST(Metrics, EndpointError) {
  oracle::Rng rng(67);
  const FlowField a = random_flow(rng, 8, 8);
  std::vector<Point2> shifted;
  for (Point2 p : a.values()) shifted.push_back(p + Point2{0.3, 0.4});
  const FlowField b(8, 8, shifted);
  EXPECT_EQ(mean_endpoint_error(a, a), 0.0);
  EXPECT_NEAR(mean_endpoint_error(a, b), 0.5, 1e-12);
  EXPECT_EQ(mean_endpoint_error(a, b), mean_endpoint_error(b, a));
  EXPECT_NEAR(max_endpoint_error(a, b), 0.5, 1e-12);
  EXPECT_THROW(mean_endpoint_error(a, FlowField(4, 4)), ShapeError);
}

TEST(Metrics, StatsOfTranslation) {
  std::vector<Point2> map;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) map.push_back(pixel_center(c, r, 4, 4) + Point2{0.1, 0.0});
  }
  const FlowStats s = flow_stats(FlowField(4, 4, map));
  EXPECT_NEAR(s.mean_displacement, 0.1, 1e-15);
  EXPECT_NEAR(s.max_displacement, 0.1, 1e-15);
  EXPECT_NEAR(s.min_x, 0.225, 1e-15);
  EXPECT_NEAR(s.max_y, 0.875, 1e-15);
}

TEST(Metrics, DownsamplePicksNearestCells) {
  const FlowField id = FlowField::identity(8, 8);
  const FlowField small = downsample_flow(id, 2, 2);
  EXPECT_EQ(small.at(0, 0), id.at(2, 2));
  EXPECT_EQ(small.at(1, 1), id.at(6, 6));
  EXPECT_THROW(downsample_flow(id, 0, 2), InvalidInputError);
}

TEST(Threads, ResolveHonoursRequestAndEnvironment) {
  EXPECT_EQ(resolve_thread_count(3), 3);
  ::setenv("MLSR_THREADS", "2", 1);
  EXPECT_EQ(resolve_thread_count(0), 2);
  ::setenv("MLSR_THREADS", "junk", 1);
  EXPECT_GE(resolve_thread_count(0), 1);
  ::unsetenv("MLSR_THREADS");
  EXPECT_GE(resolve_thread_count(0), 1);
}

TEST(Threads, PartitionCoversEveryRowOnce) {
  std::vector<int> hits(101, 0);
  parallel_for_rows(101, 7, [&](int b, int e) {
    for (int r = b; r < e; ++r) ++hits[static_cast<std::size_t>(r)];
  });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for_rows(10, 4, [](int b, int) {
                 if (b > 0) throw InvalidInputError("boom");
               }),
               InvalidInputError);
}

}  // namespace
}  // namespace mlsr
