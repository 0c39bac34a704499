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
#include <filesystem>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "mlsr/attention.hpp"
#include "mlsr/error.hpp"
#include "mlsr/image.hpp"
#include "mlsr/pipeline.hpp"

namespace mlsr {
namespace {

Matrix random_matrix(oracle::Rng& rng, Eigen::Index rows, Eigen::Index cols,
                     double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-scale, scale);
  }
  return m;
}

ImageBuffer pattern_image(int w, int h, double phase) {
  ImageBuffer img(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.set(x, y, 0, static_cast<float>(0.5 + 0.5 * std::sin(0.2 * x + phase)));
      img.set(x, y, 1, static_cast<float>(y) / h);
      img.set(x, y, 2, ((x / 8 + y / 8) % 2) ? 0.9f : 0.1f);
    }
  }
  return img;
}

TEST(PositionalEncoding, SinCosPairs) {
  const Matrix pe = positional_encoding(5, 8);
  for (int pos = 0; pos < 5; ++pos) {
    for (int c = 0; c < 8; ++c) {
      EXPECT_NEAR(pe(pos, c), oracle::position_code(pos, c, 8), 1e-15);
    }
  }
  EXPECT_EQ(pe(0, 0), 0.0);
  EXPECT_EQ(pe(0, 1), 1.0);
  EXPECT_THROW(positional_encoding(3, 7), ShapeError);
}

TEST(ScaledDot, RowsAreDistributions) {
  oracle::Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix q = random_matrix(rng, 4, 6, 5.0);
    const Matrix k = random_matrix(rng, 7, 6, 5.0);
    const Matrix v = random_matrix(rng, 7, 4);
    const AttentionOutput out = scaled_dot_attention(q, k, v, 6);
    ASSERT_EQ(out.attention.rows(), 4);
    ASSERT_EQ(out.attention.cols(), 7);
    for (Eigen::Index r = 0; r < 4; ++r) {
      EXPECT_NEAR(out.attention.row(r).sum(), 1.0, 1e-12);
      EXPECT_GE(out.attention.row(r).minCoeff(), 0.0);
    }
  }
}

TEST(ScaledDot, PlainFormulaWithoutPositions) {
  oracle::Rng rng(2);
  const Matrix q = random_matrix(rng, 2, 4);
  const Matrix k = random_matrix(rng, 3, 4);
  const Matrix v = random_matrix(rng, 3, 2);
  const AttentionOutput out = scaled_dot_attention(q, k, v, 4, false);
  for (Eigen::Index i = 0; i < 2; ++i) {
    std::vector<double> s(3);
    double total = 0;
    for (Eigen::Index j = 0; j < 3; ++j) {
      double dot = 0;
      for (Eigen::Index c = 0; c < 4; ++c) dot += q(i, c) * k(j, c);
      total += s[j] = std::exp(dot / 2.0);
    }
    for (Eigen::Index c = 0; c < 2; ++c) {
      double want = 0;
      for (Eigen::Index j = 0; j < 3; ++j) want += s[j] / total * v(j, c);
      EXPECT_NEAR(out.values(i, c), want, 1e-12);
    }
  }
}

TEST(ScaledDot, ShapeErrors) {
  const Matrix a = Matrix::Ones(2, 4);
  EXPECT_THROW(scaled_dot_attention(a, Matrix::Ones(2, 3), Matrix::Ones(2, 3), 3), ShapeError);
  EXPECT_THROW(scaled_dot_attention(a, a, Matrix::Ones(3, 4), 4), ShapeError);
  EXPECT_THROW(scaled_dot_attention(a, a, a, 5), ShapeError);
}

TEST(MultiHead, MatchesNaiveLoops) {
  oracle::Rng rng(4);
  WeightBundle b = WeightBundle::stub(99, 8, 8);
  for (bool positions : {true, false}) {
    const Matrix q = random_matrix(rng, 2, 8);
    const Matrix k = random_matrix(rng, 3, 8);
    const Matrix v = random_matrix(rng, 3, 8);
    const Matrix got = multi_head_attention(q, k, v, b.decoder_cross, {positions});
    const oracle::Table want = oracle::multi_head(q, k, v, b.decoder_cross, positions);
    for (Eigen::Index r = 0; r < got.rows(); ++r) {
      for (Eigen::Index c = 0; c < got.cols(); ++c) {
        EXPECT_NEAR(got(r, c), want[r][c], 1e-10);
      }
    }
  }
}

TEST(Transformer, ZeroWeightsAreExactIdentity) {
  oracle::Rng rng(6);
  const WeightBundle zeros = WeightBundle::zeros(16, 8);
  const Matrix ls = random_matrix(rng, 5, 16, 3.0);
  const Matrix ld = random_matrix(rng, 5, 16, 3.0);
  const PairedEmbeddings out = pair_transform(ls, ld, zeros);
  EXPECT_TRUE(out.source == ls);
  EXPECT_TRUE(out.driving == ld);
}

TEST(Transformer, SourceOutputDependsOnDriving) {
  oracle::Rng rng(8);
  const WeightBundle b = WeightBundle::stub(5, 16, 16);
  const Matrix ls = random_matrix(rng, 4, 16);
  const Matrix ld = random_matrix(rng, 4, 16);
  Matrix ld2 = ld;
  ld2(2, 3) += 0.5;
  const Matrix a = pair_transform(ls, ld, b).source;
  const Matrix c = pair_transform(ls, ld2, b).source;
  EXPECT_GT((a - c).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Transformer, SwappingInputsSwapsOutputs) {
  oracle::Rng rng(10);
  const WeightBundle b = WeightBundle::stub(12, 16, 16);
  const Matrix ls = random_matrix(rng, 3, 16);
  const Matrix ld = random_matrix(rng, 3, 16);
  const PairedEmbeddings ab = pair_transform(ls, ld, b);
  const PairedEmbeddings ba = pair_transform(ld, ls, b);
  EXPECT_TRUE(ab.source == ba.driving);
  EXPECT_TRUE(ab.driving == ba.source);
}

TEST(Transformer, RejectsMismatchedShapes) {
  const WeightBundle b = WeightBundle::zeros(16, 8);
  EXPECT_THROW(pair_transform(Matrix::Zero(3, 16), Matrix::Zero(4, 16), b), ShapeError);
  EXPECT_THROW(pair_transform(Matrix::Zero(3, 12), Matrix::Zero(3, 12), b), ShapeError);
  EXPECT_THROW(WeightBundle::zeros(10, 8), ShapeError);
}

TEST(Stub, DeterministicAndFloatRepresentable) {
  const WeightBundle a = WeightBundle::stub(42, 16, 8);
  const WeightBundle b = WeightBundle::stub(42, 16, 8);
  const WeightBundle c = WeightBundle::stub(43, 16, 8);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  const double v = a.encoder_self.query[0](3, 2);
  EXPECT_EQ(v, static_cast<double>(static_cast<float>(v)));
  const double limit = std::sqrt(6.0 / (16 + 4));
  EXPECT_LE(a.encoder_self.query[1].cwiseAbs().maxCoeff(), limit);
}

TEST(WeightFile, RoundTripsBitExactly) {
  const WeightBundle b = WeightBundle::stub(7, 16, 12);
  const auto bytes = encode_weights(b);
  const std::string head(bytes.begin(), bytes.begin() + 6);
  EXPECT_EQ(head, "PFPW1\n");
  EXPECT_TRUE(decode_weights(bytes) == b);

  const auto path = std::filesystem::temp_directory_path() / "mlsr_weights_roundtrip.pfpw";
  save_weights(b, path);
  EXPECT_TRUE(load_weights(path) == b);
  std::filesystem::remove(path);
}

TEST(WeightFile, DetectsCorruption) {
  auto bytes = encode_weights(WeightBundle::stub(7, 16, 12));
  auto flipped = bytes;
  flipped[flipped.size() - 3] ^= 0x40;
  try {
    decode_weights(flipped);
    FAIL() << "corruption not detected";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.field(), "checksum");
  }
  auto truncated = bytes;
  truncated.resize(truncated.size() - 4);
  EXPECT_THROW(decode_weights(truncated), FormatError);
  std::vector<std::uint8_t> junk{'n', 'o', 'p', 'e', '\n'};
  EXPECT_THROW(decode_weights(junk), FormatError);
  EXPECT_THROW(load_weights("/nonexistent/weights.pfpw"), IoError);
}

TEST(Embedder, ShapeAndDeterminism) {
  const ImageBuffer img = pattern_image(64, 48, 0.0);
  const Matrix a = stub_embedder(img);
  EXPECT_EQ(a.rows(), kDefaultFeaturePoints);
  EXPECT_EQ(a.cols(), kEmbeddingDim);
  EXPECT_TRUE(a.allFinite());
  EXPECT_TRUE(a == stub_embedder(img));
  EXPECT_FALSE(a == stub_embedder(pattern_image(64, 48, 1.0)));
  EXPECT_THROW(stub_embedder(ImageBuffer()), InvalidInputError);
}

TEST(Extraction, IdenticalImagesWithZeroWeightsGiveIdenticalSets) {
  const ImageBuffer img = pattern_image(64, 64, 0.3);
  const PairedPointSet p = extract_paired_points(img, img, WeightBundle::zeros());
  ASSERT_EQ(p.size(), 10u);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p.source()[i], p.driving()[i]);
}

TEST(Extraction, AlwaysTenPointsAndSwapSymmetric) {
  const ImageBuffer a = pattern_image(40, 40, 0.0);
  const ImageBuffer b = pattern_image(72, 56, 2.0);
  const PairedPointSet ab = extract_paired_points(a, b);
  const PairedPointSet ba = extract_paired_points(b, a);
  ASSERT_EQ(ab.size(), 10u);
  for (std::size_t i = 0; i < ab.size(); ++i) {
    EXPECT_EQ(ab.source()[i], ba.driving()[i]);
    EXPECT_EQ(ab.driving()[i], ba.source()[i]);
    EXPECT_GE(ab.source()[i].x, 0.0);
    EXPECT_LE(ab.source()[i].x, 1.0);
  }
}

TEST(Extraction, RejectsNarrowWeights) {
  const ImageBuffer a = pattern_image(16, 16, 0.0);
  EXPECT_THROW(extract_paired_points(a, a, WeightBundle::zeros(16, 8)), ShapeError);
}

}  // namespace
}  // namespace mlsr
