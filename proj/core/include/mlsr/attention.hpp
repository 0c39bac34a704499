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

#ifndef MLSR_ATTENTION_HPP_
#define MLSR_ATTENTION_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "mlsr/image.hpp"
#include "mlsr/matrix.hpp"

namespace mlsr {

inline constexpr int kEmbeddingDim = 1024;
inline constexpr int kAttentionHeads = 4;
inline constexpr int kDefaultFeaturePoints = 10;

struct AttentionOptions {
  // Add the sinusoidal encoding of the row index to Q, K and V.
  bool positional_encoding = true;
};

/// Sinusoidal table: (pos, 2i) = sin(pos / 10000^(2i/dim)),
/// (pos, 2i+1) = cos(pos / 10000^(2i/dim)). `dim` must be even.
Matrix positional_encoding(int length, int dim);

// X + positional_encoding(rows(X), cols(X)).
Matrix with_positions(const Matrix& x);

struct AttentionOutput {
  Matrix values;
  // Row-stochastic (queries x keys) attention weights.
  Matrix attention;
};

/// softmax(P(q) P(k)^T / sqrt(d_k)) P(v). P is the identity when
/// `encode_positions` is false.
AttentionOutput scaled_dot_attention(const Matrix& q, const Matrix& k,
                                     const Matrix& v, int d_k,
                                     bool encode_positions = true);

// Q/K/V projections for each of the four heads plus the output projection
// applied to the concatenated heads.
struct AttentionWeights {
  std::array<Matrix, kAttentionHeads> query;  // dim x head_dim
  std::array<Matrix, kAttentionHeads> key;
  std::array<Matrix, kAttentionHeads> value;
  Matrix output;  // dim x dim
};

// Position-wise relu(x W1 + b1) W2 + b2.
struct FeedForwardWeights {
  Matrix w1;  // dim x hidden
  RowVector b1;
  Matrix w2;  // hidden x dim
  RowVector b2;
};

// Parameters of one encoder layer and one decoder layer. The same bundle
// serves both orderings of pair_transform.
struct WeightBundle {
  int dim = kEmbeddingDim;
  int heads = kAttentionHeads;
  int ff_hidden = kEmbeddingDim;

  AttentionWeights encoder_self;
  FeedForwardWeights encoder_ff;
  AttentionWeights decoder_self;
  AttentionWeights decoder_cross;
  FeedForwardWeights decoder_ff;

  int head_dim() const { return dim / heads; }

  static WeightBundle zeros(int dim = kEmbeddingDim,
                            int ff_hidden = kEmbeddingDim);
  // Deterministic Xavier-uniform parameters; every value is exactly
  // representable as a 32-bit float so bundles survive save/load unchanged.
  static WeightBundle stub(std::uint64_t seed, int dim = kEmbeddingDim,
                           int ff_hidden = kEmbeddingDim);

  // Throws ShapeError when any tensor disagrees with dim/heads/ff_hidden, or
  // when heads != 4.
  void validate() const;

  friend bool operator==(const WeightBundle& a, const WeightBundle& b);
};

/// Four projected heads, concatenated and mapped back through the output
/// projection. Positional encoding, when enabled, is added to q, k and v
/// before projection.
Matrix multi_head_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                            const AttentionWeights& w,
                            const AttentionOptions& opts = {});

// Same as multi_head_attention, also returning each head's attention rows.
std::pair<Matrix, std::array<Matrix, kAttentionHeads>>
multi_head_attention_with_rows(const Matrix& q, const Matrix& k,
                               const Matrix& v, const AttentionWeights& w,
                               const AttentionOptions& opts = {});

// T(enc_input, dec_input): encoder self-attention and feed-forward on the
// first argument; decoder self-attention, co-attention against the encoder
// output, then feed-forward on the second. The decoder feed-forward output
// is returned without a residual so zero weights give T = 0.
Matrix transformer_delta(const Matrix& enc_input, const Matrix& dec_input,
                         const WeightBundle& w,
                         const AttentionOptions& opts = {});

struct PairedEmbeddings {
  Matrix source;   // l_st
  Matrix driving;  // l_dt
};

/// l_st = l_s + T(l_s, l_d) and l_dt = l_d + T(l_d, l_s).
PairedEmbeddings pair_transform(const Matrix& l_s, const Matrix& l_d,
                                const WeightBundle& w,
                                const AttentionOptions& opts = {});

/// Deterministic stand-in for a trained image embedder. Row r holds
/// statistic r (luminance, variance, gradients, color) measured on a 32x32
/// grid of image blocks, tiled to `dim` columns.
Matrix stub_embedder(const ImageBuffer& image, int n = kDefaultFeaturePoints,
                     int dim = kEmbeddingDim);

// "PFPW1" weight files. See weights_io.cpp for the layout.
WeightBundle load_weights(const std::filesystem::path& path);
void save_weights(const WeightBundle& bundle,
                  const std::filesystem::path& path);
WeightBundle decode_weights(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_weights(const WeightBundle& bundle);

}  // namespace mlsr

#endif  // MLSR_ATTENTION_HPP_
