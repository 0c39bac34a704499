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

#include "mlsr/attention.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mlsr/error.hpp"

namespace mlsr {
namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInputError(std::string(what) + " contains non-finite values");
  }
}

void softmax_rows(Matrix& scores) {
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    auto row = scores.row(r);
    const double peak = row.maxCoeff();
    row = (row.array() - peak).exp();
    row /= row.sum();
  }
}

Matrix feed_forward(const Matrix& x, const FeedForwardWeights& w) {
  Matrix hidden = x * w.w1;
  hidden.rowwise() += w.b1;
  hidden = hidden.cwiseMax(0.0);
  Matrix out = hidden * w.w2;
  out.rowwise() += w.b2;
  return out;
}

void check_attention_weights(const AttentionWeights& w, int dim, int head_dim,
                             const std::string& name) {
  auto check = [&](const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                   const std::string& field) {
    if (m.rows() != rows || m.cols() != cols) {
      throw ShapeError(name + "." + field + " is " + std::to_string(m.rows()) +
                       "x" + std::to_string(m.cols()) + ", expected " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
  };
  for (int h = 0; h < kAttentionHeads; ++h) {
    const auto idx = static_cast<std::size_t>(h);
    check(w.query[idx], dim, head_dim, "query." + std::to_string(h));
    check(w.key[idx], dim, head_dim, "key." + std::to_string(h));
    check(w.value[idx], dim, head_dim, "value." + std::to_string(h));
  }
  check(w.output, dim, dim, "output");
}

void check_feed_forward(const FeedForwardWeights& w, int dim, int hidden,
                        const std::string& name) {
  if (w.w1.rows() != dim || w.w1.cols() != hidden || w.b1.cols() != hidden ||
      w.w2.rows() != hidden || w.w2.cols() != dim || w.b2.cols() != dim) {
    throw ShapeError(name + " feed-forward shapes disagree with dim " +
                     std::to_string(dim) + " and hidden width " +
                     std::to_string(hidden));
  }
}

AttentionWeights zero_attention(int dim, int head_dim) {
  AttentionWeights w;
  for (int h = 0; h < kAttentionHeads; ++h) {
    const auto idx = static_cast<std::size_t>(h);
    w.query[idx] = Matrix::Zero(dim, head_dim);
    w.key[idx] = Matrix::Zero(dim, head_dim);
    w.value[idx] = Matrix::Zero(dim, head_dim);
  }
  w.output = Matrix::Zero(dim, dim);
  return w;
}

FeedForwardWeights zero_feed_forward(int dim, int hidden) {
  return {Matrix::Zero(dim, hidden), RowVector::Zero(hidden),
          Matrix::Zero(hidden, dim), RowVector::Zero(dim)};
}

class StubInitializer {
 public:
  explicit StubInitializer(std::uint64_t seed) : rng_(seed) {}

  template <typename Derived>
  void fill(Eigen::MatrixBase<Derived>& m, double limit) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        m(r, c) = static_cast<float>(limit * (2.0 * uniform() - 1.0));
      }
    }
  }

  void xavier(Matrix& m) {
    fill(m, std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols())));
  }

 private:
  // 53-bit uniform in [0,1), independent of the standard library's
  // distribution implementation.
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 rng_;
};

}  // namespace

Matrix positional_encoding(int length, int dim) {
  if (dim <= 0 || dim % 2 != 0) {
    throw ShapeError("positional encoding needs a positive even dimension, got " +
                     std::to_string(dim));
  }
  if (length < 0) throw ShapeError("negative sequence length");
  Matrix pe(length, dim);
  for (int i = 0; i < dim / 2; ++i) {
    const double freq = std::pow(10000.0, 2.0 * i / dim);
    for (int pos = 0; pos < length; ++pos) {
      pe(pos, 2 * i) = std::sin(pos / freq);
      pe(pos, 2 * i + 1) = std::cos(pos / freq);
    }
  }
  return pe;
}

Matrix with_positions(const Matrix& x) {
  return x + positional_encoding(static_cast<int>(x.rows()),
                                 static_cast<int>(x.cols()));
}

AttentionOutput scaled_dot_attention(const Matrix& q, const Matrix& k,
                                     const Matrix& v, int d_k,
                                     bool encode_positions) {
  if (q.cols() != k.cols()) {
    throw ShapeError("query width " + std::to_string(q.cols()) +
                     " differs from key width " + std::to_string(k.cols()));
  }
  if (k.rows() != v.rows()) {
    throw ShapeError("key and value row counts differ (" +
                     std::to_string(k.rows()) + " vs " +
                     std::to_string(v.rows()) + ")");
  }
  if (d_k != k.cols() || d_k <= 0) {
    throw ShapeError("d_k must equal the key width " + std::to_string(k.cols()));
  }
  if (k.rows() == 0) throw ShapeError("attention needs at least one key");
  require_finite(q, "query");
  require_finite(k, "key");
  require_finite(v, "value");

  AttentionOutput out;
  if (encode_positions) {
    const Matrix pk = with_positions(k);
    out.attention = with_positions(q) * pk.transpose() / std::sqrt(double(d_k));
    softmax_rows(out.attention);
    out.values = out.attention * with_positions(v);
  } else {
    out.attention = q * k.transpose() / std::sqrt(double(d_k));
    softmax_rows(out.attention);
    out.values = out.attention * v;
  }
  return out;
}

std::pair<Matrix, std::array<Matrix, kAttentionHeads>>
multi_head_attention_with_rows(const Matrix& q, const Matrix& k,
                               const Matrix& v, const AttentionWeights& w,
                               const AttentionOptions& opts) {
  const Eigen::Index dim = w.output.rows();
  if (dim % kAttentionHeads != 0) {
    throw ShapeError("model width " + std::to_string(dim) +
                     " is not divisible by " + std::to_string(kAttentionHeads) +
                     " heads");
  }
  if (q.cols() != dim || k.cols() != dim || v.cols() != dim) {
    throw ShapeError("attention inputs must have width " + std::to_string(dim));
  }
  if (k.rows() != v.rows()) throw ShapeError("key and value row counts differ");
  const int head_dim = static_cast<int>(dim / kAttentionHeads);
  check_attention_weights(w, static_cast<int>(dim), head_dim, "attention");

  const Matrix pq = opts.positional_encoding ? with_positions(q) : q;
  const Matrix pk = opts.positional_encoding ? with_positions(k) : k;
  const Matrix pv = opts.positional_encoding ? with_positions(v) : v;

  Matrix concat(q.rows(), dim);
  std::array<Matrix, kAttentionHeads> rows;
  for (int h = 0; h < kAttentionHeads; ++h) {
    const auto idx = static_cast<std::size_t>(h);
    AttentionOutput head =
        scaled_dot_attention(pq * w.query[idx], pk * w.key[idx],
                             pv * w.value[idx], head_dim, false);
    concat.middleCols(h * head_dim, head_dim) = head.values;
    rows[idx] = std::move(head.attention);
  }
  return {concat * w.output, std::move(rows)};
}

Matrix multi_head_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                            const AttentionWeights& w,
                            const AttentionOptions& opts) {
  return multi_head_attention_with_rows(q, k, v, w, opts).first;
}

Matrix transformer_delta(const Matrix& enc_input, const Matrix& dec_input,
                         const WeightBundle& w, const AttentionOptions& opts) {
  if (enc_input.cols() != w.dim || dec_input.cols() != w.dim) {
    throw ShapeError("embeddings must have width " + std::to_string(w.dim));
  }
  require_finite(enc_input, "encoder input");
  require_finite(dec_input, "decoder input");

  Matrix enc = enc_input + multi_head_attention(enc_input, enc_input, enc_input,
                                                w.encoder_self, opts);
  enc += feed_forward(enc, w.encoder_ff);

  Matrix dec = dec_input + multi_head_attention(dec_input, dec_input, dec_input,
                                                w.decoder_self, opts);
  dec += multi_head_attention(dec, enc, enc, w.decoder_cross, opts);
  return feed_forward(dec, w.decoder_ff);
}

PairedEmbeddings pair_transform(const Matrix& l_s, const Matrix& l_d,
                                const WeightBundle& w,
                                const AttentionOptions& opts) {
  if (l_s.rows() != l_d.rows() || l_s.cols() != l_d.cols()) {
    throw ShapeError("source embedding is " + std::to_string(l_s.rows()) + "x" +
                     std::to_string(l_s.cols()) + " but driving is " +
                     std::to_string(l_d.rows()) + "x" +
                     std::to_string(l_d.cols()));
  }
  if (l_s.rows() < 1) throw ShapeError("embeddings need at least one row");
  return {l_s + transformer_delta(l_s, l_d, w, opts),
          l_d + transformer_delta(l_d, l_s, w, opts)};
}

WeightBundle WeightBundle::zeros(int dim, int ff_hidden) {
  if (dim <= 0 || dim % kAttentionHeads != 0 || ff_hidden <= 0) {
    throw ShapeError("dim must be a positive multiple of 4 and ff_hidden positive");
  }
  WeightBundle b;
  b.dim = dim;
  b.ff_hidden = ff_hidden;
  const int hd = dim / kAttentionHeads;
  b.encoder_self = zero_attention(dim, hd);
  b.decoder_self = zero_attention(dim, hd);
  b.decoder_cross = zero_attention(dim, hd);
  b.encoder_ff = zero_feed_forward(dim, ff_hidden);
  b.decoder_ff = zero_feed_forward(dim, ff_hidden);
  return b;
}

WeightBundle WeightBundle::stub(std::uint64_t seed, int dim, int ff_hidden) {
  WeightBundle b = zeros(dim, ff_hidden);
  StubInitializer init(seed);
  for (AttentionWeights* a : {&b.encoder_self, &b.decoder_self, &b.decoder_cross}) {
    for (int h = 0; h < kAttentionHeads; ++h) {
      const auto idx = static_cast<std::size_t>(h);
      init.xavier(a->query[idx]);
      init.xavier(a->key[idx]);
      init.xavier(a->value[idx]);
    }
    init.xavier(a->output);
  }
  for (FeedForwardWeights* f : {&b.encoder_ff, &b.decoder_ff}) {
    init.xavier(f->w1);
    init.fill(f->b1, 0.01);
    init.xavier(f->w2);
    init.fill(f->b2, 0.01);
  }
  return b;
}

void WeightBundle::validate() const {
  if (heads != kAttentionHeads) {
    throw ShapeError("engine requires " + std::to_string(kAttentionHeads) +
                     " attention heads, bundle declares " + std::to_string(heads));
  }
  if (dim <= 0 || dim % heads != 0) {
    throw ShapeError("dim " + std::to_string(dim) + " is not divisible by " +
                     std::to_string(heads) + " heads");
  }
  const int hd = head_dim();
  check_attention_weights(encoder_self, dim, hd, "encoder_self");
  check_attention_weights(decoder_self, dim, hd, "decoder_self");
  check_attention_weights(decoder_cross, dim, hd, "decoder_cross");
  check_feed_forward(encoder_ff, dim, ff_hidden, "encoder");
  check_feed_forward(decoder_ff, dim, ff_hidden, "decoder");
}

namespace {

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}
bool same(const RowVector& a, const RowVector& b) {
  return a.cols() == b.cols() && a == b;
}
bool same(const AttentionWeights& a, const AttentionWeights& b) {
  for (std::size_t h = 0; h < kAttentionHeads; ++h) {
    if (!same(a.query[h], b.query[h]) || !same(a.key[h], b.key[h]) ||
        !same(a.value[h], b.value[h])) {
      return false;
    }
  }
  return same(a.output, b.output);
}
bool same(const FeedForwardWeights& a, const FeedForwardWeights& b) {
  return same(a.w1, b.w1) && same(a.b1, b.b1) && same(a.w2, b.w2) &&
         same(a.b2, b.b2);
}

}  // namespace

bool operator==(const WeightBundle& a, const WeightBundle& b) {
  return a.dim == b.dim && a.heads == b.heads && a.ff_hidden == b.ff_hidden &&
         same(a.encoder_self, b.encoder_self) &&
         same(a.encoder_ff, b.encoder_ff) &&
         same(a.decoder_self, b.decoder_self) &&
         same(a.decoder_cross, b.decoder_cross) &&
         same(a.decoder_ff, b.decoder_ff);
}

}  // namespace mlsr
