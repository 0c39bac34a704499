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

// Weight file layout:
//
//   PFPW1\n
//   heads 4\n
//   dim <D>\n
//   ff_hidden <H>\n
//   tensors <count>\n
//   tensor <name> <rows> <cols>\n       (one line per tensor, fixed order)
//   payload_bytes <bytes>\n
//   checksum fnv1a64 <16 hex digits>\n  (over the payload bytes)
//   end\n
//   <payload: little-endian float32, tensors in header order, row-major>

#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "mlsr/attention.hpp"
#include "mlsr/error.hpp"
#include "mlsr/image_io.hpp"

namespace mlsr {
namespace {

constexpr std::string_view kMagic = "PFPW1";

struct TensorRef {
  std::string name;
  Eigen::Index rows;
  Eigen::Index cols;
  double* data;
};

std::vector<TensorRef> tensor_table(WeightBundle& b) {
  std::vector<TensorRef> table;
  auto add = [&](std::string name, auto& m) {
    table.push_back({std::move(name), m.rows(), m.cols(), m.data()});
  };
  auto add_attention = [&](const std::string& prefix, AttentionWeights& a) {
    for (std::size_t h = 0; h < kAttentionHeads; ++h) {
      add(prefix + ".query." + std::to_string(h), a.query[h]);
      add(prefix + ".key." + std::to_string(h), a.key[h]);
      add(prefix + ".value." + std::to_string(h), a.value[h]);
    }
    add(prefix + ".output", a.output);
  };
  auto add_ff = [&](const std::string& prefix, FeedForwardWeights& f) {
    add(prefix + ".w1", f.w1);
    add(prefix + ".b1", f.b1);
    add(prefix + ".w2", f.w2);
    add(prefix + ".b2", f.b2);
  };
  add_attention("encoder_self", b.encoder_self);
  add_ff("encoder_ff", b.encoder_ff);
  add_attention("decoder_self", b.decoder_self);
  add_attention("decoder_cross", b.decoder_cross);
  add_ff("decoder_ff", b.decoder_ff);
  return table;
}

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) |
           (v >> 24);
  }
}

class HeaderReader {
 public:
  HeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::string line(const std::string& field) {
    const auto* begin = bytes_.data() + pos_;
    const auto* end = bytes_.data() + bytes_.size();
    const auto* nl = static_cast<const std::uint8_t*>(
        std::memchr(begin, '\n', static_cast<std::size_t>(end - begin)));
    if (nl == nullptr) throw FormatError(field, "header truncated");
    std::string out(begin, nl);
    pos_ = static_cast<std::size_t>(nl - bytes_.data()) + 1;
    return out;
  }

  // Reads "<key> <value...>" and returns the value tokens.
  std::istringstream keyed(const std::string& key) {
    std::istringstream in(line(key));
    std::string got;
    in >> got;
    if (got != key) {
      throw FormatError(key, "expected '" + key + "' line, found '" + got + "'");
    }
    return in;
  }

  long long integer(const std::string& key) {
    auto in = keyed(key);
    long long v = 0;
    if (!(in >> v)) throw FormatError(key, "missing integer value");
    return v;
  }

  std::size_t position() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_weights(const WeightBundle& bundle) {
  bundle.validate();
  WeightBundle copy = bundle;
  const auto table = tensor_table(copy);

  std::vector<std::uint8_t> payload;
  for (const TensorRef& t : table) {
    const std::size_t count = static_cast<std::size_t>(t.rows * t.cols);
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint32_t bits =
          to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(t.data[i])));
      const auto* p = reinterpret_cast<const std::uint8_t*>(&bits);
      payload.insert(payload.end(), p, p + sizeof(bits));
    }
  }

  std::ostringstream header;
  header << kMagic << '\n'
         << "heads " << bundle.heads << '\n'
         << "dim " << bundle.dim << '\n'
         << "ff_hidden " << bundle.ff_hidden << '\n'
         << "tensors " << table.size() << '\n';
  for (const TensorRef& t : table) {
    header << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64,
                fnv1a64(payload.data(), payload.size()));
  header << "payload_bytes " << payload.size() << '\n'
         << "checksum fnv1a64 " << hex << '\n'
         << "end\n";

  const std::string text = header.str();
  std::vector<std::uint8_t> out(text.begin(), text.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

WeightBundle decode_weights(const std::vector<std::uint8_t>& bytes) {
  HeaderReader reader(bytes);
  if (bytes.size() < kMagic.size() + 1 ||
      std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0 ||
      reader.line("magic") != kMagic) {
    throw FormatError("magic", "not a PFPW1 weight file");
  }
  const long long heads = reader.integer("heads");
  if (heads != kAttentionHeads) {
    throw FormatError("heads", "engine requires " +
                                   std::to_string(kAttentionHeads) +
                                   " attention heads, file declares " +
                                   std::to_string(heads));
  }
  const long long dim = reader.integer("dim");
  if (dim <= 0 || dim % kAttentionHeads != 0 || dim > (1 << 16)) {
    throw FormatError("dim", "invalid model width " + std::to_string(dim));
  }
  const long long hidden = reader.integer("ff_hidden");
  if (hidden <= 0 || hidden > (1 << 16)) {
    throw FormatError("ff_hidden", "invalid hidden width " + std::to_string(hidden));
  }

  WeightBundle bundle = WeightBundle::zeros(static_cast<int>(dim),
                                            static_cast<int>(hidden));
  const auto table = tensor_table(bundle);
  const long long count = reader.integer("tensors");
  if (count != static_cast<long long>(table.size())) {
    throw FormatError("tensors", "expected " + std::to_string(table.size()) +
                                     " tensors, header lists " +
                                     std::to_string(count));
  }
  std::size_t expected_bytes = 0;
  for (const TensorRef& t : table) {
    auto in = reader.keyed("tensor");
    std::string name;
    long long rows = -1, cols = -1;
    in >> name >> rows >> cols;
    if (name != t.name) {
      throw FormatError("tensor " + t.name,
                        "out of order or unknown tensor '" + name + "'");
    }
    if (rows != t.rows || cols != t.cols) {
      throw FormatError("tensor " + t.name,
                        "shape " + std::to_string(rows) + "x" +
                            std::to_string(cols) + " does not match " +
                            std::to_string(t.rows) + "x" +
                            std::to_string(t.cols));
    }
    expected_bytes += static_cast<std::size_t>(t.rows * t.cols) * 4;
  }
  const long long payload_bytes = reader.integer("payload_bytes");
  if (payload_bytes != static_cast<long long>(expected_bytes)) {
    throw FormatError("payload_bytes", "declares " + std::to_string(payload_bytes) +
                                           " bytes, shape table implies " +
                                           std::to_string(expected_bytes));
  }
  auto checksum_line = reader.keyed("checksum");
  std::string algo, digest;
  checksum_line >> algo >> digest;
  if (algo != "fnv1a64" || digest.size() != 16) {
    throw FormatError("checksum", "expected 'fnv1a64 <16 hex digits>'");
  }
  if (reader.line("end") != "end") throw FormatError("end", "missing end marker");

  const std::size_t start = reader.position();
  if (bytes.size() - start != expected_bytes) {
    throw FormatError("payload", "expected " + std::to_string(expected_bytes) +
                                     " payload bytes, found " +
                                     std::to_string(bytes.size() - start));
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016" PRIx64,
                fnv1a64(bytes.data() + start, expected_bytes));
  if (digest != hex) {
    throw FormatError("checksum", "payload digest " + std::string(hex) +
                                      " does not match header " + digest);
  }

  std::size_t offset = start;
  for (const TensorRef& t : table) {
    const std::size_t n = static_cast<std::size_t>(t.rows * t.cols);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t bits;
      std::memcpy(&bits, bytes.data() + offset, sizeof(bits));
      offset += sizeof(bits);
      const float v = std::bit_cast<float>(to_little_endian(bits));
      if (!std::isfinite(v)) {
        throw FormatError("tensor " + t.name, "contains non-finite values");
      }
      t.data[i] = v;
    }
  }
  return bundle;
}

WeightBundle load_weights(const std::filesystem::path& path) {
  return decode_weights(read_file_bytes(path));
}

void save_weights(const WeightBundle& bundle, const std::filesystem::path& path) {
  write_file_bytes(path, encode_weights(bundle));
}

}  // namespace mlsr
