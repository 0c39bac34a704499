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

#include "mlsr/flow_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlsr/error.hpp"
#include "mlsr/image_io.hpp"

namespace mlsr {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "mlsr-flow";
constexpr const char* kConvention =
    "normalized source-frame sampling coordinates per driving-frame pixel; "
    "origin top-left, x right, y down; row-major (x, y) pairs";

std::uint32_t swap_if_big(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) |
           (v >> 24);
  }
}

json header_for(const FlowField& flow, const char* encoding) {
  return {{"format", kFormat},       {"version", 1},
          {"width", flow.width()},   {"height", flow.height()},
          {"encoding", encoding},    {"convention", kConvention}};
}

void check_header(const json& h) {
  if (!h.is_object() || h.value("format", "") != kFormat) {
    throw FormatError("format", "not an mlsr-flow file");
  }
  if (h.value("version", 0) != 1) {
    throw FormatError("version", "unsupported flow format version");
  }
  if (!h.contains("width") || !h["width"].is_number_integer() ||
      h["width"].get<long long>() <= 0 || !h.contains("height") ||
      !h["height"].is_number_integer() || h["height"].get<long long>() <= 0) {
    throw FormatError("width/height", "missing or non-positive dimensions");
  }
}

}  // namespace

void write_flow_binary(const std::filesystem::path& path, const FlowField& flow) {
  std::string header = header_for(flow, "f32le").dump();
  header.push_back('\n');
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() + flow.values().size() * 8);
  for (const Point2& p : flow.values()) {
    for (double v : {p.x, p.y}) {
      const std::uint32_t bits =
          swap_if_big(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      const auto* b = reinterpret_cast<const std::uint8_t*>(&bits);
      bytes.insert(bytes.end(), b, b + 4);
    }
  }
  write_file_bytes(path, bytes);
}

FlowField read_flow_binary(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  const auto* nl = static_cast<const std::uint8_t*>(
      std::memchr(bytes.data(), '\n', bytes.size()));
  if (nl == nullptr) throw FormatError("header", "missing header line");
  json header;
  try {
    header = json::parse(bytes.data(), nl);
  } catch (const json::parse_error& e) {
    throw FormatError("header", e.what());
  }
  check_header(header);
  if (header.value("encoding", "") != "f32le") {
    throw FormatError("encoding", "binary flow must use f32le");
  }
  const int w = header["width"].get<int>();
  const int h = header["height"].get<int>();
  const std::size_t offset = static_cast<std::size_t>(nl - bytes.data()) + 1;
  const std::size_t expected = static_cast<std::size_t>(w) *
                               static_cast<std::size_t>(h) * 8;
  if (bytes.size() - offset != expected) {
    throw FormatError("payload", "expected " + std::to_string(expected) +
                                     " bytes, found " +
                                     std::to_string(bytes.size() - offset));
  }
  std::vector<Point2> map(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (std::size_t i = 0; i < map.size(); ++i) {
    float xy[2];
    for (int k = 0; k < 2; ++k) {
      std::uint32_t bits;
      std::memcpy(&bits, bytes.data() + offset + i * 8 + k * 4, 4);
      xy[k] = std::bit_cast<float>(swap_if_big(bits));
    }
    map[i] = {xy[0], xy[1]};
  }
  return FlowField(w, h, std::move(map));
}

std::string flow_to_json(const FlowField& flow) {
  if (flow.width() > kJsonFlowLimit || flow.height() > kJsonFlowLimit) {
    throw InvalidInputError("JSON flow export is limited to " +
                            std::to_string(kJsonFlowLimit) + "x" +
                            std::to_string(kJsonFlowLimit));
  }
  json doc = header_for(flow, "json");
  json data = json::array();
  for (const Point2& p : flow.values()) {
    data.push_back(static_cast<float>(p.x));
    data.push_back(static_cast<float>(p.y));
  }
  doc["data"] = std::move(data);
  return doc.dump();
}

FlowField flow_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  check_header(doc);
  const int w = doc["width"].get<int>();
  const int h = doc["height"].get<int>();
  if (!doc.contains("data") || !doc["data"].is_array() ||
      doc["data"].size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 2) {
    throw FormatError("data", "expected " + std::to_string(w * h * 2) + " numbers");
  }
  std::vector<Point2> map(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  const json& data = doc["data"];
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (!data[2 * i].is_number() || !data[2 * i + 1].is_number()) {
      throw FormatError("data", "non-numeric entry at pair " + std::to_string(i));
    }
    map[i] = {data[2 * i].get<double>(), data[2 * i + 1].get<double>()};
  }
  return FlowField(w, h, std::move(map));
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
  if (flow.width() <= kJsonFlowLimit && flow.height() <= kJsonFlowLimit) {
    const std::string text = flow_to_json(flow);
    write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                     text.size()));
  } else {
    write_flow_binary(path, flow);
  }
}

FlowField read_flow(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  const auto* nl = static_cast<const std::uint8_t*>(
      std::memchr(bytes.data(), '\n', bytes.size()));
  if (nl == nullptr) {
    return flow_from_json(std::string(bytes.begin(), bytes.end()));
  }
  return read_flow_binary(path);
}

}  // namespace mlsr
