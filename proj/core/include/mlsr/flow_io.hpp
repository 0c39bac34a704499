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

#ifndef MLSR_FLOW_IO_HPP_
#define MLSR_FLOW_IO_HPP_

#include <filesystem>
#include <string>

#include "mlsr/warp.hpp"

namespace mlsr {

// Largest field written as pure JSON.
inline constexpr int kJsonFlowLimit = 64;

/// Binary export: one line of JSON header (format, version, width, height,
/// encoding, convention) terminated by '\n', followed by width*height
/// row-major (x, y) pairs of little-endian 32-bit floats.
void write_flow_binary(const std::filesystem::path& path,
                       const FlowField& flow);
FlowField read_flow_binary(const std::filesystem::path& path);

/// Fully-JSON export, only for fields up to 64x64.
std::string flow_to_json(const FlowField& flow);
FlowField flow_from_json(const std::string& text);

// Picks JSON for small fields and binary otherwise; read_flow detects either.
void write_flow(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow(const std::filesystem::path& path);

}  // namespace mlsr

#endif  // MLSR_FLOW_IO_HPP_
