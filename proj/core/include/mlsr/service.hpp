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

#ifndef MLSR_SERVICE_HPP_
#define MLSR_SERVICE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlsr/pipeline.hpp"
#include "mlsr/points_document.hpp"
#include "mlsr/warp.hpp"

namespace mlsr {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  // Write-through directory for crash recovery; sessions found there are
  // reloaded at startup.
  std::optional<std::filesystem::path> session_dir;
  std::string cors_origin = "*";
  std::size_t max_upload_bytes = 16u * 1024u * 1024u;
  ParallelOptions parallel;
};

// Maps to an HTTP status in the REST layer.
class HttpStatusError : public std::runtime_error {
 public:
  HttpStatusError(int status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

struct PointsSnapshot {
  std::uint64_t version = 0;
  PointsDocument document;
};

struct WarpQuery {
  std::optional<TransformMode> mode;
  std::optional<double> alpha;
  int width = kDefaultOutputSize;
  int height = kDefaultOutputSize;
  std::optional<std::uint64_t> pinned_version;
};

struct WarpResponse {
  std::vector<std::uint8_t> png;
  std::uint64_t version = 0;
  FlowStats stats;
};

struct PerturbResponse {
  std::uint64_t version = 0;
  PerturbReport report;
};

// In-memory sessions with copy-on-write snapshots. Every mutation replaces
// the session's snapshot atomically; readers work on the snapshot they
// loaded and never observe a partial update. Writers to one session are
// serialized. Failures throw HttpStatusError.
class SessionStore {
 public:
  explicit SessionStore(ServiceOptions options);
  ~SessionStore();
  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  // Starts from PointsDocument::identity(10) at version 1.
  std::string create(std::span<const std::uint8_t> source_png,
                     std::optional<std::span<const std::uint8_t>> driving_png =
                         std::nullopt);
  std::uint64_t set_points(const std::string& id, PointsDocument doc);
  PointsSnapshot points(const std::string& id) const;

  WarpResponse warp(const std::string& id, const WarpQuery& query) const;
  // Flow change for a single displaced driving point; the session is not
  // modified. `angle` is in radians, 0 pointing along +x.
  PerturbResponse perturb(const std::string& id, std::size_t point_index,
                          double delta, double angle = 0.0, int size = 64) const;
  // Dense flow sampled on a size x size grid (size <= 64) as JSON.
  std::pair<std::uint64_t, std::string> flow_json(const std::string& id,
                                                  int size = 32) const;

  std::size_t size() const;
  const ServiceOptions& options() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// REST facade:
///   POST /sessions                 PNG body or multipart (source, driving)
///   GET  /sessions/{id}/points
///   PUT  /sessions/{id}/points     PointsDocument JSON
///   GET  /sessions/{id}/warp       ?mode=&alpha=&size=&version=
///   POST /sessions/{id}/perturb    {"point_index", "delta", "angle", "size"}
///   GET  /sessions/{id}/flow       ?size= (<= 64)
class WarpService {
 public:
  explicit WarpService(ServiceOptions options);
  ~WarpService();
  WarpService(const WarpService&) = delete;
  WarpService& operator=(const WarpService&) = delete;

  // Binds the listening socket and returns the bound port.
  int bind();
  // Serves until stop(); requires a prior bind().
  void listen();
  // bind() + listen() on a background thread; returns the port.
  int start();
  void stop();

  SessionStore& store();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mlsr

#endif  // MLSR_SERVICE_HPP_
