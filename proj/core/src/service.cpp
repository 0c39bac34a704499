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

#include "mlsr/service.hpp"

#include <cinttypes>
#include <cstdio>
#include <map>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <string>
#include <thread>
#include <utility>

#include "httplib.h"
#include "json.hpp"
#include "mlsr/error.hpp"
#include "mlsr/flow_io.hpp"
#include "mlsr/image_io.hpp"

namespace mlsr {
namespace {

using nlohmann::json;

struct Snapshot {
  std::uint64_t version = 0;
  PointsDocument document;
};

struct Session {
  std::string id;
  std::shared_ptr<const DecodedImage> source;
  std::shared_ptr<const DecodedImage> driving;  // display only, may be null
  std::mutex writer;                            // serializes mutations
  mutable std::mutex snapshot_mutex;            // guards the pointer swap
  std::shared_ptr<const Snapshot> snapshot;

  std::shared_ptr<const Snapshot> load() const {
    std::lock_guard lock(snapshot_mutex);
    return snapshot;
  }
  void publish(std::shared_ptr<const Snapshot> next) {
    std::lock_guard lock(snapshot_mutex);
    snapshot = std::move(next);
  }
};

std::string new_session_id() {
  static std::mutex mutex;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mutex);
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64 "%016" PRIx64, rng(), rng());
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

DecodedImage decode_upload(std::span<const std::uint8_t> bytes, std::size_t limit,
                           const char* what) {
  if (bytes.size() > limit) {
    throw HttpStatusError(413, std::string(what) + " exceeds the upload limit");
  }
  try {
    return decode_png(bytes);
  } catch (const Error& e) {
    throw HttpStatusError(400, std::string(what) + " is not a decodable PNG: " +
                                   e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                   text.size()));
}

}  // namespace

// ---------------------------------------------------------------------------
// SessionStore
// ---------------------------------------------------------------------------

struct SessionStore::Impl {
  ServiceOptions options;
  mutable std::shared_mutex table_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;

  std::shared_ptr<Session> find(const std::string& id) const {
    std::shared_lock lock(table_mutex);
    const auto it = sessions.find(id);
    if (it == sessions.end()) {
      throw HttpStatusError(404, "unknown session '" + id + "'");
    }
    return it->second;
  }

  std::optional<std::filesystem::path> session_path(const std::string& id) const {
    if (!options.session_dir) return std::nullopt;
    return *options.session_dir / id;
  }

  void persist_points(const Session& s, const Snapshot& snap) const {
    const auto dir = session_path(s.id);
    if (!dir) return;
    const json j = {{"version", snap.version},
                    {"document", json::parse(to_json(snap.document))}};
    write_text(*dir / "points.json", j.dump(2) + "\n");
  }

  void persist_new(const Session& s, std::span<const std::uint8_t> source_png,
                   std::optional<std::span<const std::uint8_t>> driving_png) const {
    const auto dir = session_path(s.id);
    if (!dir) return;
    std::error_code ec;
    std::filesystem::create_directories(*dir, ec);
    if (ec) throw IoError("cannot create session directory " + dir->string());
    write_file_bytes(*dir / "source.png", source_png);
    if (driving_png) write_file_bytes(*dir / "driving.png", *driving_png);
    persist_points(s, *s.load());
  }

  void recover() {
    if (!options.session_dir) return;
    std::error_code ec;
    std::filesystem::create_directories(*options.session_dir, ec);
    for (const auto& entry :
         std::filesystem::directory_iterator(*options.session_dir, ec)) {
      if (!entry.is_directory()) continue;
      const auto dir = entry.path();
      try {
        auto s = std::make_shared<Session>();
        s->id = dir.filename().string();
        s->source = std::make_shared<const DecodedImage>(read_png(dir / "source.png"));
        if (std::filesystem::exists(dir / "driving.png")) {
          s->driving =
              std::make_shared<const DecodedImage>(read_png(dir / "driving.png"));
        }
        const auto bytes = read_file_bytes(dir / "points.json");
        const json j = json::parse(bytes.begin(), bytes.end());
        auto snap = std::make_shared<Snapshot>();
        snap->version = j.at("version").get<std::uint64_t>();
        snap->document = parse_points_document(j.at("document").dump());
        s->snapshot = std::move(snap);
        sessions.emplace(s->id, std::move(s));
      } catch (const std::exception&) {
        // Incomplete session directories are ignored.
      }
    }
  }
};

SessionStore::SessionStore(ServiceOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->recover();
}

SessionStore::~SessionStore() = default;

const ServiceOptions& SessionStore::options() const { return impl_->options; }

std::size_t SessionStore::size() const {
  std::shared_lock lock(impl_->table_mutex);
  return impl_->sessions.size();
}

std::string SessionStore::create(
    std::span<const std::uint8_t> source_png,
    std::optional<std::span<const std::uint8_t>> driving_png) {
  const std::size_t limit = impl_->options.max_upload_bytes;
  auto s = std::make_shared<Session>();
  s->source = std::make_shared<const DecodedImage>(
      decode_upload(source_png, limit, "source image"));
  if (driving_png) {
    s->driving = std::make_shared<const DecodedImage>(
        decode_upload(*driving_png, limit, "driving image"));
  }
  auto snap = std::make_shared<Snapshot>();
  snap->version = 1;
  snap->document = PointsDocument::identity(kDefaultFeaturePoints);
  s->snapshot = std::move(snap);

  std::unique_lock lock(impl_->table_mutex);
  do {
    s->id = new_session_id();
  } while (impl_->sessions.contains(s->id));
  impl_->sessions.emplace(s->id, s);
  lock.unlock();
  impl_->persist_new(*s, source_png, driving_png);
  return s->id;
}

std::uint64_t SessionStore::set_points(const std::string& id, PointsDocument doc) {
  const auto s = impl_->find(id);
  try {
    doc.validate();
  } catch (const Error& e) {
    throw HttpStatusError(422, e.what());
  }
  std::lock_guard writer(s->writer);
  auto next = std::make_shared<Snapshot>();
  next->version = s->load()->version + 1;
  next->document = std::move(doc);
  impl_->persist_points(*s, *next);
  s->publish(next);
  return next->version;
}

PointsSnapshot SessionStore::points(const std::string& id) const {
  const auto snap = impl_->find(id)->load();
  return {snap->version, snap->document};
}

WarpResponse SessionStore::warp(const std::string& id, const WarpQuery& query) const {
  const auto s = impl_->find(id);
  const auto snap = s->load();
  if (query.pinned_version && *query.pinned_version != snap->version) {
    throw HttpStatusError(409, "snapshot version " +
                                   std::to_string(*query.pinned_version) +
                                   " is no longer current (current " +
                                   std::to_string(snap->version) + ")");
  }
  PointsDocument doc = snap->document;
  if (query.mode) doc.mode = *query.mode;
  if (query.alpha) doc.alpha = *query.alpha;
  WarpOptions opts;
  opts.width = query.width;
  opts.height = query.height;
  opts.parallel = impl_->options.parallel;
  try {
    doc.validate();
    if (opts.width < 1 || opts.height < 1 || opts.width > 4096 || opts.height > 4096) {
      throw InvalidInputError("size must lie in [1, 4096]");
    }
  } catch (const Error& e) {
    throw HttpStatusError(422, e.what());
  }
  try {
    const WarpResult result = render_warp(s->source->image, doc, opts);
    return {encode_png(result.image, s->source->bit_depth), snap->version,
            result.stats};
  } catch (const DegenerateConfigurationError& e) {
    throw HttpStatusError(500, std::string("degenerate configuration: ") + e.what());
  }
}

PerturbResponse SessionStore::perturb(const std::string& id, std::size_t point_index,
                                      double delta, double angle, int size) const {
  const auto snap = impl_->find(id)->load();
  const PointsDocument& doc = snap->document;
  if (point_index >= doc.n()) {
    throw HttpStatusError(422, "point_index " + std::to_string(point_index) +
                                   " out of range for " + std::to_string(doc.n()) +
                                   " points");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta) || !std::isfinite(angle)) {
    throw HttpStatusError(422, "delta must be finite and nonnegative");
  }
  if (size < 1 || size > 512) throw HttpStatusError(422, "size must lie in [1, 512]");
  try {
    PerturbReport r = perturb_once(doc, point_index,
                                   {delta * std::cos(angle), delta * std::sin(angle)},
                                   size, size, impl_->options.parallel);
    r.delta = delta;
    return {snap->version, r};
  } catch (const DegenerateConfigurationError& e) {
    throw HttpStatusError(500, std::string("degenerate configuration: ") + e.what());
  }
}

std::pair<std::uint64_t, std::string> SessionStore::flow_json(const std::string& id,
                                                              int size) const {
  const auto snap = impl_->find(id)->load();
  if (size < 1 || size > kJsonFlowLimit) {
    throw HttpStatusError(422, "flow size must lie in [1, " +
                                   std::to_string(kJsonFlowLimit) + "]");
  }
  const PointsDocument& doc = snap->document;
  try {
    const FlowField flow = dense_flow(doc.pairs(), doc.config(), size, size,
                                      doc.external_m, impl_->options.parallel);
    return {snap->version, mlsr::flow_to_json(flow)};
  } catch (const DegenerateConfigurationError& e) {
    throw HttpStatusError(500, std::string("degenerate configuration: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// WarpService
// ---------------------------------------------------------------------------

namespace {

std::span<const std::uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}, {"status", status}}.dump(), "application/json");
}

int parse_int_param(const httplib::Request& req, const char* key, int fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(key);
    return out;
  } catch (const std::exception&) {
    throw HttpStatusError(422, std::string("query parameter '") + key +
                                   "' must be an integer");
  }
}

// "256" or "320x240".
std::pair<int, int> parse_size_param(const httplib::Request& req, int fallback) {
  if (!req.has_param("size")) return {fallback, fallback};
  const std::string v = req.get_param_value("size");
  int w = 0, h = 0;
  char tail = 0;
  if (std::sscanf(v.c_str(), "%dx%d%c", &w, &h, &tail) == 2) return {w, h};
  if (std::sscanf(v.c_str(), "%d%c", &w, &tail) == 1) return {w, w};
  throw HttpStatusError(422, "size must be N or WxH");
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const HttpStatusError& e) {
      send_error(res, e.status(), e.what());
    } catch (const ParseError& e) {
      send_error(res, 400, e.what());
    } catch (const DegenerateConfigurationError& e) {
      send_error(res, 500, e.what());
    } catch (const Error& e) {
      send_error(res, e.kind() == ErrorKind::kIo ? 500 : 422, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

}  // namespace

struct WarpService::Impl {
  explicit Impl(ServiceOptions opts) : store(opts), options(std::move(opts)) {}

  SessionStore store;
  ServiceOptions options;
  httplib::Server server;
  std::thread thread;
  int port = -1;

  void install_routes() {
    server.set_payload_max_length(options.max_upload_bytes * 2 + 64 * 1024);
    server.set_default_headers({
        {"Access-Control-Allow-Origin", options.cors_origin},
        {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"},
        {"Access-Control-Allow-Headers", "Content-Type"},
        {"Access-Control-Expose-Headers",
         "X-Snapshot-Version, X-Flow-Mean-Displacement, X-Flow-Max-Displacement"},
    });
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });

    server.Post("/sessions", guarded([this](const httplib::Request& req,
                                            httplib::Response& res) {
      std::string id;
      if (req.is_multipart_form_data()) {
        if (!req.has_file("source")) {
          throw HttpStatusError(400, "multipart upload needs a 'source' part");
        }
        const std::string source = req.get_file_value("source").content;
        if (req.has_file("driving")) {
          const std::string driving = req.get_file_value("driving").content;
          id = store.create(as_bytes(source), as_bytes(driving));
        } else {
          id = store.create(as_bytes(source));
        }
      } else {
        id = store.create(as_bytes(req.body));
      }
      res.status = 201;
      res.set_header("X-Snapshot-Version", "1");
      res.set_content(json{{"id", id}, {"version", 1}}.dump(), "application/json");
    }));

    server.Get(R"(/sessions/([0-9a-zA-Z_-]+)/points)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const PointsSnapshot snap = store.points(req.matches[1]);
                 res.set_header("X-Snapshot-Version", std::to_string(snap.version));
                 res.set_content(to_json(snap.document), "application/json");
               }));

    server.Put(R"(/sessions/([0-9a-zA-Z_-]+)/points)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 store.points(id);  // 404 before parsing
                 PointsDocument doc;
                 try {
                   doc = parse_points_document(req.body);
                 } catch (const ParseError& e) {
                   throw HttpStatusError(400, e.what());
                 } catch (const Error& e) {
                   throw HttpStatusError(422, e.what());
                 }
                 const std::uint64_t version = store.set_points(id, std::move(doc));
                 res.set_header("X-Snapshot-Version", std::to_string(version));
                 res.set_content(json{{"version", version}}.dump(), "application/json");
               }));

    server.Get(R"(/sessions/([0-9a-zA-Z_-]+)/warp)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 WarpQuery q;
                 if (req.has_param("mode")) {
                   try {
                     q.mode = parse_transform_mode(req.get_param_value("mode"));
                   } catch (const Error& e) {
                     throw HttpStatusError(422, e.what());
                   }
                 }
                 if (req.has_param("alpha")) {
                   try {
                     q.alpha = std::stod(req.get_param_value("alpha"));
                   } catch (const std::exception&) {
                     throw HttpStatusError(422, "alpha must be a number");
                   }
                 }
                 std::tie(q.width, q.height) = parse_size_param(req, kDefaultOutputSize);
                 if (req.has_param("version")) {
                   const int v = parse_int_param(req, "version", 0);
                   if (v < 0) throw HttpStatusError(422, "version must be nonnegative");
                   q.pinned_version = static_cast<std::uint64_t>(v);
                 }
                 const WarpResponse out = store.warp(req.matches[1], q);
                 res.set_header("X-Snapshot-Version", std::to_string(out.version));
                 res.set_header("X-Flow-Mean-Displacement",
                                format_double(out.stats.mean_displacement));
                 res.set_header("X-Flow-Max-Displacement",
                                format_double(out.stats.max_displacement));
                 res.set_content(std::string(out.png.begin(), out.png.end()), "image/png");
               }));

    server.Post(R"(/sessions/([0-9a-zA-Z_-]+)/perturb)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  store.points(id);
                  json body;
                  try {
                    body = json::parse(req.body);
                  } catch (const json::parse_error& e) {
                    throw HttpStatusError(400, e.what());
                  }
                  if (!body.is_object() || !body.contains("point_index") ||
                      !body["point_index"].is_number_integer() ||
                      !body.contains("delta") || !body["delta"].is_number()) {
                    throw HttpStatusError(422, "body needs integer 'point_index' and numeric 'delta'");
                  }
                  const auto index = body["point_index"].get<long long>();
                  if (index < 0) throw HttpStatusError(422, "point_index must be nonnegative");
                  const double angle = body.value("angle", 0.0);
                  const int size = body.value("size", 64);
                  const PerturbResponse out =
                      store.perturb(id, static_cast<std::size_t>(index),
                                    body["delta"].get<double>(), angle, size);
                  json j = json::parse(to_json(out.report));
                  j["version"] = out.version;
                  res.set_header("X-Snapshot-Version", std::to_string(out.version));
                  res.set_content(j.dump(), "application/json");
                }));

    server.Get(R"(/sessions/([0-9a-zA-Z_-]+)/flow)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const int size = parse_int_param(req, "size", 32);
                 const auto [version, text] = store.flow_json(req.matches[1], size);
                 res.set_header("X-Snapshot-Version", std::to_string(version));
                 res.set_content(text, "application/json");
               }));
  }
};

WarpService::WarpService(ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {
  impl_->install_routes();
}

WarpService::~WarpService() { stop(); }

SessionStore& WarpService::store() { return impl_->store; }

int WarpService::bind() {
  if (impl_->options.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->options.host);
  } else if (impl_->server.bind_to_port(impl_->options.host, impl_->options.port)) {
    impl_->port = impl_->options.port;
  } else {
    impl_->port = -1;
  }
  if (impl_->port < 0) {
    throw IoError("cannot bind " + impl_->options.host + ":" +
                  std::to_string(impl_->options.port));
  }
  return impl_->port;
}

void WarpService::listen() { impl_->server.listen_after_bind(); }

int WarpService::start() {
  const int port = bind();
  impl_->thread = std::thread([this] { listen(); });
  impl_->server.wait_until_ready();
  return port;
}

void WarpService::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace mlsr
