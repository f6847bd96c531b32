// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/service.hpp"

#include <charconv>
#include <random>
#include <semaphore>

#include <fmt/format.h>
#include <httplib.h>

#include "regiondrag/codec.hpp"
#include "regiondrag/image_io.hpp"
#include "regiondrag/mapping.hpp"
#include "regiondrag/serialization.hpp"
#include "regiondrag/synthetic.hpp"

namespace regiondrag {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorCode::kValidation, message); }

std::optional<BenchSample> fixture_sample(const std::string& id) {
  constexpr std::string_view prefix = "translate-";
  if (!id.starts_with(prefix)) return std::nullopt;
  std::string_view rest = std::string_view(id).substr(prefix.size());
  TranslationFixtureOptions opts;
  constexpr std::string_view identity = "-identity";
  if (rest.ends_with(identity)) {
    opts.identity = true;
    rest.remove_suffix(identity.size());
  }
  std::uint64_t seed = 0;
  const auto [end, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), seed);
  if (ec != std::errc{} || end != rest.data() + rest.size() || rest.empty()) return std::nullopt;
  return make_translation_sample(seed, opts);
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  // Kept within 53 bits so JSON clients round-trip it exactly.
  return ((static_cast<std::uint64_t>(rd()) << 32) | rd()) & ((std::uint64_t{1} << 53) - 1);
}

}  // namespace

bool is_fixture_id(const std::string& id) { return fixture_sample(id).has_value(); }

EditRequest edit_request_from_json(const json& j) {
  if (!j.is_object()) invalid("edit request must be a JSON object");
  EditRequest r;
  try {
    if (j.contains("image")) {
      if (!j.at("image").is_string()) invalid("image must be a base64 string");
      r.image_png = base64_decode(j.at("image").get<std::string>());
    }
    if (j.contains("fixture")) r.fixture = j.at("fixture").get<std::string>();
    r.prompt = j.value("prompt", std::string{});
    if (j.contains("regions")) r.pairs = io::region_pairs_from_json(j.at("regions"));
    if (j.contains("config")) {
      if (!j.at("config").is_object()) invalid("config must be an object");
      r.overrides = j.at("config");
    }
    r.backend = j.value("backend", std::string{});
    r.codec = j.value("codec", std::string{"identity"});
    if (j.contains("seed") && !j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    invalid(fmt::format("edit request: {}", e.what()));
  }
  if (r.image_png.empty() && !r.fixture) invalid("edit request needs an image or a fixture id");
  if (!r.image_png.empty() && r.fixture) invalid("edit request has both an image and a fixture id");
  return r;
}

json edit_response_to_json(const EditResponse& r) {
  return {{"image", base64_encode(r.png)},
          {"timings", io::timings_to_json(r.timings)},
          {"mapped_points", r.mapped_points},
          {"warnings", r.warnings},
          {"seed", r.seed},
          {"backend", r.backend}};
}

struct EditService::Slots {
  explicit Slots(int n) : sem(n) {}
  std::counting_semaphore<1024> sem;
};

EditService::EditService(BackendRegistry registry, ServiceOptions options)
    : registry_(std::move(registry)), options_(std::move(options)) {
  if (options_.max_sessions < 1 || options_.max_sessions > 1024) invalid("max_sessions must be in [1, 1024]");
  if (!registry_.contains(options_.default_backend)) {
    throw Error(ErrorCode::kBackend, fmt::format("unknown default backend '{}'", options_.default_backend));
  }
  slots_ = std::make_unique<Slots>(options_.max_sessions);
}

EditService::~EditService() = default;

EditResponse EditService::edit(EditRequest request) const {
  const auto deadline = std::chrono::steady_clock::now() + options_.timeout;

  EditConfig cfg;
  io::apply_config_overrides(cfg, request.overrides);
  if (request.seed) {
    cfg.seed = *request.seed;
  } else if (!request.overrides.contains("seed")) {
    cfg.seed = fresh_seed();
  }
  cfg.validate();

  ImageBuffer image(1, 1, 3);
  std::vector<RegionPair> pairs = std::move(request.pairs);
  if (request.fixture) {
    auto sample = fixture_sample(*request.fixture);
    if (!sample) invalid(fmt::format("unknown fixture '{}'", *request.fixture));
    image = *sample->image;
    if (pairs.empty()) pairs = sample->regions;
    if (request.prompt.empty()) request.prompt = sample->prompt;
  } else {
    image = decode_png(request.image_png);
  }
  if (pairs.empty()) invalid("edit request has no region pairs");

  const std::string backend_name = request.backend.empty() ? options_.default_backend : request.backend;
  const auto codec = make_codec(request.codec);
  BackendOptions bopts;
  bopts.schedule = NoiseSchedule::scaled_linear(cfg.total_trained_steps, 0.00085, 0.012, cfg.eta);
  bopts.latent_channels = codec->latent_channels(image.channels());
  const auto backend = registry_.create(backend_name, bopts);

  EditOptions eo;
  eo.schedule = bopts.schedule;
  eo.deadline = deadline;

  slots_->sem.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_->sem};
  if (std::chrono::steady_clock::now() > deadline) throw Error(ErrorCode::kTimeout, "timed out waiting for a session");

  EditResult result = run_edit(image, pairs, request.prompt, cfg, *backend, *codec, eo);
  EditResponse resp;
  resp.png = encode_png(result.edited);
  resp.timings = result.session.timings;
  resp.mapped_points = result.session.mapped.size();
  resp.warnings = result.session.warnings;
  resp.seed = cfg.seed;
  resp.backend = backend_name;
  resp.session = std::make_shared<const EditSession>(std::move(result.session));
  return resp;
}

json EditService::map(const json& body) const {
  const std::vector<RegionPair> pairs = io::region_pairs_from_json(body.is_object() && body.contains("regions")
                                                                       ? body.at("regions")
                                                                       : body);
  if (pairs.empty()) invalid("no region pairs");
  MappingDiagnostics diag;
  const MergedMapping merged = map_region_pairs(pairs, &diag);
  json conflicts = json::array();
  for (const auto& c : merged.conflicts) {
    conflicts.push_back({{"tx", c.target.x}, {"ty", c.target.y}, {"dropped_pair", c.dropped_pair},
                         {"kept_pair", c.kept_pair}});
  }
  return {{"pairs", io::mapping_to_json(merged.mapping)},
          {"count", merged.mapping.size()},
          {"space", "image"},
          {"conflicts", std::move(conflicts)},
          {"column_snaps", diag.column_snaps},
          {"row_snaps", diag.row_snaps}};
}

int http_status(const Error& error) {
  switch (error.code()) {
    case ErrorCode::kEmptyRegion:
    case ErrorCode::kDegenerateGeometry:
      return 422;
    case ErrorCode::kPipeline:
    case ErrorCode::kBackend:
    case ErrorCode::kIo:
      return 500;
    case ErrorCode::kTimeout:
      return 504;
    default:
      return 400;
  }
}

json error_to_json(const Error& error) {
  json j{{"error", error.what()}, {"code", to_string(error.code())}};
  if (const auto* pe = dynamic_cast<const PipelineError*>(&error)) {
    j["stage"] = pe->stage();
    if (pe->timestep() >= 0) j["timestep"] = pe->timestep();
  }
  return j;
}

struct HttpServer::Impl {
  const EditService& service;
  httplib::Server server;

  explicit Impl(const EditService& s) : service(s) {
    server.set_payload_max_length(service.options().max_body_bytes);
    const int threads = std::max(2, service.options().max_sessions + 1);
    server.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };

    server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(json{{"status", "ok"}}.dump(), "application/json");
    });
    server.Get("/v1/backends", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(json{{"backends", service.registry().names()}, {"default", service.options().default_backend}}
                          .dump(),
                      "application/json");
    });
    server.Post("/v1/map", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] { return service.map(parse_body(req.body)); });
    });
    server.Post("/v1/edit", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] { return edit_response_to_json(service.edit(parse_edit(req))); });
    });
  }

  static json parse_body(const std::string& body) {
    try {
      return json::parse(body);
    } catch (const json::exception& e) {
      invalid(fmt::format("malformed JSON body: {}", e.what()));
    }
  }

  static EditRequest parse_edit(const httplib::Request& req) {
    if (!req.is_multipart_form_data()) return edit_request_from_json(parse_body(req.body));
    json j = req.has_file("request") ? parse_body(req.get_file_value("request").content) : json::object();
    if (!j.is_object()) invalid("request part must be a JSON object");
    if (req.has_file("image")) {
      const std::string& bytes = req.get_file_value("image").content;
      j["image"] = base64_encode(std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
    }
    return edit_request_from_json(j);
  }

  template <typename F>
  static void handle(httplib::Response& res, F&& f) {
    try {
      res.set_content(f().dump(), "application/json");
    } catch (const Error& e) {
      res.status = http_status(e);
      res.set_content(error_to_json(e).dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", e.what()}, {"code", "internal"}}.dump(), "application/json");
    }
  }
};

HttpServer::HttpServer(const EditService& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kIo, fmt::format("cannot bind {}", host));
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error(ErrorCode::kIo, fmt::format("cannot bind {}:{}", host, port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }
void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}
void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace regiondrag
