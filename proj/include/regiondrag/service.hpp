// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regiondrag/denoiser.hpp"
#include "regiondrag/error.hpp"
#include "regiondrag/pipeline.hpp"
#include "regiondrag/region.hpp"
#include "regiondrag/types.hpp"

namespace regiondrag {

struct EditRequest {
  /// PNG bytes; empty when `fixture` names a synthetic sample instead.
  std::vector<std::uint8_t> image_png;
  std::optional<std::string> fixture;
  std::string prompt;
  std::vector<RegionPair> pairs;  // empty: use the fixture's pairs
  nlohmann::json overrides = nlohmann::json::object();
  std::string backend;  // empty: service default
  std::string codec = "identity";
  std::optional<std::uint64_t> seed;
};

struct EditResponse {
  std::vector<std::uint8_t> png;
  StageTimings timings;
  std::size_t mapped_points = 0;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
  std::string backend;
  std::shared_ptr<const EditSession> session;
};

/// Parses {image (base64 PNG) | fixture, prompt, regions, config, backend,
/// codec, seed}. Throws Error(kValidation) on malformed input.
EditRequest edit_request_from_json(const nlohmann::json& j);
nlohmann::json edit_response_to_json(const EditResponse& response);

/// "translate-<n>[-identity]" -> synthetic translation sample with seed n.
bool is_fixture_id(const std::string& id);

struct ServiceOptions {
  std::string default_backend = "toy";
  std::size_t max_body_bytes = 16u << 20;
  std::chrono::milliseconds timeout{60'000};
  /// Concurrent edits; further requests wait for a slot.
  int max_sessions = 4;
};

/// Shared request handler behind both the CLI and the HTTP server.
class EditService {
 public:
  explicit EditService(BackendRegistry registry = BackendRegistry::builtin(), ServiceOptions options = {});
  ~EditService();
  EditService(const EditService&) = delete;
  EditService& operator=(const EditService&) = delete;

  const ServiceOptions& options() const { return options_; }
  const BackendRegistry& registry() const { return registry_; }

  /// Runs one edit. An unset request seed is replaced by a fresh random one
  /// and echoed in the response.
  EditResponse edit(EditRequest request) const;

  /// {regions: [...], image_w?, image_h?} -> mapping export.
  nlohmann::json map(const nlohmann::json& body) const;

 private:
  struct Slots;
  BackendRegistry registry_;
  ServiceOptions options_;
  std::unique_ptr<Slots> slots_;
};

/// 400 validation, 422 empty or degenerate regions, 500 pipeline failure,
/// 504 timeout.
int http_status(const Error& error);
nlohmann::json error_to_json(const Error& error);

class HttpServer {
 public:
  explicit HttpServer(const EditService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Returns the bound port (useful with port 0).
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace regiondrag
