// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "regiondrag/codec.hpp"
#include "regiondrag/dataset.hpp"
#include "regiondrag/error.hpp"
#include "regiondrag/metrics.hpp"
#include "regiondrag/serialization.hpp"
#include "regiondrag/service.hpp"
#include "regiondrag/synthetic.hpp"

namespace rd = regiondrag;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitPipeline = 2;

// EditConfig flags; only flags actually given end up in the overrides so a
// config file fills the rest.
struct ConfigFlags {
  std::optional<std::string> config_file;
  std::optional<int> total_trained_steps, sampler_steps, invert_to, cp_stop;
  std::optional<double> blend_alpha, eta;
  std::optional<std::string> kv_swap, cp_mode;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App& app) {
    app.add_option("--config", config_file, "JSON file with EditConfig fields (flags win)")->check(CLI::ExistingFile);
    app.add_option("--total-trained-steps", total_trained_steps);
    app.add_option("--sampler-steps", sampler_steps);
    app.add_option("--invert-to", invert_to, "inversion timestep t'");
    app.add_option("--cp-stop", cp_stop, "last copy-paste timestep t''");
    app.add_option("--blend-alpha", blend_alpha);
    app.add_option("--eta", eta);
    app.add_option("--kv-swap", kv_swap, "on|off")->check(CLI::IsMember({"on", "off", "true", "false", "1", "0"}));
    app.add_option("--cp-mode", cp_mode)->check(CLI::IsMember({"multi-step", "initial-only"}));
    app.add_option("--seed", seed);
  }

  json overrides() const {
    json j = config_file ? rd::io::read_json_file(*config_file) : json::object();
    if (!j.is_object()) throw rd::Error(rd::ErrorCode::kValidation, "config file must hold a JSON object");
    auto set = [&](const char* key, const auto& v) {
      if (v) j[key] = *v;
    };
    set("total_trained_steps", total_trained_steps);
    set("sampler_steps", sampler_steps);
    set("invert_to", invert_to);
    set("cp_stop", cp_stop);
    set("blend_alpha", blend_alpha);
    set("eta", eta);
    set("cp_mode", cp_mode);
    set("seed", seed);
    if (kv_swap) j["kv_swap"] = *kv_swap == "on" || *kv_swap == "true" || *kv_swap == "1";
    // Kebab-case keys from a config file are normalised by the loader; drop
    // duplicates so the snake-case flag value wins.
    for (const char* k : {"total-trained-steps", "sampler-steps", "invert-to", "cp-stop", "blend-alpha", "kv-swap",
                          "cp-mode"}) {
      std::string snake = k;
      std::replace(snake.begin(), snake.end(), '-', '_');
      if (j.contains(k) && j.contains(snake)) j.erase(k);
    }
    return j;
  }

  rd::EditConfig resolve() const {
    rd::EditConfig cfg;
    rd::io::apply_config_overrides(cfg, overrides());
    cfg.validate();
    return cfg;
  }
};

std::string default_backend() {
  const char* env = std::getenv("REGIONDRAG_BACKEND");
  return env && *env ? env : "toy";
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rd::Error(rd::ErrorCode::kIo, fmt::format("cannot open {}", path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rd::Error(rd::ErrorCode::kIo, fmt::format("cannot write {}", path));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void emit(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    rd::io::write_text_file(path, j.dump(2) + "\n");
  }
}

int exit_code(const rd::Error& e) {
  switch (e.code()) {
    case rd::ErrorCode::kPipeline:
    case rd::ErrorCode::kBackend:
    case rd::ErrorCode::kTimeout:
      return kExitPipeline;
    default:
      return kExitValidation;
  }
}

rd::HttpServer* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Region-based drag editing with a latent diffusion sampler"};
  app.require_subcommand(1);
  std::string backend = default_backend();
  app.add_option("--backend", backend, "denoiser backend (env REGIONDRAG_BACKEND)");

  // edit
  auto* edit = app.add_subcommand("edit", "edit one image");
  ConfigFlags edit_flags;
  edit_flags.attach(*edit);
  std::string image_path, fixture, regions_path, out_path, prompt, codec = "identity", timings_path, export_dir;
  auto* image_opt = edit->add_option("--image", image_path, "input PNG")->check(CLI::ExistingFile);
  auto* fixture_opt = edit->add_option("--fixture", fixture, "synthetic fixture id, e.g. translate-3");
  image_opt->excludes(fixture_opt);
  edit->add_option("--regions", regions_path, "region pairs JSON")->check(CLI::ExistingFile);
  edit->add_option("--out", out_path, "edited PNG")->required();
  edit->add_option("--prompt", prompt);
  edit->add_option("--codec", codec)->check(CLI::IsMember({"identity", "block"}));
  edit->add_option("--timings", timings_path, "timing report JSON ('-' for stdout)");
  edit->add_option("--session-export", export_dir, "directory for cached latents and session summary");
  edit->add_option("--backend", backend);

  // map
  auto* map = app.add_subcommand("map", "dense mapping for region pairs");
  std::string map_regions, map_out;
  map->add_option("--regions", map_regions, "region pairs JSON")->required()->check(CLI::ExistingFile);
  map->add_option("--out", map_out, "mapping JSON (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "run the benchmark over a dataset");
  ConfigFlags bench_flags;
  bench_flags.attach(*bench);
  std::string dataset, bench_out, bench_csv, bench_codec = "identity";
  std::optional<double> subset;
  std::uint64_t subset_seed = 0;
  int workers = 1;
  bench->add_option("--dataset", dataset, "directory containing manifest.jsonl")->required()->check(CLI::ExistingDirectory);
  bench->add_option("--out", bench_out, "report JSON (default stdout)");
  bench->add_option("--csv", bench_csv, "per-sample CSV");
  bench->add_option("--codec", bench_codec)->check(CLI::IsMember({"identity", "block"}));
  bench->add_option("--subset", subset, "fraction of mapped points used for copy-paste")->check(CLI::Range(0.0, 1.0));
  bench->add_option("--subset-seed", subset_seed);
  bench->add_option("--workers", workers)->check(CLI::PositiveNumber);
  bench->add_option("--backend", backend);

  // stats
  auto* stats = app.add_subcommand("stats", "equivalent point-pair counts for a dataset");
  std::string stats_dataset, stats_out;
  stats->add_option("--dataset", stats_dataset)->required()->check(CLI::ExistingDirectory);
  stats->add_option("--out", stats_out);

  // fixture
  auto* fix = app.add_subcommand("fixture", "write a synthetic translation dataset");
  std::string fix_dir;
  int fix_count = 10;
  std::uint64_t fix_seed = 0;
  fix->add_option("--dir", fix_dir)->required();
  fix->add_option("--count", fix_count)->check(CLI::PositiveNumber);
  fix->add_option("--seed", fix_seed);

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP service");
  std::string host = "127.0.0.1";
  int port = 8080, sessions = 4;
  double max_body_mib = 16, timeout_s = 60;
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--max-body-mib", max_body_mib)->check(CLI::PositiveNumber);
  serve->add_option("--timeout-s", timeout_s)->check(CLI::PositiveNumber);
  serve->add_option("--sessions", sessions)->check(CLI::Range(1, 1024));
  serve->add_option("--backend", backend);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*edit) {
      if (image_path.empty() && fixture.empty()) {
        throw rd::Error(rd::ErrorCode::kValidation, "edit needs --image or --fixture");
      }
      if (regions_path.empty() && fixture.empty()) {
        std::cerr << edit->help();
        throw rd::Error(rd::ErrorCode::kValidation, "--regions is required");
      }
      const rd::EditConfig cfg = edit_flags.resolve();
      rd::EditRequest req;
      if (!image_path.empty()) req.image_png = read_bytes(image_path);
      if (!fixture.empty()) req.fixture = fixture;
      if (!regions_path.empty()) req.pairs = rd::io::region_pairs_from_json(rd::io::read_json_file(regions_path));
      req.prompt = prompt;
      req.overrides = edit_flags.overrides();
      req.backend = backend;
      req.codec = codec;
      req.seed = cfg.seed;

      const rd::EditService service(rd::BackendRegistry::builtin(), {.default_backend = backend});
      const rd::EditResponse resp = service.edit(std::move(req));
      write_bytes(out_path, resp.png);
      for (const auto& w : resp.warnings) std::cerr << "warning: " << w << "\n";
      if (!timings_path.empty()) {
        json report = rd::edit_response_to_json(resp);
        report.erase("image");
        report["cp_timesteps"] = resp.session->cp_timesteps;
        emit(report, timings_path);
      }
      if (!export_dir.empty()) rd::io::write_session_export(*resp.session, export_dir);
      return 0;
    }
    if (*map) {
      const rd::EditService service;
      emit(service.map(rd::io::read_json_file(map_regions)), map_out);
      return 0;
    }
    if (*bench) {
      const rd::EditConfig cfg = bench_flags.resolve();
      const rd::LoadedDataset ds = rd::load_dataset(dataset);
      for (const auto& r : ds.rejects) {
        std::cerr << fmt::format("rejected line {} ({}): {}\n", r.line, r.id, r.reason);
      }
      const auto c = rd::make_codec(bench_codec);
      rd::BackendOptions bopts;
      bopts.schedule = rd::NoiseSchedule::scaled_linear(cfg.total_trained_steps, 0.00085, 0.012, cfg.eta);
      bopts.latent_channels = c->latent_channels(3);
      const auto be = rd::BackendRegistry::builtin().create(backend, bopts);
      const rd::PatchCorrelationMatcher matcher;
      const rd::BenchReport report =
          rd::run_benchmark(ds.samples, cfg, *be, *c, matcher, {subset, subset_seed, workers});
      json j = rd::report_to_json(report);
      j["rejects"] = ds.rejects.size();
      emit(j, bench_out);
      if (!bench_csv.empty()) rd::io::write_text_file(bench_csv, rd::report_to_csv(report));
      return 0;
    }
    if (*stats) {
      const rd::LoadedDataset ds = rd::load_dataset(stats_dataset);
      const rd::PointCountStats s = rd::equivalent_point_stats(ds.samples);
      json hist = json::array();
      for (const auto& [bin, n] : s.log10_histogram) {
        hist.push_back({{"log10_lo", bin * s.bin_width}, {"log10_hi", (bin + 1) * s.bin_width}, {"count", n}});
      }
      emit({{"samples", ds.samples.size()},
            {"rejects", ds.rejects.size()},
            {"region_pairs", s.counts.size()},
            {"counts", s.counts},
            {"median", s.median},
            {"log10_histogram", hist}},
           stats_out);
      return 0;
    }
    if (*fix) {
      const auto samples = rd::write_translation_dataset(fix_dir, fix_count, fix_seed);
      std::cout << fmt::format("wrote {} samples to {}\n", samples.size(), fix_dir);
      return 0;
    }
    if (*serve) {
      rd::ServiceOptions opts;
      opts.default_backend = backend;
      opts.max_body_bytes = static_cast<std::size_t>(max_body_mib * 1024 * 1024);
      opts.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
      opts.max_sessions = sessions;
      const rd::EditService service(rd::BackendRegistry::builtin(), opts);
      rd::HttpServer server(service);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, [](int) { g_server->stop(); });
      std::signal(SIGTERM, [](int) { g_server->stop(); });
      std::cerr << fmt::format("listening on http://{}:{}\n", host, bound);
      server.listen();
      return 0;
    }
  } catch (const rd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return 0;
}
