// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/serialization.hpp"

#include <algorithm>
#include <bit>
#include <fstream>

#include <fmt/format.h>

#include "regiondrag/error.hpp"

namespace regiondrag::io {
namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::kValidation, msg); }

template <typename T>
T required(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) invalid(fmt::format("missing field '{}'", key));
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    invalid(fmt::format("field '{}': {}", key, e.what()));
  }
}

std::string normalise_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

}  // namespace

json region_to_json(const Region& region) {
  json j;
  j["image_w"] = region.bounds().width;
  j["image_h"] = region.bounds().height;
  if (const auto* v = region.polygon_vertices()) {
    j["type"] = "polygon";
    json verts = json::array();
    for (const auto& p : *v) verts.push_back({p.x, p.y});
    j["vertices"] = std::move(verts);
  } else {
    j["type"] = "brush";
    j["mask_rle"] = encode_mask_rle(region.to_mask());
  }
  return j;
}

Region region_from_json(const json& j) {
  const auto type = required<std::string>(j, "type");
  const Extent image{required<int>(j, "image_w"), required<int>(j, "image_h")};
  if (image.width <= 0 || image.height <= 0) invalid("region image dims must be positive");
  if (type == "polygon") {
    const auto verts = required<std::vector<std::vector<double>>>(j, "vertices");
    PolygonShape poly;
    for (const auto& v : verts) {
      if (v.size() != 2) invalid("polygon vertices must be [x, y] pairs");
      poly.vertices.push_back({v[0], v[1]});
    }
    return rasterize_region(poly, image);
  }
  if (type == "brush") {
    const auto runs = required<std::vector<int>>(j, "mask_rle");
    return rasterize_region(BrushShape{decode_mask_rle(runs, image)}, image);
  }
  invalid(fmt::format("unknown region type '{}'", type));
}

json region_pair_to_json(const RegionPair& pair) {
  return {{"handle", region_to_json(pair.handle)}, {"target", region_to_json(pair.target)}};
}

RegionPair region_pair_from_json(const json& j, int index) {
  if (!j.is_object() || !j.contains("handle") || !j.contains("target")) {
    invalid("region pair needs 'handle' and 'target'");
  }
  return {region_from_json(j.at("handle")), region_from_json(j.at("target")), index};
}

std::vector<RegionPair> region_pairs_from_json(const json& j) {
  const json& arr = j.is_object() && j.contains("pairs") ? j.at("pairs") : j;
  if (!arr.is_array()) invalid("region pairs must be an array or {pairs: [...]}");
  std::vector<RegionPair> pairs;
  for (std::size_t i = 0; i < arr.size(); ++i) pairs.push_back(region_pair_from_json(arr[i], static_cast<int>(i)));
  return pairs;
}

json region_pairs_to_json(const std::vector<RegionPair>& pairs) {
  json arr = json::array();
  for (const auto& p : pairs) arr.push_back(region_pair_to_json(p));
  return {{"pairs", std::move(arr)}};
}

json mapping_to_json(const MappedPointSet& mapping) {
  json arr = json::array();
  for (std::size_t i = 0; i < mapping.pairs.size(); ++i) {
    const auto& p = mapping.pairs[i];
    arr.push_back({{"hx", p.handle.x}, {"hy", p.handle.y}, {"tx", p.target.x}, {"ty", p.target.y},
                   {"pair_index", mapping.source[i]}});
  }
  return arr;
}

json point_pair_to_json(const PointPair& p) {
  return {{"hx", p.handle.x}, {"hy", p.handle.y}, {"tx", p.target.x}, {"ty", p.target.y}};
}

PointPair point_pair_from_json(const json& j) {
  return {{required<int>(j, "hx"), required<int>(j, "hy")},
          {required<int>(j, "tx"), required<int>(j, "ty")},
          CoordSpace::kImage};
}

void apply_config_overrides(EditConfig& cfg, const json& j) {
  if (j.is_null()) return;
  if (!j.is_object()) invalid("config overrides must be an object");
  for (const auto& [raw_key, value] : j.items()) {
    const std::string key = normalise_key(raw_key);
    try {
      if (key == "total_trained_steps") cfg.total_trained_steps = value.get<int>();
      else if (key == "sampler_steps") cfg.sampler_steps = value.get<int>();
      else if (key == "invert_to") cfg.invert_to = value.get<int>();
      else if (key == "cp_stop") cfg.cp_stop = value.get<int>();
      else if (key == "blend_alpha") cfg.blend_alpha = value.get<double>();
      else if (key == "eta") cfg.eta = value.get<double>();
      else if (key == "kv_swap") cfg.kv_swap = value.get<bool>();
      else if (key == "cp_mode") cfg.cp_mode = copy_paste_mode_from_string(value.get<std::string>());
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else invalid(fmt::format("unknown config field '{}'", raw_key));
    } catch (const json::exception& e) {
      invalid(fmt::format("config field '{}': {}", raw_key, e.what()));
    }
  }
}

json config_to_json(const EditConfig& cfg) {
  return {{"total_trained_steps", cfg.total_trained_steps},
          {"sampler_steps", cfg.sampler_steps},
          {"invert_to", cfg.invert_to},
          {"cp_stop", cfg.cp_stop},
          {"blend_alpha", cfg.blend_alpha},
          {"eta", cfg.eta},
          {"kv_swap", cfg.kv_swap},
          {"cp_mode", to_string(cfg.cp_mode)},
          {"seed", cfg.seed}};
}

json timings_to_json(const StageTimings& t) {
  return {{"map_ms", t.map_ms},         {"encode_ms", t.encode_ms}, {"invert_ms", t.invert_ms},
          {"blend_ms", t.blend_ms},     {"denoise_ms", t.denoise_ms}, {"cp_ms", t.cp_ms},
          {"decode_ms", t.decode_ms},   {"total_ms", t.total_ms}};
}

json schedule_dump_to_json(const std::vector<ScheduleRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) arr.push_back({{"t", r.t}, {"alpha_bar", r.alpha_bar}, {"sigma", r.sigma}});
  return arr;
}

json session_summary(const EditSession& session) {
  json latents = json::array();
  for (const auto& [t, z] : session.trajectory) {
    latents.push_back({{"t", t}, {"shape", {z.channels(), z.height(), z.width()}}, {"file", fmt::format("z_{:04d}.f64", t)}});
  }
  json kv = json::array();
  for (const auto& [t, frag] : session.kv_cache.entries()) {
    for (const auto& layer : frag.layers) {
      kv.push_back({{"t", t}, {"layer", layer.layer}, {"tokens", layer.tokens}, {"dim", layer.dim}});
    }
  }
  return {{"config", config_to_json(session.config)},
          {"grid", session.grid.timesteps},
          {"invert_to", session.grid.invert_to},
          {"cp_stop", session.grid.cp_stop},
          {"cp_timesteps", session.cp_timesteps},
          {"mapped_points", session.mapped.size()},
          {"conflicts", session.conflicts.size()},
          {"latents", std::move(latents)},
          {"kv", std::move(kv)},
          {"timings", timings_to_json(session.timings)},
          {"warnings", session.warnings}};
}

void write_session_export(const EditSession& session, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  static_assert(std::endian::native == std::endian::little, "raw latent dumps assume a little-endian host");
  for (const auto& [t, z] : session.trajectory) {
    std::ofstream out(dir / fmt::format("z_{:04d}.f64", t), std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write latent dump in {}", dir.string()));
    out.write(reinterpret_cast<const char*>(z.data().data()), static_cast<std::streamsize>(z.size() * sizeof(double)));
  }
  write_text_file(dir / "index.json", session_summary(session).dump(2) + "\n");
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    invalid(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write {}", path.string()));
  out << text;
}

}  // namespace regiondrag::io
