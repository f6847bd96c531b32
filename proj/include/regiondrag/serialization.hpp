// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regiondrag/mapping.hpp"
#include "regiondrag/pipeline.hpp"
#include "regiondrag/region.hpp"
#include "regiondrag/schedule.hpp"

// JSON records shared by the CLI, the HTTP service and the dataset manifest.
namespace regiondrag::io {

using nlohmann::json;

/// {type: "polygon", vertices: [[x, y], ...], image_w, image_h} or
/// {type: "brush", mask_rle: [runs...], image_w, image_h}.
json region_to_json(const Region& region);
Region region_from_json(const json& j);

/// {handle: Region, target: Region}; `index` becomes the pair ordinal.
json region_pair_to_json(const RegionPair& pair);
RegionPair region_pair_from_json(const json& j, int index);

/// Accepts a bare array of pairs or {pairs: [...]}.
std::vector<RegionPair> region_pairs_from_json(const json& j);
json region_pairs_to_json(const std::vector<RegionPair>& pairs);

/// [{hx, hy, tx, ty, pair_index}, ...]
json mapping_to_json(const MappedPointSet& mapping);

json point_pair_to_json(const PointPair& p);
PointPair point_pair_from_json(const json& j);

/// Overrides from snake_case or kebab-case keys; unknown keys throw kValidation.
void apply_config_overrides(EditConfig& cfg, const json& j);
json config_to_json(const EditConfig& cfg);

json timings_to_json(const StageTimings& t);

json schedule_dump_to_json(const std::vector<ScheduleRow>& rows);

/// index.json plus one raw little-endian float64 file per cached latent.
void write_session_export(const EditSession& session, const std::filesystem::path& dir);
json session_summary(const EditSession& session);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace regiondrag::io
