// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regiondrag/codec.hpp"
#include "regiondrag/denoiser.hpp"
#include "regiondrag/mapping.hpp"
#include "regiondrag/region.hpp"
#include "regiondrag/schedule.hpp"
#include "regiondrag/types.hpp"

namespace regiondrag {

struct StageTimings {
  double map_ms = 0;
  double encode_ms = 0;
  double invert_ms = 0;
  double blend_ms = 0;
  double denoise_ms = 0;  // model calls and transitions, copy-paste excluded
  double cp_ms = 0;
  double decode_ms = 0;
  double total_ms = 0;
};

struct EditSession {
  EditConfig config;
  NoiseSchedule schedule = NoiseSchedule::scaled_linear();
  SamplerGrid grid;
  /// Cached inversion latents z_t for t in {0} U grid points up to invert_to.
  std::map<int, LatentGrid> trajectory;
  AttentionCache kv_cache;
  MappedPointSet mapped;  // latent coordinates
  std::vector<MappingConflict> conflicts;
  MappingDiagnostics diagnostics;
  Mask handle_mask;  // union of handle regions, latent resolution
  std::vector<int> cp_timesteps;
  /// Edited latent at every denoising grid step (after copy-paste) and at 0;
  /// filled only when EditOptions::record_edited_trajectory is set.
  std::map<int, LatentGrid> edited_trajectory;
  StageTimings timings;
  std::vector<std::string> warnings;
};

struct EditOptions {
  bool record_edited_trajectory = false;
  /// Applied to the merged latent mapping before editing (e.g. subsampling).
  std::function<MappedPointSet(const MappedPointSet&)> mapping_filter;
  /// Overrides the default scaled-linear schedule (its eta is replaced by cfg.eta).
  std::optional<NoiseSchedule> schedule;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct EditResult {
  ImageBuffer edited;
  EditSession session;
};

/// dst with dst[:, t] = src[:, h] for every pair (h, t). Throws kOutOfBounds
/// for pairs outside the grid and kShapeMismatch for differing shapes.
LatentGrid copy_paste(const LatentGrid& src, const LatentGrid& dst, const MappedPointSet& pairs);
void copy_paste_into(const LatentGrid& src, LatentGrid& dst, const MappedPointSet& pairs);

/// Mapping, handle mask, grid and schedule for an edit; no model calls.
/// Throws kValidation when the merged mapping is empty.
EditSession prepare_session(Extent image, const std::vector<RegionPair>& pairs, const EditConfig& cfg,
                            int latent_factor, const EditOptions& options = {});

/// Inverts z0 along the grid up to invert_to, caching every z_t and the
/// attention K/V of each step under its destination timestep.
void invert(EditSession& session, const LatentGrid& z0, const Denoiser& backend, const Conditioning& cond,
            const EditOptions& options = {});

struct DenoiseOptions {
  bool copy_paste = true;
  bool record = false;
};

/// Denoises `start` (at invert_to) to timestep 0 with copy-paste from the
/// cached trajectory and K/V injection as configured.
LatentGrid denoise(EditSession& session, LatentGrid start, const Denoiser& backend, const Conditioning& cond,
                   const DenoiseOptions& denoise_options, const EditOptions& options = {});

/// The whole editing pipeline. Failures after mapping raise PipelineError
/// naming the stage and timestep.
EditResult run_edit(const ImageBuffer& image, const std::vector<RegionPair>& pairs, const std::string& prompt,
                    const EditConfig& cfg, const Denoiser& backend, const LatentCodec& codec,
                    const EditOptions& options = {});

}  // namespace regiondrag
