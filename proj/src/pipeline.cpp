// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/pipeline.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "regiondrag/error.hpp"
#include "regiondrag/rng.hpp"

namespace regiondrag {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void check_deadline(const EditOptions& options, const char* stage, int t) {
  if (options.deadline && Clock::now() > *options.deadline) {
    throw Error(ErrorCode::kTimeout, fmt::format("edit exceeded its deadline during {} at t={}", stage, t));
  }
}

template <typename F>
auto guarded(const char* stage, int t, F&& f) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kTimeout) throw;
    throw PipelineError(stage, t, fmt::format("{} failed at t={}: {}", stage, t, e.what()));
  } catch (const std::exception& e) {
    throw PipelineError(stage, t, fmt::format("{} failed at t={}: {}", stage, t, e.what()));
  }
}

}  // namespace

void copy_paste_into(const LatentGrid& src, LatentGrid& dst, const MappedPointSet& pairs) {
  if (!src.same_shape(dst)) throw Error(ErrorCode::kShapeMismatch, "copy-paste source and destination differ in shape");
  const Extent e{dst.width(), dst.height()};
  for (const auto& p : pairs.pairs) {
    if (!e.contains(p.handle) || !e.contains(p.target)) {
      throw Error(ErrorCode::kOutOfBounds,
                  fmt::format("copy-paste pair ({},{})->({},{}) outside {}x{} latent", p.handle.x, p.handle.y,
                              p.target.x, p.target.y, e.width, e.height));
    }
  }
  for (int c = 0; c < dst.channels(); ++c) {
    for (const auto& p : pairs.pairs) dst.at(c, p.target.y, p.target.x) = src.at(c, p.handle.y, p.handle.x);
  }
}

LatentGrid copy_paste(const LatentGrid& src, const LatentGrid& dst, const MappedPointSet& pairs) {
  LatentGrid out = dst;
  copy_paste_into(src, out, pairs);
  return out;
}

EditSession prepare_session(Extent image, const std::vector<RegionPair>& pairs, const EditConfig& cfg,
                            int latent_factor, const EditOptions& options) {
  cfg.validate();
  EditSession session;
  session.config = cfg;
  session.schedule = options.schedule ? options.schedule->with_eta(cfg.eta)
                                      : NoiseSchedule::scaled_linear(cfg.total_trained_steps, 0.00085, 0.012, cfg.eta);
  if (session.schedule.total_steps() != cfg.total_trained_steps) {
    throw Error(ErrorCode::kValidation, "schedule length does not match total_trained_steps");
  }
  session.grid = build_sampler_grid(cfg);
  session.warnings = session.grid.warnings;

  for (const auto& pair : pairs) {
    if (pair.handle.bounds() != image || pair.target.bounds() != image) {
      throw Error(ErrorCode::kOutOfBounds, fmt::format("region pair {} is not annotated on the {}x{} image", pair.index,
                                                       image.width, image.height));
    }
  }
  MergedMapping merged = map_region_pairs_to_latent(pairs, latent_factor, &session.diagnostics);
  if (options.mapping_filter) merged.mapping = options.mapping_filter(merged.mapping);
  if (merged.mapping.empty()) throw Error(ErrorCode::kValidation, "region pairs produced an empty mapping");
  session.mapped = std::move(merged.mapping);
  session.conflicts = std::move(merged.conflicts);
  if (!session.conflicts.empty()) {
    session.warnings.push_back(fmt::format("{} target pixels written by more than one region pair; later pairs win",
                                           session.conflicts.size()));
  }
  if (session.diagnostics.column_snaps || session.diagnostics.row_snaps) {
    session.warnings.push_back(fmt::format("mapping snapped {} columns and {} rows onto handle pixels",
                                           session.diagnostics.column_snaps, session.diagnostics.row_snaps));
  }

  const Extent latent{(image.width + latent_factor - 1) / latent_factor,
                      (image.height + latent_factor - 1) / latent_factor};
  session.handle_mask = Mask(latent);
  for (const auto& pair : pairs) {
    const Region small = downscale_region(pair.handle, latent_factor);
    for (Point p : small.pixels()) session.handle_mask.set(p);
  }
  return session;
}

void invert(EditSession& session, const LatentGrid& z0, const Denoiser& backend, const Conditioning& cond,
            const EditOptions& options) {
  const CounterRng rng(session.config.seed);
  LatentGrid z = z0;
  z.set_timestep(0);
  session.trajectory.clear();
  session.trajectory.emplace(0, z);
  int prev = 0;
  for (int t : session.grid.inversion_targets()) {
    check_deadline(options, "invert", prev);
    z = guarded("invert", prev, [&] {
      DenoiserOutput out = backend.predict_noise(z, prev, cond, nullptr, true);
      if (out.kv) session.kv_cache.put(t, std::move(*out.kv));
      return transition(z, t, out.eps, session.schedule, rng, NoisePurpose::kInversion);
    });
    session.trajectory.emplace(t, z);
    prev = t;
  }
}

LatentGrid denoise(EditSession& session, LatentGrid start, const Denoiser& backend, const Conditioning& cond,
                   const DenoiseOptions& denoise_options, const EditOptions& options) {
  const CounterRng rng(session.config.seed);
  const auto& grid = session.grid;
  const std::vector<int> steps = grid.inversion_targets();
  LatentGrid z = std::move(start);
  if (z.timestep() != grid.invert_to) throw Error(ErrorCode::kValidation, "denoising must start at invert_to");
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    const int t = *it;
    const int next = std::next(it) == steps.rend() ? 0 : *std::next(it);
    check_deadline(options, "denoise", t);

    const bool paste = denoise_options.copy_paste &&
                       (session.config.cp_mode == CopyPasteMode::kMultiStep ? t >= grid.cp_stop : t == grid.invert_to);
    if (paste) {
      const auto cp_start = Clock::now();
      guarded("copy_paste", t, [&] {
        copy_paste_into(session.trajectory.at(t), z, session.mapped);
        return 0;
      });
      session.cp_timesteps.push_back(t);
      session.timings.cp_ms += elapsed_ms(cp_start);
    }
    if (denoise_options.record) session.edited_trajectory.insert_or_assign(t, z);

    const auto step_start = Clock::now();
    const KvFragment* kv = nullptr;
    if (session.config.kv_swap) {
      kv = session.kv_cache.find(t);
      if (!kv) throw PipelineError("denoise", t, fmt::format("no cached attention K/V for t={}", t));
    }
    z = guarded("denoise", t, [&] {
      DenoiserOutput out = backend.predict_noise(z, t, cond, kv, false);
      return transition(z, next, out.eps, session.schedule, rng, NoisePurpose::kDenoising);
    });
    session.timings.denoise_ms += elapsed_ms(step_start);
  }
  if (denoise_options.record) session.edited_trajectory.insert_or_assign(0, z);
  return z;
}

EditResult run_edit(const ImageBuffer& image, const std::vector<RegionPair>& pairs, const std::string& prompt,
                    const EditConfig& cfg, const Denoiser& backend, const LatentCodec& codec,
                    const EditOptions& options) {
  const auto total_start = Clock::now();
  auto stage_start = Clock::now();
  EditSession session = prepare_session(image.extent(), pairs, cfg, codec.scale_factor(), options);
  session.timings.map_ms = elapsed_ms(stage_start);

  stage_start = Clock::now();
  const LatentGrid z0 = guarded("encode", -1, [&] { return codec.encode(image); });
  if (z0.width() != session.handle_mask.extent.width || z0.height() != session.handle_mask.extent.height) {
    throw PipelineError("encode", -1, "codec latent size disagrees with its scale factor");
  }
  const Conditioning cond = guarded("condition", -1, [&] { return backend.condition(prompt); });
  session.timings.encode_ms = elapsed_ms(stage_start);

  stage_start = Clock::now();
  invert(session, z0, backend, cond, options);
  session.timings.invert_ms = elapsed_ms(stage_start);

  stage_start = Clock::now();
  LatentGrid edited = guarded("blend", session.grid.invert_to, [&] {
    return blend_handle(session.trajectory.at(session.grid.invert_to), session.handle_mask, cfg.blend_alpha,
                        CounterRng(cfg.seed));
  });
  session.timings.blend_ms = elapsed_ms(stage_start);

  edited = denoise(session, std::move(edited), backend, cond, {true, options.record_edited_trajectory}, options);

  stage_start = Clock::now();
  ImageBuffer out = guarded("decode", 0, [&] { return codec.decode(edited); });
  session.timings.decode_ms = elapsed_ms(stage_start);
  session.timings.total_ms = elapsed_ms(total_start);
  return {std::move(out), std::move(session)};
}

}  // namespace regiondrag
