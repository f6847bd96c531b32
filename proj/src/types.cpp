// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "regiondrag/error.hpp"

namespace regiondrag {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kEmptyRegion: return "empty_region";
    case ErrorCode::kOutOfBounds: return "out_of_bounds";
    case ErrorCode::kDegenerateGeometry: return "degenerate_geometry";
    case ErrorCode::kScheduleInconsistency: return "schedule_inconsistency";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kBackend: return "backend";
    case ErrorCode::kPipeline: return "pipeline";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

ImageBuffer::ImageBuffer(int width, int height, int channels)
    : ImageBuffer(width, height, channels,
                  std::vector<float>(static_cast<std::size_t>(std::max(width, 0)) *
                                     std::max(height, 0) * std::max(channels, 0))) {}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  if (width <= 0 || height <= 0 || channels <= 0) {
    throw Error(ErrorCode::kValidation,
                fmt::format("image dimensions must be positive, got {}x{}x{}", width, height, channels));
  }
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(ErrorCode::kValidation, "image data length does not match width*height*channels");
  }
  for (float v : data_) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw Error(ErrorCode::kValidation, "image values must be finite and within [0, 1]");
    }
  }
}

LatentGrid::LatentGrid(int channels, int height, int width, int timestep)
    : LatentGrid(channels, height, width, timestep,
                 std::vector<double>(static_cast<std::size_t>(std::max(channels, 0)) *
                                     std::max(height, 0) * std::max(width, 0))) {}

LatentGrid::LatentGrid(int channels, int height, int width, int timestep, std::vector<double> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
  if (channels <= 0 || height <= 0 || width <= 0) {
    throw Error(ErrorCode::kValidation,
                fmt::format("latent dimensions must be positive, got {}x{}x{}", channels, height, width));
  }
  if (data_.size() != static_cast<std::size_t>(channels) * height * width) {
    throw Error(ErrorCode::kValidation, "latent data length does not match channels*height*width");
  }
  set_timestep(timestep);
  check_finite("latent");
}

void LatentGrid::set_timestep(int t) {
  if (t < 0 || t > kMaxTimestep) {
    throw Error(ErrorCode::kValidation, fmt::format("timestep {} out of range", t));
  }
  timestep_ = t;
}

void LatentGrid::check_finite(const char* what) const {
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kValidation, fmt::format("{} contains non-finite values", what));
    }
  }
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](auto b) { return b != 0; }));
}

const char* to_string(CopyPasteMode mode) {
  return mode == CopyPasteMode::kMultiStep ? "multi-step" : "initial-only";
}

CopyPasteMode copy_paste_mode_from_string(const std::string& s) {
  if (s == "multi-step") return CopyPasteMode::kMultiStep;
  if (s == "initial-only") return CopyPasteMode::kInitialOnly;
  throw Error(ErrorCode::kValidation, fmt::format("unknown cp mode '{}'", s));
}

void EditConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kValidation, msg); };
  if (total_trained_steps < 1) fail("total_trained_steps must be >= 1");
  if (sampler_steps < 1) fail("sampler_steps must be >= 1");
  if (sampler_steps > total_trained_steps) fail("sampler_steps cannot exceed total_trained_steps");
  if (cp_stop < 0 || cp_stop > invert_to || invert_to > total_trained_steps) {
    fail(fmt::format("need 0 <= cp_stop ({}) <= invert_to ({}) <= total_trained_steps ({})", cp_stop,
                     invert_to, total_trained_steps));
  }
  if (!(blend_alpha >= 0.0 && blend_alpha <= 1.0)) fail("blend_alpha must be within [0, 1]");
  if (!(eta >= 0.0) || !std::isfinite(eta)) fail("eta must be >= 0");
}

}  // namespace regiondrag
