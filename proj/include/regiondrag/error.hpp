// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace regiondrag {

enum class ErrorCode {
  kValidation,
  kEmptyRegion,
  kOutOfBounds,
  kDegenerateGeometry,
  kScheduleInconsistency,
  kShapeMismatch,
  kBackend,
  kPipeline,
  kTimeout,
  kIo,
};

const char* to_string(ErrorCode code);

/// Base exception for every library failure. `code()` lets front ends map
/// failures onto exit statuses and HTTP statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by run_edit when a stage fails after inversion has started.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, int timestep, const std::string& message)
      : Error(ErrorCode::kPipeline, message), stage_(std::move(stage)), timestep_(timestep) {}

  const std::string& stage() const noexcept { return stage_; }
  /// -1 when the failure is not tied to a diffusion step.
  int timestep() const noexcept { return timestep_; }

 private:
  std::string stage_;
  int timestep_;
};

}  // namespace regiondrag
