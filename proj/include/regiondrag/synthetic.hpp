// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "regiondrag/dataset.hpp"

namespace regiondrag {

struct TranslationFixtureOptions {
  int size = 64;
  int square = 8;
  int shift_x = 16;
  int shift_y = 0;
  /// Handle equals target (no-op edit) when set.
  bool identity = false;
};

/// Dim textured background with one bright textured square; the region pair
/// moves the square by (shift_x, shift_y). The evaluation point is the square
/// centre. Square placement and texture depend on `seed`.
BenchSample make_translation_sample(std::uint64_t seed, const TranslationFixtureOptions& options = {});

/// Writes `count` translation samples (PNG + manifest.jsonl) under `root`.
std::vector<BenchSample> write_translation_dataset(const std::filesystem::path& root, int count,
                                                   std::uint64_t seed, const TranslationFixtureOptions& options = {});

}  // namespace regiondrag
