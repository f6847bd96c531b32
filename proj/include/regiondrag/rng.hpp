// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

namespace regiondrag {

enum class NoisePurpose : std::uint32_t {
  kInversion = 1,
  kDenoising = 2,
  kBlend = 3,
  kSubset = 4,
  kFixture = 5,
  kWeights = 6,
};

/// Counter-based generator: every draw is a pure function of
/// (seed, purpose, step, index), so results do not depend on draw order or
/// on how elements are split across threads.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits(NoisePurpose purpose, std::uint64_t step, std::uint64_t index) const;
  /// Uniform in the open interval (0, 1).
  double uniform(NoisePurpose purpose, std::uint64_t step, std::uint64_t index) const;
  double normal(NoisePurpose purpose, std::uint64_t step, std::uint64_t index) const;

  /// out[i] = normal(purpose, step, i).
  void fill_normal(std::span<double> out, NoisePurpose purpose, std::uint64_t step) const;

 private:
  std::uint64_t seed_;
};

}  // namespace regiondrag
