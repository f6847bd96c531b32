// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/rng.hpp"

#include <cmath>
#include <numbers>

namespace regiondrag {
namespace {

constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double to_open_unit(std::uint64_t b) {
  // 53 random bits, offset by half an ulp so 0 and 1 are never produced.
  return (static_cast<double>(b >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::uint64_t CounterRng::bits(NoisePurpose purpose, std::uint64_t step, std::uint64_t index) const {
  std::uint64_t h = mix(seed_);
  h = mix(h ^ static_cast<std::uint64_t>(purpose));
  h = mix(h ^ step);
  return mix(h ^ index);
}

double CounterRng::uniform(NoisePurpose purpose, std::uint64_t step, std::uint64_t index) const {
  return to_open_unit(bits(purpose, step, index));
}

double CounterRng::normal(NoisePurpose purpose, std::uint64_t step, std::uint64_t index) const {
  // Box-Muller on two decorrelated streams derived from the same counter.
  const std::uint64_t base = bits(purpose, step, index);
  const double u1 = to_open_unit(mix(base ^ 0x5851f42d4c957f2dULL));
  const double u2 = to_open_unit(mix(base ^ 0x14057b7ef767814fULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void CounterRng::fill_normal(std::span<double> out, NoisePurpose purpose, std::uint64_t step) const {
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = normal(purpose, step, static_cast<std::uint64_t>(i));
}

}  // namespace regiondrag
