// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "regiondrag/rng.hpp"
#include "regiondrag/types.hpp"

namespace regiondrag {

/// Cumulative signal rates alpha_bar[t] for t in [0, T_max] with
/// alpha_bar[0] = 1, plus the stochasticity eta.
class NoiseSchedule {
 public:
  /// SD-1.5 style: betas linear in sqrt space from beta_start to beta_end.
  static NoiseSchedule scaled_linear(int total_steps = 1000, double beta_start = 0.00085,
                                     double beta_end = 0.012, double eta = 1.0);
  /// alpha_bar linear in t, from 1 down to `final_alpha_bar` at T_max.
  static NoiseSchedule linear_alpha_bar(int total_steps, double final_alpha_bar = 0.01, double eta = 0.0);

  NoiseSchedule(std::string family, std::vector<double> alpha_bar, double eta);

  const std::string& family() const { return family_; }
  int total_steps() const { return static_cast<int>(alpha_bar_.size()) - 1; }
  double alpha_bar(int t) const;
  double eta() const { return eta_; }
  NoiseSchedule with_eta(double eta) const { return NoiseSchedule(family_, alpha_bar_, eta); }

  /// sigma for a step between timesteps s and t, in either direction. The
  /// less noisy endpoint takes the role of the destination in the usual
  /// DDIM variance, so inversion and denoising of the same pair agree.
  double sigma(int s, int t) const;

 private:
  std::string family_;
  std::vector<double> alpha_bar_;
  double eta_;
};

/// Uniform sampler timesteps {round(k * T / n)}, k = 1..n. Timestep 0 is the
/// implicit clean endpoint.
struct SamplerGrid {
  std::vector<int> timesteps;
  int invert_to = 0;
  int cp_stop = 0;
  std::vector<std::string> warnings;

  /// Grid points in (0, invert_to], increasing.
  std::vector<int> inversion_targets() const;
  /// Number of denoising steps from invert_to down to 0.
  int denoise_steps() const;
};

SamplerGrid build_sampler_grid(const EditConfig& cfg);

/// One Eq.-1-style step from z_s (timestep s = z_s.timestep()) to t, with
/// explicit noise w (empty span means no noise term). Throws
/// kScheduleInconsistency when 1 - alpha_bar_t - sigma^2 < 0 and
/// kShapeMismatch when shapes disagree.
LatentGrid transition_with_noise(const LatentGrid& z_s, int t, const LatentGrid& eps,
                                 const NoiseSchedule& schedule, std::span<const double> w);

/// Same step with w drawn from `rng` at (purpose, s) when sigma > 0.
LatentGrid transition(const LatentGrid& z_s, int t, const LatentGrid& eps, const NoiseSchedule& schedule,
                      const CounterRng& rng, NoisePurpose purpose);

/// Resamples the masked part of z: sqrt(1 - alpha^2) z + alpha e, e ~ N(0, 1)
/// drawn at (kBlend, z.timestep()). Unmasked elements are copied unchanged.
LatentGrid blend_handle(const LatentGrid& z, const Mask& handle_mask, double alpha, const CounterRng& rng);

struct ScheduleRow {
  int t = 0;
  double alpha_bar = 0.0;
  double sigma = 0.0;  // sigma of the denoising step arriving at the next lower grid point
};

/// (t, alpha_bar_t, sigma) for every grid point, for golden-file checks.
std::vector<ScheduleRow> dump_schedule(const NoiseSchedule& schedule, const SamplerGrid& grid);

}  // namespace regiondrag
