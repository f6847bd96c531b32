// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/schedule.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "regiondrag/error.hpp"
#include "regiondrag/kernels.hpp"

namespace regiondrag {

NoiseSchedule NoiseSchedule::scaled_linear(int total_steps, double beta_start, double beta_end, double eta) {
  if (total_steps < 1) throw Error(ErrorCode::kValidation, "schedule needs at least one step");
  std::vector<double> alpha_bar(static_cast<std::size_t>(total_steps) + 1);
  alpha_bar[0] = 1.0;
  const double lo = std::sqrt(beta_start), hi = std::sqrt(beta_end);
  double prod = 1.0;
  for (int i = 0; i < total_steps; ++i) {
    const double r = total_steps == 1 ? 0.0 : static_cast<double>(i) / (total_steps - 1);
    const double root = lo + (hi - lo) * r;
    prod *= 1.0 - root * root;
    alpha_bar[static_cast<std::size_t>(i) + 1] = prod;
  }
  return NoiseSchedule("scaled_linear", std::move(alpha_bar), eta);
}

NoiseSchedule NoiseSchedule::linear_alpha_bar(int total_steps, double final_alpha_bar, double eta) {
  if (total_steps < 1) throw Error(ErrorCode::kValidation, "schedule needs at least one step");
  std::vector<double> alpha_bar(static_cast<std::size_t>(total_steps) + 1);
  for (int t = 0; t <= total_steps; ++t) {
    alpha_bar[static_cast<std::size_t>(t)] = 1.0 - (1.0 - final_alpha_bar) * t / total_steps;
  }
  return NoiseSchedule("linear_alpha_bar", std::move(alpha_bar), eta);
}

NoiseSchedule::NoiseSchedule(std::string family, std::vector<double> alpha_bar, double eta)
    : family_(std::move(family)), alpha_bar_(std::move(alpha_bar)), eta_(eta) {
  if (alpha_bar_.size() < 2) throw Error(ErrorCode::kValidation, "schedule needs at least one step");
  if (alpha_bar_[0] != 1.0) throw Error(ErrorCode::kValidation, "alpha_bar[0] must be 1");
  for (std::size_t t = 1; t < alpha_bar_.size(); ++t) {
    if (!(alpha_bar_[t] > 0.0 && alpha_bar_[t] < alpha_bar_[t - 1])) {
      throw Error(ErrorCode::kValidation,
                  fmt::format("alpha_bar must be strictly decreasing in (0, 1]; fails at t={}", t));
    }
  }
  if (!(eta_ >= 0.0) || !std::isfinite(eta_)) throw Error(ErrorCode::kValidation, "eta must be >= 0");
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > total_steps()) {
    throw Error(ErrorCode::kValidation, fmt::format("timestep {} outside [0, {}]", t, total_steps()));
  }
  return alpha_bar_[static_cast<std::size_t>(t)];
}

double NoiseSchedule::sigma(int s, int t) const {
  if (eta_ == 0.0 || s == t) return 0.0;
  const int clean = std::min(s, t), noisy = std::max(s, t);
  const double a_clean = alpha_bar(clean), a_noisy = alpha_bar(noisy);
  return eta_ * std::sqrt((1.0 - a_clean) / (1.0 - a_noisy)) * std::sqrt(1.0 - a_noisy / a_clean);
}

std::vector<int> SamplerGrid::inversion_targets() const {
  std::vector<int> out;
  for (int t : timesteps) {
    if (t <= invert_to) out.push_back(t);
  }
  return out;
}

int SamplerGrid::denoise_steps() const { return static_cast<int>(inversion_targets().size()); }

SamplerGrid build_sampler_grid(const EditConfig& cfg) {
  cfg.validate();
  SamplerGrid grid;
  const int n = cfg.sampler_steps, total = cfg.total_trained_steps;
  for (int k = 1; k <= n; ++k) {
    grid.timesteps.push_back(static_cast<int>(std::llround(static_cast<double>(k) * total / n)));
  }
  const auto nearest = [](const std::vector<int>& points, int t) {
    int best = points.front();
    for (int p : points) {
      if (std::abs(p - t) < std::abs(best - t)) best = p;
    }
    return best;
  };
  grid.invert_to = nearest(grid.timesteps, cfg.invert_to);
  if (grid.invert_to != cfg.invert_to) {
    grid.warnings.push_back(fmt::format("invert_to {} snapped to grid point {}", cfg.invert_to, grid.invert_to));
  }
  std::vector<int> stops{0};
  stops.insert(stops.end(), grid.timesteps.begin(), grid.timesteps.end());
  int stop = nearest(stops, cfg.cp_stop);
  if (stop != cfg.cp_stop) {
    grid.warnings.push_back(fmt::format("cp_stop {} snapped to grid point {}", cfg.cp_stop, stop));
  }
  if (stop > grid.invert_to || (stop == grid.invert_to && cfg.cp_stop < cfg.invert_to)) {
    // The grid cannot separate the two; keep cp_stop one grid step below invert_to.
    auto it = std::find(stops.begin(), stops.end(), grid.invert_to);
    stop = *std::prev(it);
    grid.warnings.push_back(fmt::format("grid too coarse to separate cp_stop from invert_to; cp_stop clamped to {}", stop));
  }
  grid.cp_stop = stop;
  return grid;
}

LatentGrid transition_with_noise(const LatentGrid& z_s, int t, const LatentGrid& eps,
                                 const NoiseSchedule& schedule, std::span<const double> w) {
  if (!z_s.same_shape(eps)) throw Error(ErrorCode::kShapeMismatch, "eps shape differs from latent shape");
  if (!w.empty() && w.size() != z_s.size()) throw Error(ErrorCode::kShapeMismatch, "noise shape differs from latent shape");
  const int s = z_s.timestep();
  const double a_s = schedule.alpha_bar(s), a_t = schedule.alpha_bar(t);
  const double sigma = schedule.sigma(s, t);
  const double residual = 1.0 - a_t - sigma * sigma;
  // Tolerate rounding at the clean endpoint where the residual is exactly 0.
  if (residual < -1e-12) {
    throw Error(ErrorCode::kScheduleInconsistency,
                fmt::format("1 - alpha_bar({}) - sigma^2 = {} < 0 for step {} -> {}", t, residual, s, t));
  }
  const double scale = std::sqrt(a_t / a_s);
  // z_t = scale * (z_s - sqrt(1 - a_s) eps) + sqrt(residual) eps + sigma w
  const double eps_coef = std::sqrt(std::max(residual, 0.0)) - scale * std::sqrt(1.0 - a_s);
  LatentGrid out(z_s.channels(), z_s.height(), z_s.width(), t);
  kernels::affine_combine(z_s.data(), scale, eps.data(), eps_coef, sigma > 0.0 ? w : std::span<const double>{},
                          sigma, out.data());
  out.check_finite("transition output");
  return out;
}

LatentGrid transition(const LatentGrid& z_s, int t, const LatentGrid& eps, const NoiseSchedule& schedule,
                      const CounterRng& rng, NoisePurpose purpose) {
  const double sigma = schedule.sigma(z_s.timestep(), t);
  if (sigma == 0.0) return transition_with_noise(z_s, t, eps, schedule, {});
  std::vector<double> w(z_s.size());
  rng.fill_normal(w, purpose, static_cast<std::uint64_t>(z_s.timestep()));
  return transition_with_noise(z_s, t, eps, schedule, w);
}

LatentGrid blend_handle(const LatentGrid& z, const Mask& handle_mask, double alpha, const CounterRng& rng) {
  if (handle_mask.extent != Extent{z.width(), z.height()}) {
    throw Error(ErrorCode::kShapeMismatch, "handle mask does not match latent spatial dims");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kValidation, "alpha must be within [0, 1]");
  LatentGrid out = z;
  if (alpha == 0.0) return out;
  const double keep = std::sqrt(1.0 - alpha * alpha);
  const std::size_t plane = z.plane_size();
  std::vector<double> noise(z.size());
  rng.fill_normal(noise, NoisePurpose::kBlend, static_cast<std::uint64_t>(z.timestep()));
  auto dst = out.data();
  for (int c = 0; c < z.channels(); ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      if (!handle_mask.bits[i]) continue;
      const std::size_t k = c * plane + i;
      dst[k] = keep * dst[k] + alpha * noise[k];
    }
  }
  return out;
}

std::vector<ScheduleRow> dump_schedule(const NoiseSchedule& schedule, const SamplerGrid& grid) {
  std::vector<ScheduleRow> rows;
  int prev = 0;
  for (int t : grid.timesteps) {
    rows.push_back({t, schedule.alpha_bar(t), schedule.sigma(t, prev)});
    prev = t;
  }
  return rows;
}

}  // namespace regiondrag
