// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "regiondrag/schedule.hpp"
#include "regiondrag/types.hpp"

namespace regiondrag {

struct Conditioning {
  std::string prompt;
  std::vector<float> embedding;
};

/// Keys and values of one self-attention layer, token-major [tokens x dim].
struct KvLayer {
  int layer = 0;
  int tokens = 0;
  int dim = 0;
  std::vector<float> keys;
  std::vector<float> values;

  friend bool operator==(const KvLayer&, const KvLayer&) = default;
};

struct KvFragment {
  std::vector<KvLayer> layers;

  const KvLayer* find(int layer) const;
  friend bool operator==(const KvFragment&, const KvFragment&) = default;
};

/// Per-timestep K/V captured while inverting; owned by one edit session.
class AttentionCache {
 public:
  void put(int timestep, KvFragment fragment) { entries_[timestep] = std::move(fragment); }
  const KvFragment* find(int timestep) const;
  bool contains(int timestep) const { return entries_.contains(timestep); }
  std::size_t size() const { return entries_.size(); }
  const std::map<int, KvFragment>& entries() const { return entries_; }

 private:
  std::map<int, KvFragment> entries_;
};

struct DenoiserOutput {
  LatentGrid eps;
  std::optional<KvFragment> kv;
};

/// eps_theta(z, t, c). When `kv_override` is given, self-attention uses its
/// keys and values in place of the ones computed from `z`; queries are always
/// computed from `z`.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual std::string name() const = 0;
  /// True when predict_noise may be called from several threads at once.
  virtual bool concurrent() const { return true; }
  virtual Conditioning condition(const std::string& prompt) const;
  virtual DenoiserOutput predict_noise(const LatentGrid& z, int t, const Conditioning& c,
                                       const KvFragment* kv_override, bool capture_kv) const = 0;
};

/// eps = 0 everywhere.
class ZeroDenoiser final : public Denoiser {
 public:
  std::string name() const override { return "zero"; }
  DenoiserOutput predict_noise(const LatentGrid& z, int t, const Conditioning& c,
                               const KvFragment* kv_override, bool capture_kv) const override;
};

/// eps = a fixed grid (or a scalar broadcast to the input shape).
class ConstantDenoiser final : public Denoiser {
 public:
  explicit ConstantDenoiser(double value) : value_(value) {}
  explicit ConstantDenoiser(LatentGrid grid) : grid_(std::move(grid)) {}

  std::string name() const override { return "constant"; }
  DenoiserOutput predict_noise(const LatentGrid& z, int t, const Conditioning& c,
                               const KvFragment* kv_override, bool capture_kv) const override;

 private:
  double value_ = 0.0;
  std::optional<LatentGrid> grid_;
};

struct ToyDenoiserOptions {
  int channels = 4;
  int hidden = 16;
  int heads = 2;
  int head_dim = 2;
  int embed_dim = 8;
  std::uint64_t weight_seed = 0x5eed;
  /// Gain on the tanh-bounded network branch.
  double network_gain = 0.1;
  /// Variance of the Gaussian clean-signal prior behind the analytic term.
  double prior_variance = 0.25;
};

/// Untrained, deterministic stand-in for a UNet: conv -> one multi-head
/// self-attention block over all H*W tokens -> conv, with sinusoidal time and
/// hashed-prompt embeddings. Its eps adds an analytic term, the MMSE noise
/// estimate for a zero-mean Gaussian clean signal, so trajectories denoise
/// rather than drift. Read-only after construction.
class ToyDenoiser final : public Denoiser {
 public:
  ToyDenoiser(NoiseSchedule schedule, ToyDenoiserOptions options = {});

  std::string name() const override { return "toy"; }
  Conditioning condition(const std::string& prompt) const override;
  DenoiserOutput predict_noise(const LatentGrid& z, int t, const Conditioning& c,
                               const KvFragment* kv_override, bool capture_kv) const override;

  const ToyDenoiserOptions& options() const { return options_; }
  /// Upper bound on |eps| for inputs within [-5, 5].
  double output_bound() const;

 private:
  NoiseSchedule schedule_;
  ToyDenoiserOptions options_;
  std::vector<float> conv_in_w_, conv_in_b_;
  std::vector<float> time_w_, cond_w_;
  std::vector<float> wq_, wk_, wv_, wo_;
  std::vector<float> conv_out_w_, conv_out_b_;
};

struct BackendOptions {
  NoiseSchedule schedule = NoiseSchedule::scaled_linear();
  int latent_channels = 4;
  double constant_value = 0.1;
};

using BackendFactory = std::function<std::unique_ptr<Denoiser>(const BackendOptions&)>;

/// Name -> factory. `builtin()` knows "toy", "zero" and "constant".
class BackendRegistry {
 public:
  static BackendRegistry builtin();

  void add(const std::string& name, BackendFactory factory);
  bool contains(const std::string& name) const { return factories_.contains(name); }
  std::vector<std::string> names() const;
  /// Throws kBackend for unknown names.
  std::unique_ptr<Denoiser> create(const std::string& name, const BackendOptions& options) const;

 private:
  std::map<std::string, BackendFactory> factories_;
};

}  // namespace regiondrag
