// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/denoiser.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "regiondrag/error.hpp"
#include "regiondrag/kernels.hpp"
#include "regiondrag/rng.hpp"

namespace regiondrag {
namespace {

std::vector<float> random_tensor(const CounterRng& rng, std::uint64_t tensor_id, std::size_t n, double stddev) {
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<float>(stddev * rng.normal(NoisePurpose::kWeights, tensor_id, i));
  }
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// out[r] = sum_c m[r * cols + c] * v[c]
void matvec(const std::vector<float>& m, const std::vector<float>& v, std::vector<float>& out, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    float acc = 0.0f;
    for (int c = 0; c < cols; ++c) acc += m[static_cast<std::size_t>(r) * cols + c] * v[c];
    out[r] = acc;
  }
}

}  // namespace

const KvLayer* KvFragment::find(int layer) const {
  for (const auto& l : layers) {
    if (l.layer == layer) return &l;
  }
  return nullptr;
}

const KvFragment* AttentionCache::find(int timestep) const {
  auto it = entries_.find(timestep);
  return it == entries_.end() ? nullptr : &it->second;
}

Conditioning Denoiser::condition(const std::string& prompt) const { return {prompt, {}}; }

namespace {

// Attention-free backends capture an empty fragment so the cache still has
// one entry per grid step.
std::optional<KvFragment> no_layers(bool capture) {
  return capture ? std::optional<KvFragment>(KvFragment{}) : std::nullopt;
}

}  // namespace

DenoiserOutput ZeroDenoiser::predict_noise(const LatentGrid& z, int t, const Conditioning&, const KvFragment*,
                                           bool capture_kv) const {
  return {LatentGrid(z.channels(), z.height(), z.width(), t), no_layers(capture_kv)};
}

DenoiserOutput ConstantDenoiser::predict_noise(const LatentGrid& z, int t, const Conditioning&, const KvFragment*,
                                               bool capture_kv) const {
  if (grid_) {
    if (!grid_->same_shape(z)) throw Error(ErrorCode::kShapeMismatch, "constant eps grid does not match the latent");
    LatentGrid eps = *grid_;
    eps.set_timestep(t);
    return {std::move(eps), no_layers(capture_kv)};
  }
  LatentGrid eps(z.channels(), z.height(), z.width(), t);
  std::fill(eps.data().begin(), eps.data().end(), value_);
  return {std::move(eps), no_layers(capture_kv)};
}

ToyDenoiser::ToyDenoiser(NoiseSchedule schedule, ToyDenoiserOptions options)
    : schedule_(std::move(schedule)), options_(options) {
  const auto& o = options_;
  if (o.channels <= 0 || o.hidden <= 0 || o.heads <= 0 || o.head_dim <= 0 || o.embed_dim <= 0 || o.embed_dim % 2) {
    throw Error(ErrorCode::kValidation, "invalid toy denoiser geometry");
  }
  const CounterRng rng(o.weight_seed);
  const auto c = static_cast<std::size_t>(o.channels), h = static_cast<std::size_t>(o.hidden);
  const auto width = static_cast<std::size_t>(o.heads * o.head_dim), e = static_cast<std::size_t>(o.embed_dim);
  conv_in_w_ = random_tensor(rng, 1, h * c * 9, 1.0 / std::sqrt(9.0 * c));
  conv_in_b_ = random_tensor(rng, 2, h, 0.1);
  time_w_ = random_tensor(rng, 3, h * e, 1.0 / std::sqrt(static_cast<double>(e)));
  cond_w_ = random_tensor(rng, 4, h * e, 1.0 / std::sqrt(static_cast<double>(e)));
  wq_ = random_tensor(rng, 5, width * h, 1.0 / std::sqrt(static_cast<double>(h)));
  wk_ = random_tensor(rng, 6, width * h, 1.0 / std::sqrt(static_cast<double>(h)));
  wv_ = random_tensor(rng, 7, width * h, 1.0 / std::sqrt(static_cast<double>(h)));
  wo_ = random_tensor(rng, 8, h * width, 1.0 / std::sqrt(static_cast<double>(width)));
  conv_out_w_ = random_tensor(rng, 9, c * h * 9, 1.0 / std::sqrt(9.0 * h));
  conv_out_b_ = random_tensor(rng, 10, c, 0.1);
}

Conditioning ToyDenoiser::condition(const std::string& prompt) const {
  const CounterRng rng(fnv1a(prompt));
  Conditioning c{prompt, std::vector<float>(static_cast<std::size_t>(options_.embed_dim))};
  for (std::size_t i = 0; i < c.embedding.size(); ++i) {
    c.embedding[i] = static_cast<float>(2.0 * rng.uniform(NoisePurpose::kWeights, 0, i) - 1.0);
  }
  return c;
}

double ToyDenoiser::output_bound() const {
  double worst = 0.0;
  for (int t = 0; t <= schedule_.total_steps(); ++t) {
    const double a = schedule_.alpha_bar(t);
    worst = std::max(worst, std::sqrt(1.0 - a) * 5.0 / (a * options_.prior_variance + 1.0 - a));
  }
  return worst + options_.network_gain;
}

DenoiserOutput ToyDenoiser::predict_noise(const LatentGrid& z, int t, const Conditioning& cond,
                                          const KvFragment* kv_override, bool capture_kv) const {
  const auto& o = options_;
  if (z.channels() != o.channels) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("toy denoiser expects {} channels, got {}", o.channels, z.channels()));
  }
  if (cond.embedding.size() != static_cast<std::size_t>(o.embed_dim)) {
    throw Error(ErrorCode::kShapeMismatch, "conditioning embedding has the wrong length");
  }
  const int hgt = z.height(), wid = z.width(), n = hgt * wid;
  const int width = o.heads * o.head_dim;
  const auto un = static_cast<std::size_t>(n);

  std::vector<float> x(z.size());
  std::transform(z.data().begin(), z.data().end(), x.begin(), [](double v) { return static_cast<float>(v); });

  // Per-feature bias from the sinusoidal time embedding and the prompt.
  std::vector<float> temb(static_cast<std::size_t>(o.embed_dim));
  for (int i = 0; i < o.embed_dim / 2; ++i) {
    const double freq = std::pow(10000.0, -2.0 * i / o.embed_dim);
    temb[2 * i] = static_cast<float>(std::sin(t * freq));
    temb[2 * i + 1] = static_cast<float>(std::cos(t * freq));
  }
  std::vector<float> tbias(static_cast<std::size_t>(o.hidden)), cbias(static_cast<std::size_t>(o.hidden));
  matvec(time_w_, temb, tbias, o.hidden, o.embed_dim);
  matvec(cond_w_, cond.embedding, cbias, o.hidden, o.embed_dim);
  std::vector<float> bias1(conv_in_b_);
  for (int f = 0; f < o.hidden; ++f) bias1[f] += tbias[f] + cbias[f];

  std::vector<float> hid(static_cast<std::size_t>(o.hidden) * un);
  kernels::conv3x3(x, o.channels, hgt, wid, conv_in_w_, bias1, o.hidden, hid);
  for (auto& v : hid) v = v / (1.0f + std::exp(-v));  // SiLU

  std::vector<float> q(un * width), k(un * width), v(un * width);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < width; ++a) {
      float sq = 0.0f, sk = 0.0f, sv = 0.0f;
      for (int f = 0; f < o.hidden; ++f) {
        const float hv = hid[static_cast<std::size_t>(f) * un + i];
        const std::size_t wi = static_cast<std::size_t>(a) * o.hidden + f;
        sq += wq_[wi] * hv;
        sk += wk_[wi] * hv;
        sv += wv_[wi] * hv;
      }
      const std::size_t ti = static_cast<std::size_t>(i) * width + a;
      q[ti] = sq;
      k[ti] = sk;
      v[ti] = sv;
    }
  }

  const std::vector<float>* keys = &k;
  const std::vector<float>* values = &v;
  if (kv_override) {
    const KvLayer* layer = kv_override->find(0);
    if (!layer || layer->tokens != n || layer->dim != width || layer->keys.size() != un * width ||
        layer->values.size() != un * width) {
      throw Error(ErrorCode::kShapeMismatch,
                  fmt::format("kv override does not match the attention layer ({} tokens x {})", n, width));
    }
    keys = &layer->keys;
    values = &layer->values;
  }

  std::vector<float> attn(un * width);
  kernels::attention(q, *keys, *values, attn, {n, o.heads, o.head_dim});

#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < o.hidden; ++f) {
      float acc = 0.0f;
      for (int a = 0; a < width; ++a) acc += wo_[static_cast<std::size_t>(f) * width + a] * attn[static_cast<std::size_t>(i) * width + a];
      hid[static_cast<std::size_t>(f) * un + i] += acc;
    }
  }

  std::vector<float> net(static_cast<std::size_t>(o.channels) * un);
  kernels::conv3x3(hid, o.hidden, hgt, wid, conv_out_w_, conv_out_b_, o.channels, net);

  const double a = schedule_.alpha_bar(t);
  const double prior = std::sqrt(1.0 - a) / (a * o.prior_variance + 1.0 - a);
  LatentGrid eps(z.channels(), hgt, wid, t);
  auto out = eps.data();
  const auto in = z.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = prior * in[i] + o.network_gain * std::tanh(static_cast<double>(net[i]));
  }

  DenoiserOutput result{std::move(eps), std::nullopt};
  if (capture_kv) {
    result.kv = KvFragment{{KvLayer{0, n, width, std::move(k), std::move(v)}}};
  }
  return result;
}

void BackendRegistry::add(const std::string& name, BackendFactory factory) {
  factories_[name] = std::move(factory);
}

std::vector<std::string> BackendRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : factories_) out.push_back(name);
  return out;
}

std::unique_ptr<Denoiser> BackendRegistry::create(const std::string& name, const BackendOptions& options) const {
  auto it = factories_.find(name);
  if (it == factories_.end()) throw Error(ErrorCode::kBackend, fmt::format("unknown backend '{}'", name));
  return it->second(options);
}

BackendRegistry BackendRegistry::builtin() {
  BackendRegistry reg;
  reg.add("toy", [](const BackendOptions& o) {
    ToyDenoiserOptions toy;
    toy.channels = o.latent_channels;
    return std::make_unique<ToyDenoiser>(o.schedule, toy);
  });
  reg.add("zero", [](const BackendOptions&) { return std::make_unique<ZeroDenoiser>(); });
  reg.add("constant", [](const BackendOptions& o) { return std::make_unique<ConstantDenoiser>(o.constant_value); });
  return reg;
}

}  // namespace regiondrag
