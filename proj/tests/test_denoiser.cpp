// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "regiondrag/codec.hpp"
#include "regiondrag/denoiser.hpp"
#include "regiondrag/error.hpp"
#include "regiondrag/schedule.hpp"

using namespace regiondrag;

namespace {

LatentGrid uniform_latent(int c, int h, int w, int t, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  LatentGrid z(c, h, w, t);
  for (auto& v : z.data()) v = u(gen);
  return z;
}

ToyDenoiser toy(int channels = 4) {
  ToyDenoiserOptions o;
  o.channels = channels;
  return ToyDenoiser(NoiseSchedule::scaled_linear(), o);
}

}  // namespace

TEST_CASE("zero and constant backends") {
  const LatentGrid z = uniform_latent(4, 6, 5, 300, -2, 2, 1);
  const ZeroDenoiser zero;
  const auto out = zero.predict_noise(z, 300, zero.condition("x"), nullptr, false);
  CHECK(out.eps.same_shape(z));
  for (double v : out.eps.data()) CHECK(v == 0.0);
  CHECK_FALSE(out.kv.has_value());
  const auto captured = zero.predict_noise(z, 300, zero.condition("x"), nullptr, true);
  REQUIRE(captured.kv.has_value());
  CHECK(captured.kv->layers.empty());

  const ConstantDenoiser c(0.25);
  const auto constant = c.predict_noise(z, 300, c.condition(""), nullptr, false);
  for (double v : constant.eps.data()) CHECK(v == 0.25);
  const LatentGrid g = uniform_latent(4, 6, 5, 0, -1, 1, 2);
  const ConstantDenoiser cg(g);
  CHECK(cg.predict_noise(z, 300, cg.condition(""), nullptr, false).eps.data()[7] == g.data()[7]);
  CHECK_THROWS_AS(cg.predict_noise(LatentGrid(4, 5, 5, 0), 0, cg.condition(""), nullptr, false), Error);
}

TEST_CASE("toy backend is deterministic") {
  const ToyDenoiser d = toy();
  const LatentGrid z = uniform_latent(4, 12, 10, 500, -1, 1, 3);
  const auto c = d.condition("a cat");
  const auto a = d.predict_noise(z, 500, c, nullptr, true);
  const auto b = toy().predict_noise(z, 500, toy().condition("a cat"), nullptr, true);
  CHECK(a.eps == b.eps);
  CHECK(a.kv == b.kv);
  CHECK(a.eps.timestep() == 500);
}

TEST_CASE("toy: prompt and timestep change eps") {
  const ToyDenoiser d = toy();
  const LatentGrid z = uniform_latent(4, 8, 8, 400, -1, 1, 4);
  const auto e1 = d.predict_noise(z, 400, d.condition("a cat"), nullptr, false).eps;
  const auto e2 = d.predict_noise(z, 400, d.condition("a dog"), nullptr, false).eps;
  const auto e3 = d.predict_noise(z, 450, d.condition("a cat"), nullptr, false).eps;
  CHECK(e1 != e2);
  CHECK(e1 != e3);
  CHECK(d.condition("a cat").embedding.size() == static_cast<std::size_t>(d.options().embed_dim));
}

TEST_CASE("KV self-substitution is a no-op") {
  const ToyDenoiser d = toy();
  const auto c = d.condition("p");
  for (int t : {50, 500, 1000}) {
    const LatentGrid z = uniform_latent(4, 9, 7, t, -3, 3, static_cast<std::uint64_t>(t));
    const auto plain = d.predict_noise(z, t, c, nullptr, true);
    REQUIRE(plain.kv);
    const auto injected = d.predict_noise(z, t, c, &*plain.kv, true);
    CHECK(injected.eps == plain.eps);
    CHECK(injected.kv == plain.kv);
  }
}

TEST_CASE("KV injection changes output for a different source") {
  const ToyDenoiser d = toy();
  const auto c = d.condition("p");
  const LatentGrid z1 = uniform_latent(4, 8, 8, 300, -1, 1, 5), z2 = uniform_latent(4, 8, 8, 300, -1, 1, 6);
  const auto kv2 = d.predict_noise(z2, 300, c, nullptr, true).kv;
  CHECK(d.predict_noise(z1, 300, c, &*kv2, false).eps != d.predict_noise(z1, 300, c, nullptr, false).eps);
}

TEST_CASE("KV override shape mismatch is rejected") {
  const ToyDenoiser d = toy();
  const auto c = d.condition("p");
  const auto kv = d.predict_noise(uniform_latent(4, 4, 4, 100, -1, 1, 7), 100, c, nullptr, true).kv;
  try {
    d.predict_noise(uniform_latent(4, 5, 4, 100, -1, 1, 8), 100, c, &*kv, false);
    FAIL("expected shape mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
  }
  CHECK_THROWS_AS(d.predict_noise(LatentGrid(3, 4, 4, 100), 100, c, nullptr, false), Error);
}

TEST_CASE("toy output is bounded for inputs in [-5, 5]") {
  const ToyDenoiser d = toy();
  const auto c = d.condition("bound");
  const double bound = d.output_bound();
  CHECK(std::isfinite(bound));
  for (int t : {1, 50, 250, 500, 999, 1000}) {
    for (std::uint64_t seed : {1u, 2u}) {
      const LatentGrid z = uniform_latent(4, 8, 8, t, -5, 5, seed);
      const auto eps = d.predict_noise(z, t, c, nullptr, false).eps;
      CHECK(eps.same_shape(z));
      for (double v : eps.data()) CHECK(std::abs(v) <= bound);
    }
    LatentGrid edge(4, 8, 8, t);
    for (auto& v : edge.data()) v = 5.0;
    const auto edge_out = d.predict_noise(edge, t, c, nullptr, false);
    for (double v : edge_out.eps.data()) CHECK(std::abs(v) <= bound);
  }
}

TEST_CASE("backend registry") {
  const auto reg = BackendRegistry::builtin();
  CHECK(reg.names() == std::vector<std::string>{"constant", "toy", "zero"});
  BackendOptions o;
  o.latent_channels = 3;
  CHECK(reg.create("toy", o)->name() == "toy");
  CHECK(reg.create("zero", o)->name() == "zero");
  try {
    reg.create("sd15", o);
    FAIL("expected backend error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBackend);
  }
}

TEST_CASE("attention cache lookup") {
  AttentionCache cache;
  cache.put(100, KvFragment{{KvLayer{0, 1, 1, {1.0f}, {2.0f}}}});
  CHECK(cache.contains(100));
  CHECK(cache.find(50) == nullptr);
  REQUIRE(cache.find(100) != nullptr);
  CHECK(cache.find(100)->find(0)->values[0] == 2.0f);
  CHECK(cache.find(100)->find(1) == nullptr);
}

TEST_CASE("identity codec round trip is exact") {
  const ImageBuffer img = oracle::textured_image(13, 9, 3);
  const IdentityCodec codec;
  const LatentGrid z = codec.encode(img);
  CHECK(z.channels() == 3);
  CHECK(z.width() == 13);
  CHECK(codec.decode(z) == img);
}

TEST_CASE("block codec: shape and exactness on block-constant images") {
  const BlockCodec codec(8);
  ImageBuffer img(32, 16, 3);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<float>(((x / 8) * 3 + (y / 8) + c) % 7) / 7.0f;
  const LatentGrid z = codec.encode(img);
  CHECK(z.channels() == 4);
  CHECK(z.width() == 4);
  CHECK(z.height() == 2);
  CHECK(codec.decode(z) == img);
  CHECK(make_codec("block")->scale_factor() == 8);
  CHECK_THROWS_AS(make_codec("vae"), Error);
}
