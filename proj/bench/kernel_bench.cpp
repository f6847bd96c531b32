// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

// Parallel kernels against their serial references, at the sizes the toy
// backend sees for a 64x64 latent.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "regiondrag/kernels.hpp"
#include "regiondrag/pipeline.hpp"

namespace rd = regiondrag;
namespace k = regiondrag::kernels;

namespace {

std::vector<float> randf(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<float> d;
  std::vector<float> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

std::vector<float> unitf(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<float> d(0.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

std::vector<double> randd(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

template <auto Fn>
void BM_attention(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const k::AttentionShape shape{side * side, 2, 2};
  const std::size_t n = static_cast<std::size_t>(shape.tokens) * shape.width();
  const auto q = randf(n, 1), kk = randf(n, 2), v = randf(n, 3);
  std::vector<float> out(n);
  for (auto _ : state) {
    Fn(q, kk, v, out, shape);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(shape.tokens) * shape.tokens);
}

template <auto Fn>
void BM_conv3x3(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0)), cin = 4, cout = 16;
  const auto in = randf(static_cast<std::size_t>(cin) * side * side, 1);
  const auto w = randf(static_cast<std::size_t>(cout) * cin * 9, 2), b = randf(cout, 3);
  std::vector<float> out(static_cast<std::size_t>(cout) * side * side);
  for (auto _ : state) {
    Fn(in, cin, side, side, w, b, cout, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Fn>
void BM_affine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = randd(n, 1), y = randd(n, 2), z = randd(n, 3);
  std::vector<double> out(n);
  for (auto _ : state) {
    Fn(x, 0.9, y, 0.3, z, 0.1, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(n * 4 * sizeof(double)));
}

template <auto Fn>
void BM_search_mask(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::vector<std::uint8_t> out(static_cast<std::size_t>(side) * side);
  for (auto _ : state) {
    Fn({side / 4, side / 3}, {side / 2, side / 2}, {side, side}, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Fn>
void BM_patch_ncc(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  rd::ImageBuffer a(side, side, 3, unitf(static_cast<std::size_t>(side) * side * 3, 1));
  rd::ImageBuffer b(side, side, 3, unitf(static_cast<std::size_t>(side) * side * 3, 2));
  std::vector<rd::Point> cands;
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) cands.push_back({x, y});
  std::vector<double> scores(cands.size());
  for (auto _ : state) {
    Fn(a, {side / 2, side / 2}, b, cands, 3, scores);
    benchmark::DoNotOptimize(scores.data());
  }
}

void BM_copy_paste(benchmark::State& state) {
  const int side = 64;
  rd::LatentGrid src(4, side, side, 0, randd(4u * side * side, 1));
  rd::LatentGrid dst(4, side, side, 0, randd(4u * side * side, 2));
  rd::MappedPointSet pairs;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) pairs.push({{x, y}, {x + 32, y + 24}, rd::CoordSpace::kLatent}, 0);
  for (auto _ : state) {
    rd::copy_paste_into(src, dst, pairs);
    benchmark::DoNotOptimize(dst.data().data());
  }
}

}  // namespace

BENCHMARK(BM_attention<k::attention>)->Name("attention/parallel")->Arg(32)->Arg(64);
BENCHMARK(BM_attention<k::reference::attention>)->Name("attention/reference")->Arg(32)->Arg(64);
BENCHMARK(BM_conv3x3<k::conv3x3>)->Name("conv3x3/parallel")->Arg(64);
BENCHMARK(BM_conv3x3<k::reference::conv3x3>)->Name("conv3x3/reference")->Arg(64);
BENCHMARK(BM_affine<k::affine_combine>)->Name("affine_combine/parallel")->Arg(1 << 14)->Arg(1 << 20);
BENCHMARK(BM_affine<k::reference::affine_combine>)->Name("affine_combine/reference")->Arg(1 << 14)->Arg(1 << 20);
BENCHMARK(BM_search_mask<k::search_mask>)->Name("search_mask/parallel")->Arg(512);
BENCHMARK(BM_search_mask<k::reference::search_mask>)->Name("search_mask/reference")->Arg(512);
BENCHMARK(BM_patch_ncc<k::patch_ncc>)->Name("patch_ncc/parallel")->Arg(64);
BENCHMARK(BM_patch_ncc<k::reference::patch_ncc>)->Name("patch_ncc/reference")->Arg(64);
BENCHMARK(BM_copy_paste);

BENCHMARK_MAIN();
