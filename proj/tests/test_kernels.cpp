// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "regiondrag/kernels.hpp"

using namespace regiondrag;

namespace {

std::vector<float> randf(std::size_t n, std::uint64_t seed, float scale = 1.0f) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<float> d(0.0f, scale);
  std::vector<float> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

}  // namespace

TEST_CASE("attention: parallel kernel matches the serial reference") {
  for (auto shape : {kernels::AttentionShape{1, 1, 1}, kernels::AttentionShape{37, 2, 2},
                     kernels::AttentionShape{256, 2, 2}, kernels::AttentionShape{100, 3, 4},
                     kernels::AttentionShape{64, 1, 3}, kernels::AttentionShape{50, 2, 5}}) {
    const std::size_t n = static_cast<std::size_t>(shape.tokens) * shape.width();
    const auto q = randf(n, 1, 2.0f), k = randf(n, 2, 2.0f), v = randf(n, 3);
    std::vector<float> fast(n), ref(n);
    kernels::attention(q, k, v, fast, shape);
    kernels::reference::attention(q, k, v, ref, shape);
    for (std::size_t i = 0; i < n; ++i) CHECK(fast[i] == doctest::Approx(ref[i]).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("attention: uniform keys average the values") {
  const int n = 16;
  std::vector<float> q = randf(n * 2, 4), k(n * 2, 0.5f), v(n * 2), out(n * 2);
  for (int j = 0; j < n; ++j) {
    v[j * 2] = static_cast<float>(j);
    v[j * 2 + 1] = 1.0f;
  }
  kernels::attention(q, k, v, out, {n, 1, 2});
  for (int i = 0; i < n; ++i) {
    CHECK(out[i * 2] == doctest::Approx(7.5f).epsilon(1e-6));
    CHECK(out[i * 2 + 1] == doctest::Approx(1.0f).epsilon(1e-6));
  }
}

TEST_CASE("conv3x3: parallel kernel matches reference and a hand-computed pixel") {
  const int cin = 3, cout = 5, h = 11, w = 9;
  const auto in = randf(static_cast<std::size_t>(cin) * h * w, 5);
  const auto wt = randf(static_cast<std::size_t>(cout) * cin * 9, 6);
  const auto b = randf(cout, 7);
  std::vector<float> fast(static_cast<std::size_t>(cout) * h * w), ref(fast.size());
  kernels::conv3x3(in, cin, h, w, wt, b, cout, fast);
  kernels::reference::conv3x3(in, cin, h, w, wt, b, cout, ref);
  for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == doctest::Approx(ref[i]).epsilon(1e-5));
  // Corner pixel (0,0) of output channel 2, zero padding outside.
  double acc = b[2];
  for (int c = 0; c < cin; ++c)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        const int y = ky - 1, x = kx - 1;
        if (y < 0 || x < 0) continue;
        acc += wt[((2 * cin + c) * 3 + ky) * 3 + kx] * in[(c * h + y) * w + x];
      }
  CHECK(fast[2 * h * w] == doctest::Approx(acc).epsilon(1e-5));
}

TEST_CASE("affine_combine matches reference") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> d;
  std::vector<double> x(1000), y(1000), n(1000), f(1000), r(1000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = d(gen);
    y[i] = d(gen);
    n[i] = d(gen);
  }
  kernels::affine_combine(x, 0.3, y, -1.7, n, 0.2, f);
  kernels::reference::affine_combine(x, 0.3, y, -1.7, n, 0.2, r);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == doctest::Approx(r[i]).epsilon(1e-14));
  kernels::affine_combine(x, 0.3, y, -1.7, {}, 99.0, f);
  kernels::reference::affine_combine(x, 0.3, y, -1.7, {}, 99.0, r);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == doctest::Approx(0.3 * x[i] - 1.7 * y[i]).epsilon(1e-14));
}

TEST_CASE("search mask: both versions agree with the per-pixel predicate") {
  std::mt19937_64 gen(9);
  const Extent e{37, 23};
  std::uniform_int_distribution<int> ux(0, e.width - 1), uy(0, e.height - 1);
  for (int i = 0; i < 30; ++i) {
    const Point h{ux(gen), uy(gen)}, t{ux(gen), uy(gen)};
    std::vector<std::uint8_t> fast(static_cast<std::size_t>(e.width) * e.height), ref(fast.size());
    kernels::search_mask(h, t, e, fast);
    kernels::reference::search_mask(h, t, e, ref);
    CHECK(fast == ref);
    for (int y = 0; y < e.height; ++y)
      for (int x = 0; x < e.width; ++x)
        CHECK(static_cast<bool>(fast[y * e.width + x]) == oracle::in_search_mask({x, y}, h, t, e));
  }
}

TEST_CASE("patch NCC: parallel matches reference; exact patch scores 1") {
  const ImageBuffer a = oracle::textured_image(20, 20, 1);
  const ImageBuffer b = oracle::textured_image(20, 20, 2);
  std::vector<Point> cands;
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) cands.push_back({x, y});
  std::vector<double> fast(cands.size()), ref(cands.size()), self(cands.size());
  kernels::patch_ncc(a, {10, 10}, b, cands, 3, fast);
  kernels::reference::patch_ncc(a, {10, 10}, b, cands, 3, ref);
  for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  kernels::patch_ncc(a, {10, 10}, a, cands, 3, self);
  CHECK(self[10 * 20 + 10] == doctest::Approx(1.0));
  for (double s : self) CHECK(s <= 1.0 + 1e-12);

  ImageBuffer flat(20, 20, 3);
  kernels::patch_ncc(a, {10, 10}, flat, cands, 3, fast);
  for (double s : fast) CHECK(s == 0.0);
}

TEST_CASE("kernels reject mismatched shapes") {
  std::vector<float> q(8), small(4);
  CHECK_THROWS(kernels::attention(q, small, q, q, {4, 1, 2}));
  std::vector<std::uint8_t> m(3);
  CHECK_THROWS(kernels::search_mask({0, 0}, {1, 1}, {2, 2}, m));
}
