// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "regiondrag/error.hpp"
#include "regiondrag/metrics.hpp"

using namespace regiondrag;

namespace {

// Cyclic shift: out(x, y) = in(x - dx, y - dy).
ImageBuffer shifted(const ImageBuffer& in, int dx, int dy) {
  ImageBuffer out(in.width(), in.height(), in.channels());
  const int w = in.width(), h = in.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < in.channels(); ++c)
        out.at(x, y, c) = in.at(((x - dx) % w + w) % w, ((y - dy) % h + h) % h, c);
  return out;
}

ImageBuffer filled(int w, int h, float v) {
  ImageBuffer img(w, h, 3);
  std::fill(img.data().begin(), img.data().end(), v);
  return img;
}

}  // namespace

TEST_CASE("normalized distance examples") {
  CHECK(normalized_distance({5, 7}, {5, 7}, 10, 10) == 0.0);
  CHECK(normalized_distance({0, 0}, {64, 32}, 64, 32) == doctest::Approx(std::sqrt(2.0)));
  CHECK(normalized_distance({0, 0}, {256, 0}, 512, 512) == 0.5);
  CHECK(normalized_distance({3, 1}, {0, 5}, 6, 8) == doctest::Approx(std::hypot(0.5, 0.5)));
  CHECK_THROWS_AS(normalized_distance({0, 0}, {1, 1}, 0, 5), Error);
}

TEST_CASE("search mask examples") {
  const SearchMask same = build_search_mask({4, 4}, {4, 4}, {16, 16});
  CHECK(same.degenerate);
  CHECK(same.mask.count() == 0);

  const SearchMask m = build_search_mask({0, 0}, {256, 0}, {512, 512});
  CHECK_FALSE(m.degenerate);
  CHECK(m.mask.test({128, 0}));
  CHECK_FALSE(m.mask.test({0, 256}));
  CHECK(m.mask.test({0, 0}));
  CHECK(m.mask.test({256, 0}));
  CHECK_THROWS_AS(build_search_mask({0, 0}, {512, 0}, {512, 512}), Error);
}

TEST_CASE("search mask: symmetric, contains endpoints, matches brute force") {
  std::mt19937_64 gen(5);
  const Extent e{48, 40};
  std::uniform_int_distribution<int> ux(0, e.width - 1), uy(0, e.height - 1);
  for (int i = 0; i < 40; ++i) {
    const Point h{ux(gen), uy(gen)}, t{ux(gen), uy(gen)};
    const SearchMask a = build_search_mask(h, t, e), b = build_search_mask(t, h, e);
    CHECK(a.mask == b.mask);
    if (h != t) {
      CHECK(a.mask.test(h));
      CHECK(a.mask.test(t));
    }
    for (int y = 0; y < e.height; ++y)
      for (int x = 0; x < e.width; ++x) CHECK(a.mask.test({x, y}) == oracle::in_search_mask({x, y}, h, t, e));
  }
}

TEST_CASE("MD is zero for unchanged images with t = h") {
  const ImageBuffer img = oracle::textured_image(32, 32, 1);
  const PatchCorrelationMatcher matcher;
  const auto r = mean_distance(img, img, {{{3, 3}, {3, 3}}, {{20, 10}, {20, 10}}}, matcher);
  CHECK(r.md == 0.0);
  CHECK(r.per_pair[0].degenerate);
  CHECK(r.matcher == "patch-ncc");
}

TEST_CASE("MD of an exact translation is within one pixel") {
  const ImageBuffer img = oracle::textured_image(64, 64, 2);
  const PatchCorrelationMatcher matcher;
  std::mt19937_64 gen(6);
  std::uniform_int_distribution<int> up(12, 51), ud(-8, 8);
  for (int i = 0; i < 20; ++i) {
    const Point h{up(gen), up(gen)};
    const int dx = ud(gen), dy = ud(gen);
    const Point t{h.x + dx, h.y + dy};
    const ImageBuffer edited = shifted(img, dx, dy);
    const auto r = mean_distance(img, edited, {{h, t}}, matcher);
    CHECK(r.md <= normalized_distance({0, 0}, {1, 0}, 64, 64));
    if (h != t) {
      const SearchMask m = build_search_mask(h, t, img.extent());
      std::vector<Point> cands;
      for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
          if (m.mask.test({x, y})) cands.push_back({x, y});
      CHECK(r.per_pair[0].matched == oracle::best_ncc(img, h, edited, cands, 3));
    }
  }
}

TEST_CASE("MD is permutation invariant") {
  const ImageBuffer img = oracle::textured_image(48, 48, 3);
  const ImageBuffer edited = shifted(img, 3, -2);
  std::vector<PointPair> pairs{{{10, 10}, {13, 8}}, {{30, 20}, {33, 18}}, {{20, 35}, {25, 35}}, {{5, 40}, {5, 40}}};
  const PatchCorrelationMatcher matcher;
  const double md = mean_distance(img, edited, pairs, matcher).md;
  std::mt19937_64 gen(1);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(pairs.begin(), pairs.end(), gen);
    CHECK(mean_distance(img, edited, pairs, matcher).md == doctest::Approx(md).epsilon(1e-12));
  }
}

TEST_CASE("search mask never increases MD on exact translations") {
  const PatchCorrelationMatcher matcher;
  for (std::uint64_t s = 0; s < 8; ++s) {
    const ImageBuffer img = oracle::textured_image(40, 40, 100 + s);
    const int dx = static_cast<int>(s % 5) + 1, dy = static_cast<int>(s % 3) - 1;
    const ImageBuffer edited = shifted(img, dx, dy);
    const std::vector<PointPair> pairs{{{15, 15}, {15 + dx, 15 + dy}}, {{22, 12}, {22 + dx, 12 + dy}}};
    const double masked = mean_distance(img, edited, pairs, matcher, SearchScope::kSearchMask).md;
    const double whole = mean_distance(img, edited, pairs, matcher, SearchScope::kWholeImage).md;
    CHECK(masked <= whole + 1e-12);
  }
}

TEST_CASE("MD errors") {
  const ImageBuffer img = oracle::textured_image(16, 16, 1);
  const PatchCorrelationMatcher matcher;
  CHECK_THROWS_AS(mean_distance(img, img, {}, matcher), Error);
  CHECK_THROWS_AS(mean_distance(img, oracle::textured_image(16, 17, 1), {{{1, 1}, {2, 2}}}, matcher), Error);
  CHECK_THROWS_AS(mean_distance(img, img, {{{1, 1}, {16, 2}}}, matcher), Error);
}

TEST_CASE("pixel similarity proxy") {
  const ImageBuffer z = filled(8, 8, 0.0f);
  CHECK(pixel_similarity_proxy(z, z) == 0.0);
  CHECK(pixel_similarity_proxy(z, filled(8, 8, 1.0f)) == doctest::Approx(100.0));
  CHECK(pixel_similarity_proxy(z, filled(8, 8, 0.5f)) == doctest::Approx(50.0));
  CHECK_THROWS_AS(pixel_similarity_proxy(z, filled(8, 9, 0.0f)), Error);
}
