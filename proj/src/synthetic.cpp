// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/synthetic.hpp"

#include <cmath>

#include <fmt/format.h>

#include "regiondrag/error.hpp"
#include "regiondrag/image_io.hpp"
#include "regiondrag/rng.hpp"

namespace regiondrag {
namespace {

Region rect_brush(int x0, int y0, int w, int h, Extent image) {
  Mask mask(image);
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) mask.set({x, y});
  return rasterize_region(BrushShape{std::move(mask)}, image);
}

}  // namespace

BenchSample make_translation_sample(std::uint64_t seed, const TranslationFixtureOptions& o) {
  const int margin = 4;
  const int span_x = o.size - 2 * margin - o.square - std::abs(o.shift_x);
  const int span_y = o.size - 2 * margin - o.square - std::abs(o.shift_y);
  if (span_x < 0 || span_y < 0) throw Error(ErrorCode::kValidation, "fixture square and shift do not fit the image");
  const CounterRng rng(seed);
  const int x0 = margin + (o.shift_x < 0 ? -o.shift_x : 0) +
                 static_cast<int>(rng.uniform(NoisePurpose::kFixture, 0, 0) * (span_x + 1));
  const int y0 = margin + (o.shift_y < 0 ? -o.shift_y : 0) +
                 static_cast<int>(rng.uniform(NoisePurpose::kFixture, 0, 1) * (span_y + 1));

  const Extent extent{o.size, o.size};
  ImageBuffer image(o.size, o.size, 3);
  const double phase = 6.283185307179586 * rng.uniform(NoisePurpose::kFixture, 0, 2);
  for (int y = 0; y < o.size; ++y) {
    for (int x = 0; x < o.size; ++x) {
      const double bg = 0.08 + 0.03 * std::sin(0.7 * x + phase) * std::cos(0.5 * y - phase);
      for (int c = 0; c < 3; ++c) image.at(x, y, c) = static_cast<float>(bg);
    }
  }
  for (int y = y0; y < y0 + o.square; ++y) {
    for (int x = x0; x < x0 + o.square; ++x) {
      const auto idx = static_cast<std::uint64_t>((y - y0) * o.square + (x - x0));
      for (int c = 0; c < 3; ++c) {
        const double u = rng.uniform(NoisePurpose::kFixture, 1 + static_cast<std::uint64_t>(c), idx);
        image.at(x, y, c) = static_cast<float>(0.6 + 0.4 * u);
      }
    }
  }

  BenchSample s;
  s.id = fmt::format("translate-{:04d}", seed);
  s.image_path = s.id + ".png";
  s.prompt = "a bright square on a dark background";
  s.extent = extent;
  const int dx = o.identity ? 0 : o.shift_x, dy = o.identity ? 0 : o.shift_y;
  s.regions.push_back({rect_brush(x0, y0, o.square, o.square, extent),
                       rect_brush(x0 + dx, y0 + dy, o.square, o.square, extent), 0});
  const Point centre{x0 + o.square / 2, y0 + o.square / 2};
  s.points.push_back({centre, {centre.x + dx, centre.y + dy}, CoordSpace::kImage});
  s.image = std::make_shared<const ImageBuffer>(std::move(image));
  return s;
}

std::vector<BenchSample> write_translation_dataset(const std::filesystem::path& root, int count, std::uint64_t seed,
                                                   const TranslationFixtureOptions& options) {
  std::filesystem::create_directories(root);
  std::vector<BenchSample> samples;
  for (int i = 0; i < count; ++i) {
    BenchSample s = make_translation_sample(seed + static_cast<std::uint64_t>(i), options);
    write_png(*s.image, root / s.image_path);
    samples.push_back(std::move(s));
  }
  save_manifest(root, samples);
  return samples;
}

}  // namespace regiondrag
