// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/region.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "regiondrag/error.hpp"

namespace regiondrag {
namespace {

void sort_unique(std::vector<Point>& pixels) {
  std::sort(pixels.begin(), pixels.end(), [](Point a, Point b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
}

double signed_area(const std::vector<PointF>& v) {
  double acc = 0.0;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    acc += v[j].x * v[i].y - v[i].x * v[j].y;
  }
  return 0.5 * acc;
}

bool on_segment(PointF a, PointF b, double px, double py) {
  constexpr double kEps = 1e-9;
  const double cross = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  if (std::abs(cross) > kEps * std::max(1.0, len)) return false;
  return px >= std::min(a.x, b.x) - kEps && px <= std::max(a.x, b.x) + kEps &&
         py >= std::min(a.y, b.y) - kEps && py <= std::max(a.y, b.y) + kEps;
}

bool inside_even_odd(const std::vector<PointF>& v, double px, double py) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if (on_segment(v[j], v[i], px, py)) return true;
    if ((v[i].y > py) != (v[j].y > py)) {
      const double xc = (v[j].x - v[i].x) * (py - v[i].y) / (v[j].y - v[i].y) + v[i].x;
      if (px < xc) inside = !inside;
    }
  }
  return inside;
}

std::vector<Point> rasterize_polygon(const std::vector<PointF>& v, Extent image) {
  if (v.size() < 3) {
    throw Error(ErrorCode::kValidation,
                fmt::format("polygon needs at least 3 vertices, got {}", v.size()));
  }
  for (const auto& p : v) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0 || p.y < 0 ||
        p.x > image.width - 1 || p.y > image.height - 1) {
      throw Error(ErrorCode::kOutOfBounds,
                  fmt::format("polygon vertex ({}, {}) outside {}x{} image", p.x, p.y, image.width,
                              image.height));
    }
  }
  if (std::abs(signed_area(v)) < 1e-12) {
    throw Error(ErrorCode::kEmptyRegion, "degenerate polygon has zero area");
  }
  double x0 = v[0].x, x1 = v[0].x, y0 = v[0].y, y1 = v[0].y;
  for (const auto& p : v) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  std::vector<Point> pixels;
  for (int y = static_cast<int>(std::ceil(y0)); y <= static_cast<int>(std::floor(y1)); ++y) {
    for (int x = static_cast<int>(std::ceil(x0)); x <= static_cast<int>(std::floor(x1)); ++x) {
      if (inside_even_odd(v, x, y)) pixels.push_back({x, y});
    }
  }
  return pixels;
}

std::vector<Point> rasterize_brush(const Mask& mask, Extent image) {
  if (mask.extent != image) {
    throw Error(ErrorCode::kOutOfBounds,
                fmt::format("brush mask {}x{} does not match image {}x{}", mask.extent.width,
                            mask.extent.height, image.width, image.height));
  }
  if (mask.bits.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw Error(ErrorCode::kValidation, "brush mask data length does not match its extent");
  }
  std::vector<Point> pixels;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      if (mask.test({x, y})) pixels.push_back({x, y});
    }
  }
  return pixels;
}

}  // namespace

Region::Region(RegionShape shape, Extent bounds, std::vector<Point> pixels)
    : shape_(std::move(shape)), bounds_(bounds), pixels_(std::move(pixels)) {
  sort_unique(pixels_);
  if (pixels_.empty()) throw Error(ErrorCode::kEmptyRegion, "region covers no pixels");
  for (Point p : pixels_) {
    if (!bounds_.contains(p)) {
      throw Error(ErrorCode::kOutOfBounds,
                  fmt::format("region pixel ({}, {}) outside {}x{}", p.x, p.y, bounds_.width, bounds_.height));
    }
  }
}

const std::vector<PointF>* Region::polygon_vertices() const {
  if (const auto* poly = std::get_if<PolygonShape>(&shape_)) return &poly->vertices;
  return nullptr;
}

Mask Region::to_mask() const {
  Mask mask(bounds_);
  for (Point p : pixels_) mask.set(p);
  return mask;
}

Region rasterize_region(const RegionShape& shape, Extent image) {
  if (image.width <= 0 || image.height <= 0) {
    throw Error(ErrorCode::kValidation, "image extent must be positive");
  }
  std::vector<Point> pixels = std::visit(
      [&](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, PolygonShape>) {
          return rasterize_polygon(s.vertices, image);
        } else {
          return rasterize_brush(s.mask, image);
        }
      },
      shape);
  if (pixels.empty()) throw Error(ErrorCode::kEmptyRegion, "region covers no pixels");
  return Region(shape, image, std::move(pixels));
}

Region downscale_region(const Region& region, int factor) {
  if (factor < 1) throw Error(ErrorCode::kValidation, "downscale factor must be >= 1");
  if (factor == 1) return region;
  const Extent small{(region.bounds().width + factor - 1) / factor,
                     (region.bounds().height + factor - 1) / factor};
  std::vector<Point> pixels;
  pixels.reserve(region.size());
  for (Point p : region.pixels()) pixels.push_back({p.x / factor, p.y / factor});
  sort_unique(pixels);
  Mask mask(small);
  for (Point p : pixels) mask.set(p);
  return Region(BrushShape{std::move(mask)}, small, std::move(pixels));
}

Mask union_mask(const std::vector<const Region*>& regions, Extent extent) {
  Mask mask(extent);
  for (const Region* r : regions) {
    for (Point p : r->pixels()) {
      if (!extent.contains(p)) throw Error(ErrorCode::kOutOfBounds, "region outside mask extent");
      mask.set(p);
    }
  }
  return mask;
}

std::vector<int> encode_mask_rle(const Mask& mask) {
  std::vector<int> runs;
  std::uint8_t current = 0;
  int run = 0;
  for (auto b : mask.bits) {
    const std::uint8_t bit = b ? 1 : 0;
    if (bit != current) {
      runs.push_back(run);
      current = bit;
      run = 0;
    }
    ++run;
  }
  runs.push_back(run);
  return runs;
}

Mask decode_mask_rle(const std::vector<int>& runs, Extent extent) {
  if (extent.width <= 0 || extent.height <= 0) throw Error(ErrorCode::kValidation, "mask extent must be positive");
  Mask mask(extent);
  std::size_t pos = 0;
  std::uint8_t bit = 0;
  for (int run : runs) {
    if (run < 0 || pos + static_cast<std::size_t>(run) > mask.bits.size()) {
      throw Error(ErrorCode::kValidation, "mask RLE runs exceed the mask extent");
    }
    std::fill_n(mask.bits.begin() + static_cast<std::ptrdiff_t>(pos), run, bit);
    pos += static_cast<std::size_t>(run);
    bit ^= 1;
  }
  if (pos != mask.bits.size()) throw Error(ErrorCode::kValidation, "mask RLE runs do not cover the mask");
  return mask;
}

}  // namespace regiondrag
