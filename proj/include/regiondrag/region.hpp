// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <variant>
#include <vector>

#include "regiondrag/types.hpp"

namespace regiondrag {

struct PolygonShape {
  std::vector<PointF> vertices;
  friend bool operator==(const PolygonShape&, const PolygonShape&) = default;
};

struct BrushShape {
  Mask mask;
  friend bool operator==(const BrushShape&, const BrushShape&) = default;
};

using RegionShape = std::variant<PolygonShape, BrushShape>;

/// A resolved set of pixels plus the shape it came from. Pixels are
/// deduplicated and sorted row-major (y, then x).
class Region {
 public:
  Region(RegionShape shape, Extent bounds, std::vector<Point> pixels);

  const RegionShape& shape() const { return shape_; }
  Extent bounds() const { return bounds_; }
  const std::vector<Point>& pixels() const { return pixels_; }
  std::size_t size() const { return pixels_.size(); }
  bool is_polygon() const { return std::holds_alternative<PolygonShape>(shape_); }
  const std::vector<PointF>* polygon_vertices() const;

  Mask to_mask() const;

  friend bool operator==(const Region&, const Region&) = default;

 private:
  RegionShape shape_;
  Extent bounds_;
  std::vector<Point> pixels_;
};

struct RegionPair {
  Region handle;
  Region target;
  int index = 0;
};

/// Even-odd interior with boundary pixels included. Throws kValidation for
/// fewer than three vertices, kOutOfBounds for vertices or masks outside the
/// image, and kEmptyRegion when nothing is covered.
Region rasterize_region(const RegionShape& shape, Extent image);

/// Floor-divides every pixel coordinate by `factor` and deduplicates.
Region downscale_region(const Region& region, int factor);

/// Union of the regions as a mask over `extent`.
Mask union_mask(const std::vector<const Region*>& regions, Extent extent);

// Run-length encoding of a binary mask in row-major order. Runs alternate
// starting with a (possibly zero-length) run of zeros.
std::vector<int> encode_mask_rle(const Mask& mask);
Mask decode_mask_rle(const std::vector<int>& runs, Extent extent);

}  // namespace regiondrag
