// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "regiondrag/region.hpp"
#include "regiondrag/types.hpp"

namespace regiondrag {

/// Dense handle -> target correspondence. `source[i]` is the region-pair
/// index that produced `pairs[i]`.
struct MappedPointSet {
  std::vector<PointPair> pairs;
  std::vector<int> source;
  CoordSpace space = CoordSpace::kImage;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  void push(PointPair p, int pair_index) {
    pairs.push_back(p);
    source.push_back(pair_index);
  }
};

/// Counts of the snapping rules applied by the dense mapper.
struct MappingDiagnostics {
  std::size_t column_snaps = 0;
  std::size_t row_snaps = 0;
};

/// Column-by-column region-to-point mapping for arbitrary pixel sets. One
/// pair per target pixel, in target pixel order.
MappedPointSet map_region_pair_dense(const Region& handle, const Region& target,
                                     int pair_index = 0,
                                     MappingDiagnostics* diagnostics = nullptr);

/// Projective (4 vertices) or affine (3 vertices) transform from the target
/// polygon to the handle polygon, vertex k to vertex k.
struct PolygonTransform {
  // Row-major 3x3 homography; the last row is (0, 0, 1) for affine.
  double m[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};

  PointF apply(PointF p) const;
};

/// Throws kValidation on mismatched or unsupported vertex counts and
/// kDegenerateGeometry when the system is singular.
PolygonTransform solve_polygon_transform(const std::vector<PointF>& target_vertices,
                                         const std::vector<PointF>& handle_vertices);

MappedPointSet map_region_pair_polygon(const std::vector<PointF>& handle_vertices,
                                       const std::vector<PointF>& target_vertices,
                                       const Region& target, int pair_index = 0);

struct MappingConflict {
  Point target;
  Point dropped_handle;
  int dropped_pair = 0;
  int kept_pair = 0;
};

struct MergedMapping {
  MappedPointSet mapping;
  std::vector<MappingConflict> conflicts;
};

/// Concatenates in order; a later pair writing an already-written target
/// pixel replaces the earlier one.
MergedMapping merge_mappings(const std::vector<MappedPointSet>& per_pair);

/// Maps one region pair: the polygon path when both regions are polygons
/// with matching 3 or 4 vertices, the dense path otherwise.
MappedPointSet map_region_pair(const RegionPair& pair, MappingDiagnostics* diagnostics = nullptr);

/// Maps every pair at image resolution, then merges.
MergedMapping map_region_pairs(const std::vector<RegionPair>& pairs,
                               MappingDiagnostics* diagnostics = nullptr);

/// Maps every pair at latent resolution (regions floor-downscaled by
/// `factor`), then merges. Polygon pairs use the image-space transform
/// evaluated at latent block centres.
MergedMapping map_region_pairs_to_latent(const std::vector<RegionPair>& pairs, int factor,
                                         MappingDiagnostics* diagnostics = nullptr);

}  // namespace regiondrag
