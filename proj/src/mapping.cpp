// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "regiondrag/error.hpp"

namespace regiondrag {
namespace {

// floor(num / den) for num >= 0, den > 0; zero-width ranges normalise to 0.
int scale_floor(int offset, int src_range, int dst_range) {
  if (src_range == 0) return 0;
  return static_cast<int>((static_cast<long long>(offset) * dst_range) / src_range);
}

struct Columns {
  int x0 = 0;
  std::vector<std::vector<int>> ys;  // sorted rows per column x0 + i

  const std::vector<int>& at(int x) const { return ys[static_cast<std::size_t>(x - x0)]; }
};

Columns build_columns(const Region& r) {
  int x0 = std::numeric_limits<int>::max(), x1 = std::numeric_limits<int>::min();
  for (Point p : r.pixels()) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
  }
  Columns cols;
  cols.x0 = x0;
  cols.ys.resize(static_cast<std::size_t>(x1 - x0 + 1));
  // Pixels are row-major sorted, so each column fills in increasing y.
  for (Point p : r.pixels()) cols.ys[static_cast<std::size_t>(p.x - x0)].push_back(p.y);
  return cols;
}

// For each column index, the nearest non-empty column (ties toward smaller x).
std::vector<int> nearest_nonempty(const Columns& cols) {
  const int n = static_cast<int>(cols.ys.size());
  std::vector<int> left(n, -1), right(n, -1), out(n);
  for (int i = 0, last = -1; i < n; ++i) {
    if (!cols.ys[i].empty()) last = i;
    left[i] = last;
  }
  for (int i = n - 1, last = -1; i >= 0; --i) {
    if (!cols.ys[i].empty()) last = i;
    right[i] = last;
  }
  for (int i = 0; i < n; ++i) {
    if (left[i] < 0) out[i] = right[i];
    else if (right[i] < 0) out[i] = left[i];
    else out[i] = (i - left[i] <= right[i] - i) ? left[i] : right[i];
  }
  return out;
}

// Nearest member of a sorted list (ties toward the smaller value).
int snap_sorted(const std::vector<int>& sorted, int y) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), y);
  if (it == sorted.end()) return sorted.back();
  if (*it == y || it == sorted.begin()) return *it;
  const int above = *std::prev(it);
  return (y - above <= *it - y) ? above : *it;
}

double cross(PointF o, PointF a, PointF b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool has_collinear_triple(const std::vector<PointF>& v) {
  double scale = 1.0;
  for (const auto& p : v) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double tol = 1e-9 * scale * scale;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      for (std::size_t k = j + 1; k < v.size(); ++k)
        if (std::abs(cross(v[i], v[j], v[k])) <= tol) return true;
  return false;
}

Point round_clamped(PointF p, Extent bounds) {
  const auto clamp = [](double v, int hi) {
    return static_cast<int>(std::clamp<long long>(std::llround(v), 0, hi));
  };
  return {clamp(p.x, bounds.width - 1), clamp(p.y, bounds.height - 1)};
}

}  // namespace

MappedPointSet map_region_pair_dense(const Region& handle, const Region& target, int pair_index,
                                     MappingDiagnostics* diagnostics) {
  if (handle.size() == 0 || target.size() == 0) {
    throw Error(ErrorCode::kEmptyRegion, "dense mapping needs non-empty handle and target regions");
  }
  const Columns hcols = build_columns(handle);
  const Columns tcols = build_columns(target);
  const int hx0 = hcols.x0, hx1 = hcols.x0 + static_cast<int>(hcols.ys.size()) - 1;
  const int tx0 = tcols.x0, tx1 = tcols.x0 + static_cast<int>(tcols.ys.size()) - 1;
  const std::vector<int> hsnap = nearest_nonempty(hcols);

  MappedPointSet out;
  out.pairs.reserve(target.size());
  out.source.reserve(target.size());
  MappingDiagnostics diag;
  for (Point p : target.pixels()) {
    int hx = hx0 + scale_floor(p.x - tx0, tx1 - tx0, hx1 - hx0);
    const int snapped = hx0 + hsnap[static_cast<std::size_t>(hx - hx0)];
    if (snapped != hx) {
      ++diag.column_snaps;
      hx = snapped;
    }
    const auto& tcol = tcols.at(p.x);
    const auto& hcol = hcols.at(hx);
    const int ty0 = tcol.front(), ty1 = tcol.back();
    const int hy0 = hcol.front(), hy1 = hcol.back();
    int hy = hy0 + scale_floor(p.y - ty0, ty1 - ty0, hy1 - hy0);
    const int snapped_y = snap_sorted(hcol, hy);
    if (snapped_y != hy) {
      ++diag.row_snaps;
      hy = snapped_y;
    }
    out.push({{hx, hy}, p, CoordSpace::kImage}, pair_index);
  }
  if (diagnostics) {
    diagnostics->column_snaps += diag.column_snaps;
    diagnostics->row_snaps += diag.row_snaps;
  }
  return out;
}

PointF PolygonTransform::apply(PointF p) const {
  const double w = m[6] * p.x + m[7] * p.y + m[8];
  return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

PolygonTransform solve_polygon_transform(const std::vector<PointF>& target_vertices,
                                         const std::vector<PointF>& handle_vertices) {
  const std::size_t n = target_vertices.size();
  if (n != handle_vertices.size()) {
    throw Error(ErrorCode::kValidation,
                fmt::format("vertex count mismatch: target {} vs handle {}", n, handle_vertices.size()));
  }
  if (n != 3 && n != 4) {
    throw Error(ErrorCode::kValidation,
                fmt::format("polygon mapping needs 3 or 4 vertices, got {}", n));
  }
  if (has_collinear_triple(target_vertices) || has_collinear_triple(handle_vertices)) {
    throw Error(ErrorCode::kDegenerateGeometry, "polygon vertices contain a collinear triple");
  }

  PolygonTransform tf;
  if (n == 3) {
    Eigen::Matrix3d a;
    Eigen::Matrix<double, 3, 2> b;
    for (int i = 0; i < 3; ++i) {
      a.row(i) << target_vertices[i].x, target_vertices[i].y, 1.0;
      b.row(i) << handle_vertices[i].x, handle_vertices[i].y;
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
    if (!lu.isInvertible()) throw Error(ErrorCode::kDegenerateGeometry, "singular affine system");
    const Eigen::Matrix<double, 3, 2> coef = lu.solve(b);
    tf.m[0] = coef(0, 0), tf.m[1] = coef(1, 0), tf.m[2] = coef(2, 0);
    tf.m[3] = coef(0, 1), tf.m[4] = coef(1, 1), tf.m[5] = coef(2, 1);
    tf.m[6] = 0, tf.m[7] = 0, tf.m[8] = 1;
    return tf;
  }

  // Eight unknowns with the bottom-right entry fixed to 1.
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = target_vertices[i].x, y = target_vertices[i].y;
    const double u = handle_vertices[i].x, v = handle_vertices[i].y;
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) throw Error(ErrorCode::kDegenerateGeometry, "singular perspective system");
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
  for (int i = 0; i < 8; ++i) tf.m[i] = h(i);
  tf.m[8] = 1.0;
  return tf;
}

MappedPointSet map_region_pair_polygon(const std::vector<PointF>& handle_vertices,
                                       const std::vector<PointF>& target_vertices,
                                       const Region& target, int pair_index) {
  const PolygonTransform tf = solve_polygon_transform(target_vertices, handle_vertices);
  MappedPointSet out;
  out.pairs.reserve(target.size());
  out.source.reserve(target.size());
  for (Point p : target.pixels()) {
    const Point h = round_clamped(tf.apply({static_cast<double>(p.x), static_cast<double>(p.y)}),
                                  target.bounds());
    out.push({h, p, CoordSpace::kImage}, pair_index);
  }
  return out;
}

MergedMapping merge_mappings(const std::vector<MappedPointSet>& per_pair) {
  MergedMapping merged;
  if (per_pair.empty()) return merged;
  merged.mapping.space = per_pair.front().space;

  struct PointHash {
    std::size_t operator()(Point p) const noexcept {
      return std::hash<long long>{}((static_cast<long long>(p.x) << 32) ^ static_cast<unsigned>(p.y));
    }
  };
  // Final writer of every target pixel: (mapping, entry).
  std::unordered_map<Point, std::pair<std::size_t, std::size_t>, PointHash> last;
  for (std::size_t m = 0; m < per_pair.size(); ++m) {
    if (per_pair[m].space != merged.mapping.space) {
      throw Error(ErrorCode::kValidation, "cannot merge mappings from different coordinate spaces");
    }
    for (std::size_t i = 0; i < per_pair[m].pairs.size(); ++i) {
      last[per_pair[m].pairs[i].target] = {m, i};
    }
  }
  for (std::size_t m = 0; m < per_pair.size(); ++m) {
    const auto& mp = per_pair[m];
    for (std::size_t i = 0; i < mp.pairs.size(); ++i) {
      const auto [km, ki] = last.at(mp.pairs[i].target);
      if (km == m && ki == i) {
        merged.mapping.push(mp.pairs[i], mp.source[i]);
      } else {
        merged.conflicts.push_back({mp.pairs[i].target, mp.pairs[i].handle, mp.source[i],
                                    per_pair[km].source[ki]});
      }
    }
  }
  return merged;
}

MappedPointSet map_region_pair(const RegionPair& pair, MappingDiagnostics* diagnostics) {
  const auto* hv = pair.handle.polygon_vertices();
  const auto* tv = pair.target.polygon_vertices();
  if (hv && tv && hv->size() == tv->size() && (hv->size() == 3 || hv->size() == 4)) {
    return map_region_pair_polygon(*hv, *tv, pair.target, pair.index);
  }
  return map_region_pair_dense(pair.handle, pair.target, pair.index, diagnostics);
}

MergedMapping map_region_pairs(const std::vector<RegionPair>& pairs, MappingDiagnostics* diagnostics) {
  std::vector<MappedPointSet> per_pair;
  per_pair.reserve(pairs.size());
  for (const auto& p : pairs) per_pair.push_back(map_region_pair(p, diagnostics));
  return merge_mappings(per_pair);
}

MergedMapping map_region_pairs_to_latent(const std::vector<RegionPair>& pairs, int factor,
                                         MappingDiagnostics* diagnostics) {
  if (factor < 1) throw Error(ErrorCode::kValidation, "latent factor must be >= 1");
  std::vector<MappedPointSet> per_pair;
  per_pair.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const Region target = downscale_region(pair.target, factor);
    const auto* hv = pair.handle.polygon_vertices();
    const auto* tv = pair.target.polygon_vertices();
    MappedPointSet mp;
    if (hv && tv && hv->size() == tv->size() && (hv->size() == 3 || hv->size() == 4)) {
      const PolygonTransform tf = solve_polygon_transform(*tv, *hv);
      const double half = 0.5 * (factor - 1);
      for (Point p : target.pixels()) {
        const PointF centre{p.x * factor + half, p.y * factor + half};
        const Point img = round_clamped(tf.apply(centre), pair.target.bounds());
        const Point lat{std::min(img.x / factor, target.bounds().width - 1),
                        std::min(img.y / factor, target.bounds().height - 1)};
        mp.push({lat, p, CoordSpace::kLatent}, pair.index);
      }
    } else {
      mp = map_region_pair_dense(downscale_region(pair.handle, factor), target, pair.index, diagnostics);
    }
    for (auto& pp : mp.pairs) pp.space = CoordSpace::kLatent;
    mp.space = CoordSpace::kLatent;
    per_pair.push_back(std::move(mp));
  }
  return merge_mappings(per_pair);
}

}  // namespace regiondrag
