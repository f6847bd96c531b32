// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

// Independent reimplementations used as test oracles. Written from the
// formulas directly, without calling into the library under test.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "regiondrag/region.hpp"
#include "regiondrag/types.hpp"

namespace oracle {

using regiondrag::Extent;
using regiondrag::ImageBuffer;
using regiondrag::Point;
using regiondrag::PointPair;

struct Rect {
  int x0, y0, w, h;
};

/// Separable floor scaling between two axis-aligned rectangles: target
/// column offset u in [0, tw) maps to handle column floor(u * (hw-1) / (tw-1)),
/// rows likewise. Returned in target row-major order.
inline std::vector<PointPair> rect_scaling(Rect handle, Rect target) {
  auto axis = [](int tn, int hn) {
    std::vector<int> table(static_cast<std::size_t>(tn));
    for (int u = 0; u < tn; ++u) {
      if (tn == 1) {
        table[u] = 0;
        continue;
      }
      // Long-double ratio with a nudge so exact integers do not round down.
      const long double r = static_cast<long double>(u) / (tn - 1) * (hn - 1);
      table[u] = static_cast<int>(std::floor(r + 1e-9L));
    }
    return table;
  };
  const auto cols = axis(target.w, handle.w);
  const auto rows = axis(target.h, handle.h);
  std::vector<PointPair> out;
  for (int v = 0; v < target.h; ++v) {
    for (int u = 0; u < target.w; ++u) {
      out.push_back({{handle.x0 + cols[u], handle.y0 + rows[v]}, {target.x0 + u, target.y0 + v}});
    }
  }
  return out;
}

inline regiondrag::Region rect_region(Rect r, Extent image) {
  regiondrag::Mask m(image);
  for (int y = r.y0; y < r.y0 + r.h; ++y)
    for (int x = r.x0; x < r.x0 + r.w; ++x) m.set({x, y});
  return regiondrag::rasterize_region(regiondrag::BrushShape{std::move(m)}, image);
}

/// 4-connected random blob grown from a seed pixel.
inline regiondrag::Region random_blob(std::mt19937_64& gen, Extent image, int max_pixels) {
  std::uniform_int_distribution<int> px(0, image.width - 1), py(0, image.height - 1);
  std::uniform_int_distribution<int> size(1, max_pixels);
  const int target = size(gen);
  std::set<std::pair<int, int>> cells;
  std::vector<Point> frontier{{px(gen), py(gen)}};
  cells.insert({frontier[0].x, frontier[0].y});
  while (static_cast<int>(cells.size()) < target) {
    std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
    const Point p = frontier[pick(gen)];
    static constexpr int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
    const int d = std::uniform_int_distribution<int>(0, 3)(gen);
    const Point q{p.x + dx[d], p.y + dy[d]};
    if (!image.contains(q)) continue;
    if (cells.insert({q.x, q.y}).second) frontier.push_back(q);
  }
  regiondrag::Mask m(image);
  for (auto [x, y] : cells) m.set({x, y});
  return regiondrag::rasterize_region(regiondrag::BrushShape{std::move(m)}, image);
}

/// Brute-force point-in-polygon (even-odd) with boundary inclusion, over
/// every lattice point of the image.
inline std::vector<Point> lattice_points_in_polygon(const std::vector<regiondrag::PointF>& v, Extent image) {
  auto on_segment = [](double px, double py, regiondrag::PointF a, regiondrag::PointF b) {
    const double cross = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
    if (std::abs(cross) > 1e-9) return false;
    return px >= std::min(a.x, b.x) - 1e-9 && px <= std::max(a.x, b.x) + 1e-9 && py >= std::min(a.y, b.y) - 1e-9 &&
           py <= std::max(a.y, b.y) + 1e-9;
  };
  std::vector<Point> out;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      bool inside = false, boundary = false;
      for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if (on_segment(x, y, v[j], v[i])) boundary = true;
        if ((v[i].y > y) != (v[j].y > y)) {
          const double xi = v[j].x + (y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
          if (x < xi) inside = !inside;
        }
      }
      if (inside || boundary) out.push_back({x, y});
    }
  }
  return out;
}

/// Eq.-1 step evaluated elementwise in long double.
inline long double eq1(long double zs, long double eps, long double w, long double ab_s, long double ab_t,
                       long double sigma) {
  const long double x0 = (zs - std::sqrt(1.0L - ab_s) * eps) / std::sqrt(ab_s);
  return std::sqrt(ab_t) * x0 + std::sqrt(1.0L - ab_t - sigma * sigma) * eps + sigma * w;
}

/// Scaled-linear alpha_bar recomputed from the betas.
inline std::vector<long double> scaled_linear_alpha_bar(int T, long double b0 = 0.00085L, long double b1 = 0.012L) {
  std::vector<long double> ab(static_cast<std::size_t>(T) + 1);
  ab[0] = 1.0L;
  const long double s0 = std::sqrt(b0), s1 = std::sqrt(b1);
  long double prod = 1.0L;
  for (int i = 0; i < T; ++i) {
    const long double s = T == 1 ? s0 : s0 + (s1 - s0) * i / (T - 1);
    prod *= 1.0L - s * s;
    ab[static_cast<std::size_t>(i) + 1] = prod;
  }
  return ab;
}

/// Search-mask membership written out per pixel: compares squared
/// normalised distances as exact fractions over the common denominator W^2 H^2.
inline bool in_search_mask(Point p, Point h, Point t, Extent e) {
  auto sq = [&](Point a, Point b) {
    const __int128 dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx * e.height * e.height + dy * dy * e.width * e.width;
  };
  const __int128 dh = sq(p, h), dt = sq(p, t), d = sq(h, t);
  return 2 * std::min(dh, dt) < d;
}

/// Luminance-weighted centroid of pixels whose mean channel value exceeds 0.5.
struct Centroid {
  double x = 0, y = 0;
  std::size_t count = 0;
};
inline Centroid bright_centroid(const ImageBuffer& img) {
  Centroid c;
  double wsum = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double l = 0;
      for (int ch = 0; ch < img.channels(); ++ch) l += img.at(x, y, ch);
      l /= img.channels();
      if (l <= 0.5) continue;
      c.x += l * x;
      c.y += l * y;
      wsum += l;
      ++c.count;
    }
  }
  if (wsum > 0) {
    c.x /= wsum;
    c.y /= wsum;
  }
  return c;
}

/// Brute-force best NCC position of the (2r+1)^2 patch of `a` at `centre`
/// over the candidate positions of `b`; ties to the lowest index.
inline Point best_ncc(const ImageBuffer& a, Point centre, const ImageBuffer& b, const std::vector<Point>& cands,
                      int r) {
  double best = -2;
  Point arg{-1, -1};
  for (Point c : cands) {
    std::vector<double> va, vb;
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) {
        const Point pa{centre.x + dx, centre.y + dy}, pb{c.x + dx, c.y + dy};
        if (!a.extent().contains(pa) || !b.extent().contains(pb)) continue;
        for (int ch = 0; ch < a.channels(); ++ch) {
          va.push_back(a.at(pa.x, pa.y, ch));
          vb.push_back(b.at(pb.x, pb.y, ch));
        }
      }
    if (va.empty()) continue;
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < va.size(); ++i) {
      ma += va[i];
      mb += vb[i];
    }
    ma /= va.size();
    mb /= vb.size();
    double cov = 0, sa = 0, sb = 0;
    for (std::size_t i = 0; i < va.size(); ++i) {
      cov += (va[i] - ma) * (vb[i] - mb);
      sa += (va[i] - ma) * (va[i] - ma);
      sb += (vb[i] - mb) * (vb[i] - mb);
    }
    const double s = (sa <= 1e-12 || sb <= 1e-12) ? 0.0 : cov / std::sqrt(sa * sb);
    if (s > best + 1e-12) {
      best = s;
      arg = c;
    }
  }
  return arg;
}

/// Textured RGB image with values in [0.05, 0.95].
inline ImageBuffer textured_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<float> u(0.05f, 0.95f);
  ImageBuffer img(w, h, 3);
  for (auto& v : img.data()) v = u(gen);
  return img;
}

}  // namespace oracle
