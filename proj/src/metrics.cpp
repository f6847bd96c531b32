// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/metrics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "regiondrag/error.hpp"
#include "regiondrag/kernels.hpp"

namespace regiondrag {

double normalized_distance(Point a, Point b, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::kValidation, "image dims must be positive");
  const double dx = static_cast<double>(b.x - a.x) / width;
  const double dy = static_cast<double>(b.y - a.y) / height;
  return std::sqrt(dx * dx + dy * dy);
}

SearchMask build_search_mask(Point handle, Point target, Extent image) {
  if (!image.contains(handle) || !image.contains(target)) {
    throw Error(ErrorCode::kOutOfBounds, "search mask points must lie inside the image");
  }
  SearchMask m{Mask(image), handle, target, handle == target};
  kernels::search_mask(handle, target, image, m.mask.bits);
  return m;
}

Match PatchCorrelationMatcher::match(const ImageBuffer& original, Point handle, const ImageBuffer& edited,
                                     Point target, const std::vector<Point>& candidates) const {
  if (candidates.empty()) return {handle, 0.0};
  std::vector<double> scores(candidates.size());
  kernels::patch_ncc(original, handle, edited, candidates, radius_, scores);
  std::size_t best = 0;
  auto dist2 = [&](Point p) {
    const long long dx = p.x - target.x, dy = p.y - target.y;
    return dx * dx + dy * dy;
  };
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (scores[i] > scores[best] || (scores[i] == scores[best] && dist2(candidates[i]) < dist2(candidates[best]))) {
      best = i;
    }
  }
  return {candidates[best], scores[best]};
}

MeanDistanceReport mean_distance(const ImageBuffer& original, const ImageBuffer& edited,
                                 const std::vector<PointPair>& pairs, const FeatureMatcher& matcher,
                                 SearchScope scope) {
  if (original.extent() != edited.extent() || original.channels() != edited.channels()) {
    throw Error(ErrorCode::kShapeMismatch, "mean distance needs images of identical shape");
  }
  if (pairs.empty()) throw Error(ErrorCode::kValidation, "mean distance needs at least one point pair");
  const Extent e = original.extent();
  MeanDistanceReport report;
  report.matcher = matcher.name();
  double total = 0.0;
  for (const auto& pair : pairs) {
    PairDistance pd{pair.handle, pair.target, pair.handle, 0.0, 0.0, pair.handle == pair.target};
    if (!e.contains(pair.handle) || !e.contains(pair.target)) {
      throw Error(ErrorCode::kOutOfBounds, "point pair outside the image");
    }
    if (!pd.degenerate) {
      std::vector<Point> candidates;
      if (scope == SearchScope::kSearchMask) {
        const SearchMask sm = build_search_mask(pair.handle, pair.target, e);
        for (int y = 0; y < e.height; ++y)
          for (int x = 0; x < e.width; ++x)
            if (sm.mask.test({x, y})) candidates.push_back({x, y});
      } else {
        candidates.reserve(static_cast<std::size_t>(e.width) * e.height);
        for (int y = 0; y < e.height; ++y)
          for (int x = 0; x < e.width; ++x) candidates.push_back({x, y});
      }
      const Match m = matcher.match(original, pair.handle, edited, pair.target, candidates);
      pd.matched = m.position;
      pd.score = m.score;
      pd.distance = normalized_distance(pair.target, m.position, e.width, e.height);
    }
    total += pd.distance;
    report.per_pair.push_back(pd);
  }
  report.md = total / static_cast<double>(pairs.size());
  report.md_x100 = 100.0 * report.md;
  return report;
}

double pixel_similarity_proxy(const ImageBuffer& a, const ImageBuffer& b) {
  if (a.extent() != b.extent() || a.channels() != b.channels()) {
    throw Error(ErrorCode::kShapeMismatch, "proxy needs images of identical shape");
  }
  double acc = 0.0;
  const auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) acc += std::abs(static_cast<double>(da[i]) - db[i]);
  return 100.0 * acc / static_cast<double>(da.size());
}

}  // namespace regiondrag
