// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "regiondrag/types.hpp"

namespace regiondrag {

/// sqrt(((x2-x1)/W)^2 + ((y2-y1)/H)^2).
double normalized_distance(Point a, Point b, int width, int height);

struct SearchMask {
  Mask mask;
  Point handle;
  Point target;
  /// h == t: the threshold is 0 and the mask is empty.
  bool degenerate = false;
};

SearchMask build_search_mask(Point handle, Point target, Extent image);

struct Match {
  Point position;
  double score = 0.0;
};

/// Locates, in `edited`, the content found at `handle` in `original`,
/// considering only the candidate positions.
class FeatureMatcher {
 public:
  virtual ~FeatureMatcher() = default;
  virtual std::string name() const = 0;
  /// Candidates are given in row-major order; ties break toward the
  /// candidate closest to `target`, then the earliest candidate.
  virtual Match match(const ImageBuffer& original, Point handle, const ImageBuffer& edited, Point target,
                      const std::vector<Point>& candidates) const = 0;
};

/// Normalised cross-correlation of a (2r+1)^2 patch, 7x7 by default.
class PatchCorrelationMatcher final : public FeatureMatcher {
 public:
  explicit PatchCorrelationMatcher(int radius = 3) : radius_(radius) {}
  std::string name() const override { return "patch-ncc"; }
  Match match(const ImageBuffer& original, Point handle, const ImageBuffer& edited, Point target,
              const std::vector<Point>& candidates) const override;

 private:
  int radius_;
};

enum class SearchScope { kSearchMask, kWholeImage };

struct PairDistance {
  Point handle;
  Point target;
  Point matched;
  double distance = 0.0;
  double score = 0.0;
  bool degenerate = false;
};

struct MeanDistanceReport {
  std::vector<PairDistance> per_pair;
  double md = 0.0;
  double md_x100 = 0.0;
  std::string matcher;
};

/// Mean over pairs of d(t_i, h'_i), where h'_i is the best match for the
/// original content at h_i inside the pair's search mask. Degenerate pairs
/// (h == t) contribute 0 and are flagged.
MeanDistanceReport mean_distance(const ImageBuffer& original, const ImageBuffer& edited,
                                 const std::vector<PointPair>& pairs, const FeatureMatcher& matcher,
                                 SearchScope scope = SearchScope::kSearchMask);

/// Mean absolute pixel difference x100. A cheap identity-preservation proxy;
/// not comparable to LPIPS.
double pixel_similarity_proxy(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace regiondrag
