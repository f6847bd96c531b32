// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

#include "regiondrag/types.hpp"

// Hot loops. The top-level functions are the OpenMP-parallel production
// kernels; `reference::` holds straightforward serial versions that the
// tests and the benchmark compare against.
namespace regiondrag::kernels {

struct AttentionShape {
  int tokens = 0;
  int heads = 1;
  int head_dim = 1;

  int width() const { return heads * head_dim; }
};

/// Softmax(q k^T / sqrt(head_dim)) v per head. q, k, v, out are token-major
/// [tokens x heads*head_dim]; head h owns columns [h*head_dim, (h+1)*head_dim).
void attention(std::span<const float> q, std::span<const float> k, std::span<const float> v,
               std::span<float> out, AttentionShape shape);

/// Zero-padded 3x3 convolution. in: [cin x h x w], weights: [cout x cin x 3 x 3],
/// out: [cout x h x w].
void conv3x3(std::span<const float> in, int cin, int h, int w, std::span<const float> weights,
             std::span<const float> bias, int cout, std::span<float> out);

/// out = a*x + b*y + c*n; `n` may be empty, in which case c is ignored.
void affine_combine(std::span<const double> x, double a, std::span<const double> y, double b,
                    std::span<const double> n, double c, std::span<double> out);

/// Search-mask predicate min(d(p,h), d(p,t)) < d(h,t)/sqrt(2) with the
/// extent-normalised Euclidean distance, written row-major into `out`.
void search_mask(Point h, Point t, Extent extent, std::span<std::uint8_t> out);

/// Normalised cross-correlation of the (2r+1)^2 patch of `original` around
/// `centre` against the same-size patch of `edited` around every candidate.
/// Pixels outside either image are skipped pairwise. Zero-variance patches
/// score 0.
void patch_ncc(const ImageBuffer& original, Point centre, const ImageBuffer& edited,
               std::span<const Point> candidates, int radius, std::span<double> scores);

namespace reference {

void attention(std::span<const float> q, std::span<const float> k, std::span<const float> v,
               std::span<float> out, AttentionShape shape);
void conv3x3(std::span<const float> in, int cin, int h, int w, std::span<const float> weights,
             std::span<const float> bias, int cout, std::span<float> out);
void affine_combine(std::span<const double> x, double a, std::span<const double> y, double b,
                    std::span<const double> n, double c, std::span<double> out);
void search_mask(Point h, Point t, Extent extent, std::span<std::uint8_t> out);
void patch_ncc(const ImageBuffer& original, Point centre, const ImageBuffer& edited,
               std::span<const Point> candidates, int radius, std::span<double> scores);

}  // namespace reference

}  // namespace regiondrag::kernels
