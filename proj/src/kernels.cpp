// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <vector>

#include "regiondrag/error.hpp"

namespace regiondrag::kernels {
namespace {

constexpr float kLog2e = 1.4426950408889634f;

// 2^x for x <= 0 via round-to-nearest range reduction and a degree-6
// polynomial; relative error below 2e-7. Branch-free so the loops that call
// it vectorise.
inline float exp2_nonpositive(float x) {
  x = std::max(x, -125.0f);
  const float n = std::floor(x + 0.5f);
  const float f = x - n;
  float p = 1.5403530393381606e-4f;
  p = p * f + 1.3333558146428443e-3f;
  p = p * f + 9.6181291076284772e-3f;
  p = p * f + 5.5504108664821580e-2f;
  p = p * f + 2.4022650695910071e-1f;
  p = p * f + 6.9314718055994531e-1f;
  p = p * f + 1.0f;
  const auto bits = static_cast<std::int32_t>(n + 127.0f) << 23;
  return p * std::bit_cast<float>(bits);
}

void check_attention_shapes(std::span<const float> q, std::span<const float> k, std::span<const float> v,
                            std::span<float> out, AttentionShape s) {
  const auto n = static_cast<std::size_t>(s.tokens) * s.width();
  if (s.tokens <= 0 || s.heads <= 0 || s.head_dim <= 0 || q.size() != n || k.size() != n ||
      v.size() != n || out.size() != n) {
    throw Error(ErrorCode::kShapeMismatch, "attention operands do not match the declared shape");
  }
}

void check_conv_shapes(std::span<const float> in, int cin, int h, int w, std::span<const float> weights,
                       std::span<const float> bias, int cout, std::span<float> out) {
  const auto plane = static_cast<std::size_t>(h) * w;
  if (in.size() != plane * cin || out.size() != plane * cout ||
      weights.size() != static_cast<std::size_t>(cout) * cin * 9 || bias.size() != static_cast<std::size_t>(cout)) {
    throw Error(ErrorCode::kShapeMismatch, "conv3x3 operands do not match the declared shape");
  }
}

std::int64_t scaled_sq_dist(Point a, Point b, Extent e) {
  const std::int64_t dx = a.x - b.x, dy = a.y - b.y;
  const std::int64_t hh = static_cast<std::int64_t>(e.height) * e.height;
  const std::int64_t ww = static_cast<std::int64_t>(e.width) * e.width;
  return dx * dx * hh + dy * dy * ww;
}

struct PatchStats {
  double sum_a = 0, sum_b = 0, sum_aa = 0, sum_bb = 0, sum_ab = 0;
  int n = 0;
};

double ncc_at(const ImageBuffer& a, Point ca, const ImageBuffer& b, Point cb, int r) {
  PatchStats s;
  const int ch = a.channels();
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const int ax = ca.x + dx, ay = ca.y + dy, bx = cb.x + dx, by = cb.y + dy;
      if (ax < 0 || ay < 0 || ax >= a.width() || ay >= a.height()) continue;
      if (bx < 0 || by < 0 || bx >= b.width() || by >= b.height()) continue;
      for (int c = 0; c < ch; ++c) {
        const double va = a.at(ax, ay, c), vb = b.at(bx, by, c);
        s.sum_a += va;
        s.sum_b += vb;
        s.sum_aa += va * va;
        s.sum_bb += vb * vb;
        s.sum_ab += va * vb;
        ++s.n;
      }
    }
  }
  if (s.n == 0) return 0.0;
  const double n = s.n;
  const double cov = s.sum_ab - s.sum_a * s.sum_b / n;
  const double va = s.sum_aa - s.sum_a * s.sum_a / n;
  const double vb = s.sum_bb - s.sum_b * s.sum_b / n;
  constexpr double kTiny = 1e-12;
  if (va <= kTiny || vb <= kTiny) return 0.0;
  return cov / std::sqrt(va * vb);
}

void check_ncc(const ImageBuffer& original, const ImageBuffer& edited, std::span<const Point> candidates,
               std::span<double> scores) {
  if (original.channels() != edited.channels()) {
    throw Error(ErrorCode::kShapeMismatch, "patch_ncc images must have the same channel count");
  }
  if (candidates.size() != scores.size()) {
    throw Error(ErrorCode::kShapeMismatch, "patch_ncc needs one score slot per candidate");
  }
}

// One query row against one head. Two passes over the keys: scores and
// their maximum, then exp2 with the weighted value sums fused in.
template <int D>
void attend_row(const float* qs, const float* kt, const float* vt, std::size_t n, float* sc, float* oi) {
  float mx = -std::numeric_limits<float>::infinity();
#pragma omp simd reduction(max : mx)
  for (std::size_t j = 0; j < n; ++j) {
    float acc = 0.0f;
    for (int d = 0; d < D; ++d) acc += qs[d] * kt[d * n + j];
    sc[j] = acc;
    mx = std::max(mx, acc);
  }
  float total = 0.0f;
  float a0 = 0.0f, a1 = 0.0f, a2 = 0.0f, a3 = 0.0f;
  static_assert(D <= 4);
#pragma omp simd reduction(+ : total, a0, a1, a2, a3)
  for (std::size_t j = 0; j < n; ++j) {
    const float e = exp2_nonpositive(sc[j] - mx);
    total += e;
    a0 += e * vt[j];
    if constexpr (D > 1) a1 += e * vt[n + j];
    if constexpr (D > 2) a2 += e * vt[2 * n + j];
    if constexpr (D > 3) a3 += e * vt[3 * n + j];
  }
  const float inv = 1.0f / total;
  const float acc[4] = {a0, a1, a2, a3};
  for (int d = 0; d < D; ++d) oi[d] = acc[d] * inv;
}

void attend_row_generic(const float* qs, int dh, const float* kt, const float* vt, std::size_t n, float* sc,
                        float* oi) {
#pragma omp simd
  for (std::size_t j = 0; j < n; ++j) sc[j] = qs[0] * kt[j];
  for (int d = 1; d < dh; ++d) {
#pragma omp simd
    for (std::size_t j = 0; j < n; ++j) sc[j] += qs[d] * kt[d * n + j];
  }
  float mx = -std::numeric_limits<float>::infinity();
#pragma omp simd reduction(max : mx)
  for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, sc[j]);
  float total = 0.0f;
#pragma omp simd reduction(+ : total)
  for (std::size_t j = 0; j < n; ++j) {
    sc[j] = exp2_nonpositive(sc[j] - mx);
    total += sc[j];
  }
  const float inv = 1.0f / total;
  for (int d = 0; d < dh; ++d) {
    float acc = 0.0f;
#pragma omp simd reduction(+ : acc)
    for (std::size_t j = 0; j < n; ++j) acc += sc[j] * vt[d * n + j];
    oi[d] = acc * inv;
  }
}

}  // namespace

void attention(std::span<const float> q, std::span<const float> k, std::span<const float> v,
               std::span<float> out, AttentionShape s) {
  check_attention_shapes(q, k, v, out, s);
  const int n = s.tokens, width = s.width(), dh = s.head_dim;
  const auto un = static_cast<std::size_t>(n);
  // Head- and dimension-major copies of K and V so the token loops are unit stride.
  std::vector<float> kt(un * width), vt(un * width);
  for (int j = 0; j < n; ++j) {
    for (int c = 0; c < width; ++c) {
      kt[static_cast<std::size_t>(c) * un + j] = k[static_cast<std::size_t>(j) * width + c];
      vt[static_cast<std::size_t>(c) * un + j] = v[static_cast<std::size_t>(j) * width + c];
    }
  }
  const float scale = kLog2e / std::sqrt(static_cast<float>(dh));

#pragma omp parallel
  {
    std::vector<float> scores(un);
    std::vector<float> qs(static_cast<std::size_t>(dh));
#pragma omp for schedule(static)
    for (int i = 0; i < n; ++i) {
      for (int h = 0; h < s.heads; ++h) {
        const float* qi = &q[static_cast<std::size_t>(i) * width + h * dh];
        for (int d = 0; d < dh; ++d) qs[d] = qi[d] * scale;
        const float* kh = &kt[static_cast<std::size_t>(h * dh) * un];
        const float* vh = &vt[static_cast<std::size_t>(h * dh) * un];
        float* oi = &out[static_cast<std::size_t>(i) * width + h * dh];
        switch (dh) {
          case 1: attend_row<1>(qs.data(), kh, vh, un, scores.data(), oi); break;
          case 2: attend_row<2>(qs.data(), kh, vh, un, scores.data(), oi); break;
          case 4: attend_row<4>(qs.data(), kh, vh, un, scores.data(), oi); break;
          default: attend_row_generic(qs.data(), dh, kh, vh, un, scores.data(), oi); break;
        }
      }
    }
  }
}

void conv3x3(std::span<const float> in, int cin, int h, int w, std::span<const float> weights,
             std::span<const float> bias, int cout, std::span<float> out) {
  check_conv_shapes(in, cin, h, w, weights, bias, cout, out);
  const auto plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel for collapse(2) schedule(static)
  for (int o = 0; o < cout; ++o) {
    for (int y = 0; y < h; ++y) {
      float* row = &out[o * plane + static_cast<std::size_t>(y) * w];
      std::fill(row, row + w, bias[o]);
      for (int c = 0; c < cin; ++c) {
        const float* wk = &weights[(static_cast<std::size_t>(o) * cin + c) * 9];
        for (int ky = 0; ky < 3; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          const float* src = &in[c * plane + static_cast<std::size_t>(sy) * w];
          const float w0 = wk[ky * 3], w1 = wk[ky * 3 + 1], w2 = wk[ky * 3 + 2];
          // Interior columns without bounds checks, edges separately.
          for (int x = 1; x + 1 < w; ++x) row[x] += w0 * src[x - 1] + w1 * src[x] + w2 * src[x + 1];
          row[0] += w1 * src[0] + (w > 1 ? w2 * src[1] : 0.0f);
          if (w > 1) row[w - 1] += w0 * src[w - 2] + w1 * src[w - 1];
        }
      }
    }
  }
}

void affine_combine(std::span<const double> x, double a, std::span<const double> y, double b,
                    std::span<const double> n, double c, std::span<double> out) {
  if (x.size() != out.size() || y.size() != out.size() || (!n.empty() && n.size() != out.size())) {
    throw Error(ErrorCode::kShapeMismatch, "affine_combine operands differ in length");
  }
  const auto len = static_cast<std::int64_t>(out.size());
  if (n.empty()) {
#pragma omp parallel for simd schedule(static)
    for (std::int64_t i = 0; i < len; ++i) out[i] = a * x[i] + b * y[i];
  } else {
#pragma omp parallel for simd schedule(static)
    for (std::int64_t i = 0; i < len; ++i) out[i] = a * x[i] + b * y[i] + c * n[i];
  }
}

void search_mask(Point h, Point t, Extent e, std::span<std::uint8_t> out) {
  if (out.size() != static_cast<std::size_t>(e.width) * e.height) {
    throw Error(ErrorCode::kShapeMismatch, "search mask buffer does not match the extent");
  }
  const std::int64_t span = scaled_sq_dist(h, t, e);
  const std::int64_t hh = static_cast<std::int64_t>(e.height) * e.height;
  const std::int64_t ww = static_cast<std::int64_t>(e.width) * e.width;
  std::uint8_t* bits = out.data();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < e.height; ++y) {
    const std::int64_t ry_h = std::int64_t{y - h.y} * (y - h.y) * ww;
    const std::int64_t ry_t = std::int64_t{y - t.y} * (y - t.y) * ww;
    std::uint8_t* row = bits + static_cast<std::size_t>(y) * e.width;
#pragma omp simd
    for (int x = 0; x < e.width; ++x) {
      const std::int64_t dh = x - h.x, dt = x - t.x;
      const std::int64_t m = std::min(dh * dh * hh + ry_h, dt * dt * hh + ry_t);
      row[x] = (2 * m < span) ? 1 : 0;
    }
  }
}

void patch_ncc(const ImageBuffer& original, Point centre, const ImageBuffer& edited,
               std::span<const Point> candidates, int radius, std::span<double> scores) {
  check_ncc(original, edited, candidates, scores);
  const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) scores[i] = ncc_at(original, centre, edited, candidates[i], radius);
}

namespace reference {

void attention(std::span<const float> q, std::span<const float> k, std::span<const float> v,
               std::span<float> out, AttentionShape s) {
  check_attention_shapes(q, k, v, out, s);
  const int n = s.tokens, width = s.width(), dh = s.head_dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<double> sc(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int h = 0; h < s.heads; ++h) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        double dot = 0.0;
        for (int d = 0; d < dh; ++d) {
          dot += static_cast<double>(q[static_cast<std::size_t>(i) * width + h * dh + d]) *
                 k[static_cast<std::size_t>(j) * width + h * dh + d];
        }
        sc[j] = dot * scale;
        mx = std::max(mx, sc[j]);
      }
      double total = 0.0;
      for (int j = 0; j < n; ++j) {
        sc[j] = std::exp(sc[j] - mx);
        total += sc[j];
      }
      for (int d = 0; d < dh; ++d) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += sc[j] * v[static_cast<std::size_t>(j) * width + h * dh + d];
        out[static_cast<std::size_t>(i) * width + h * dh + d] = static_cast<float>(acc / total);
      }
    }
  }
}

void conv3x3(std::span<const float> in, int cin, int h, int w, std::span<const float> weights,
             std::span<const float> bias, int cout, std::span<float> out) {
  check_conv_shapes(in, cin, h, w, weights, bias, cout, out);
  const auto plane = static_cast<std::size_t>(h) * w;
  for (int o = 0; o < cout; ++o) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = bias[o];
        for (int c = 0; c < cin; ++c) {
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              const int sy = y + ky - 1, sx = x + kx - 1;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              acc += static_cast<double>(weights[((static_cast<std::size_t>(o) * cin + c) * 3 + ky) * 3 + kx]) *
                     in[c * plane + static_cast<std::size_t>(sy) * w + sx];
            }
          }
        }
        out[o * plane + static_cast<std::size_t>(y) * w + x] = static_cast<float>(acc);
      }
    }
  }
}

void affine_combine(std::span<const double> x, double a, std::span<const double> y, double b,
                    std::span<const double> n, double c, std::span<double> out) {
  if (x.size() != out.size() || y.size() != out.size() || (!n.empty() && n.size() != out.size())) {
    throw Error(ErrorCode::kShapeMismatch, "affine_combine operands differ in length");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = n.empty() ? a * x[i] + b * y[i] : a * x[i] + b * y[i] + c * n[i];
  }
}

void search_mask(Point h, Point t, Extent e, std::span<std::uint8_t> out) {
  if (out.size() != static_cast<std::size_t>(e.width) * e.height) {
    throw Error(ErrorCode::kShapeMismatch, "search mask buffer does not match the extent");
  }
  const std::int64_t span = scaled_sq_dist(h, t, e);
  for (int y = 0; y < e.height; ++y) {
    for (int x = 0; x < e.width; ++x) {
      const Point p{x, y};
      const std::int64_t m = std::min(scaled_sq_dist(p, h, e), scaled_sq_dist(p, t, e));
      out[static_cast<std::size_t>(y) * e.width + x] = (2 * m < span) ? 1 : 0;
    }
  }
}

void patch_ncc(const ImageBuffer& original, Point centre, const ImageBuffer& edited,
               std::span<const Point> candidates, int radius, std::span<double> scores) {
  check_ncc(original, edited, candidates, scores);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores[i] = ncc_at(original, centre, edited, candidates[i], radius);
  }
}

}  // namespace reference
}  // namespace regiondrag::kernels
