// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/codec.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "regiondrag/error.hpp"

namespace regiondrag {
namespace {

float to_pixel(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

}  // namespace

LatentGrid IdentityCodec::encode(const ImageBuffer& image) const {
  LatentGrid z(image.channels(), image.height(), image.width(), 0);
  for (int c = 0; c < image.channels(); ++c)
    for (int y = 0; y < image.height(); ++y)
      for (int x = 0; x < image.width(); ++x) z.at(c, y, x) = image.at(x, y, c);
  return z;
}

ImageBuffer IdentityCodec::decode(const LatentGrid& latent) const {
  ImageBuffer img(latent.width(), latent.height(), latent.channels());
  for (int c = 0; c < latent.channels(); ++c)
    for (int y = 0; y < latent.height(); ++y)
      for (int x = 0; x < latent.width(); ++x) img.at(x, y, c) = to_pixel(latent.at(c, y, x));
  return img;
}

BlockCodec::BlockCodec(int factor) : factor_(factor) {
  if (factor < 1) throw Error(ErrorCode::kValidation, "codec factor must be >= 1");
}

LatentGrid BlockCodec::encode(const ImageBuffer& image) const {
  const int f = factor_;
  if (image.width() % f || image.height() % f) {
    throw Error(ErrorCode::kValidation,
                fmt::format("image {}x{} is not a multiple of the codec factor {}", image.width(), image.height(), f));
  }
  const int ch = image.channels(), lh = image.height() / f, lw = image.width() / f;
  LatentGrid z(ch + 1, lh, lw, 0);
  const double inv = 1.0 / (static_cast<double>(f) * f);
  for (int y = 0; y < lh; ++y) {
    for (int x = 0; x < lw; ++x) {
      double luma = 0.0;
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int dy = 0; dy < f; ++dy)
          for (int dx = 0; dx < f; ++dx) acc += image.at(x * f + dx, y * f + dy, c);
        z.at(c, y, x) = acc * inv;
        luma += acc * inv;
      }
      z.at(ch, y, x) = luma / ch;
    }
  }
  return z;
}

ImageBuffer BlockCodec::decode(const LatentGrid& latent) const {
  const int f = factor_, ch = latent.channels() - 1;
  if (ch < 1) throw Error(ErrorCode::kShapeMismatch, "block codec latent needs at least 2 channels");
  ImageBuffer img(latent.width() * f, latent.height() * f, ch);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < ch; ++c) img.at(x, y, c) = to_pixel(latent.at(c, y / f, x / f));
  return img;
}

std::unique_ptr<LatentCodec> make_codec(const std::string& name) {
  if (name == "identity") return std::make_unique<IdentityCodec>();
  if (name == "block") return std::make_unique<BlockCodec>(8);
  throw Error(ErrorCode::kValidation, fmt::format("unknown codec '{}'", name));
}

}  // namespace regiondrag
