// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include "regiondrag/types.hpp"

namespace regiondrag {

/// Image <-> latent mapping (the VAE slot).
class LatentCodec {
 public:
  virtual ~LatentCodec() = default;
  virtual std::string name() const = 0;
  virtual int scale_factor() const = 0;
  virtual int latent_channels(int image_channels) const = 0;
  virtual LatentGrid encode(const ImageBuffer& image) const = 0;
  /// Values are clamped into [0, 1].
  virtual ImageBuffer decode(const LatentGrid& latent) const = 0;
};

/// Scale 1 passthrough; decode(encode(x)) == x exactly.
class IdentityCodec final : public LatentCodec {
 public:
  std::string name() const override { return "identity"; }
  int scale_factor() const override { return 1; }
  int latent_channels(int image_channels) const override { return image_channels; }
  LatentGrid encode(const ImageBuffer& image) const override;
  ImageBuffer decode(const LatentGrid& latent) const override;
};

/// Block-average codec with an SD-shaped latent: factor x factor pooling of
/// each image channel plus one luma channel; decode upsamples by repetition.
/// Lossy; exact only for images that are constant on every block.
class BlockCodec final : public LatentCodec {
 public:
  explicit BlockCodec(int factor = 8);
  std::string name() const override { return "block"; }
  int scale_factor() const override { return factor_; }
  int latent_channels(int image_channels) const override { return image_channels + 1; }
  LatentGrid encode(const ImageBuffer& image) const override;
  ImageBuffer decode(const LatentGrid& latent) const override;

 private:
  int factor_;
};

/// "identity" or "block" (factor 8).
std::unique_ptr<LatentCodec> make_codec(const std::string& name);

}  // namespace regiondrag
