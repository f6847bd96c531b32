// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace regiondrag {

/// Integer lattice point, x to the right and y down, origin top-left.
struct Point {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Point&, const Point&) = default;
};

/// Real-valued point, used for polygon vertices.
struct PointF {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PointF&, const PointF&) = default;
};

struct Extent {
  int width = 0;
  int height = 0;

  bool contains(Point p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
  friend bool operator==(const Extent&, const Extent&) = default;
};

enum class CoordSpace { kImage, kLatent };

struct PointPair {
  Point handle;
  Point target;
  CoordSpace space = CoordSpace::kImage;

  friend bool operator==(const PointPair&, const PointPair&) = default;
};

/// Row-major interleaved image with values in [0, 1].
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels);
  ImageBuffer(int width, int height, int channels, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  Extent extent() const { return {width_, height_}; }
  bool empty() const { return data_.empty(); }

  float& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  float at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Planar C x H x W latent at a diffusion timestep.
class LatentGrid {
 public:
  static constexpr int kMaxTimestep = 100000;

  LatentGrid() = default;
  LatentGrid(int channels, int height, int width, int timestep = 0);
  LatentGrid(int channels, int height, int width, int timestep, std::vector<double> data);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int timestep() const { return timestep_; }
  void set_timestep(int t);
  std::size_t plane_size() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const LatentGrid& other) const {
    return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
  }

  double& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  double at(int c, int y, int x) const { return data_[index(c, y, x)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Throws ErrorCode::kValidation if any element is NaN or infinite.
  void check_finite(const char* what) const;

  friend bool operator==(const LatentGrid&, const LatentGrid&) = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  int timestep_ = 0;
  std::vector<double> data_;
};

/// Binary H x W grid, row-major.
struct Mask {
  Extent extent;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  explicit Mask(Extent e) : extent(e), bits(static_cast<std::size_t>(e.width) * e.height, 0) {}

  bool test(Point p) const { return bits[static_cast<std::size_t>(p.y) * extent.width + p.x] != 0; }
  void set(Point p) { bits[static_cast<std::size_t>(p.y) * extent.width + p.x] = 1; }
  std::size_t count() const;

  friend bool operator==(const Mask&, const Mask&) = default;
};

enum class CopyPasteMode { kMultiStep, kInitialOnly };

const char* to_string(CopyPasteMode mode);
CopyPasteMode copy_paste_mode_from_string(const std::string& s);

/// Runtime knobs of one edit. Defaults reproduce the reference setup:
/// 20 sampler steps, invert to 500 of 1000, paste down to 200, alpha 1.
struct EditConfig {
  int total_trained_steps = 1000;
  int sampler_steps = 20;
  int invert_to = 500;
  int cp_stop = 200;
  double blend_alpha = 1.0;
  double eta = 1.0;
  bool kv_swap = true;
  CopyPasteMode cp_mode = CopyPasteMode::kMultiStep;
  std::uint64_t seed = 0;

  /// Throws ErrorCode::kValidation on any violated field constraint.
  void validate() const;
};

}  // namespace regiondrag
