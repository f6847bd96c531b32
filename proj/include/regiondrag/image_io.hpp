// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "regiondrag/types.hpp"

namespace regiondrag {

/// 8-bit RGB PNG. Values are quantised with round(v * 255).
std::vector<std::uint8_t> encode_png(const ImageBuffer& image);
ImageBuffer decode_png(const std::vector<std::uint8_t>& bytes);

ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const ImageBuffer& image, const std::filesystem::path& path);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace regiondrag

namespace regiondrag {

/// Width and height from the PNG header, without decoding pixels.
Extent read_png_extent(const std::filesystem::path& path);

}  // namespace regiondrag
