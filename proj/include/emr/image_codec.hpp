#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "emr/raster.hpp"

namespace emr {

enum class ImageFormat { Png, Jpeg, Tiff, Bmp, WebP };

std::string_view extension_for(ImageFormat f);
std::optional<ImageFormat> format_from_extension(std::string_view ext);
/// Parses "png", "jpg", "jpeg", "webp", "tif", "tiff", "bmp" (case-insensitive).
std::optional<ImageFormat> parse_image_format(std::string_view name);
/// Magic-byte sniffing.
std::optional<ImageFormat> sniff_format(std::span<const std::uint8_t> bytes);

struct EncodeOptions {
  int quality = 90;           // JPEG and lossy WebP
  bool webp_lossless = false;
};

/// Decodes an in-memory image. Gray PNG/TIFF keep their bit depth (8 or 16),
/// everything else decodes to Gray8 or Rgb8; alpha is dropped.
Raster decode_image(std::span<const std::uint8_t> bytes, std::optional<ImageFormat> hint = std::nullopt);

/// Encodes at the raster's exact dimensions. JPEG and WebP need 8-bit input.
std::vector<std::uint8_t> encode_image(const Raster& img, ImageFormat format, const EncodeOptions& opts = {});

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace emr
