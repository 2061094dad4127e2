#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace emr {

enum class PixelFormat : std::uint8_t { Gray8, Gray16, Rgb8 };

int channel_count(PixelFormat f) noexcept;
bool is_single_channel(PixelFormat f) noexcept;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

/// Row-major pixel grid without row padding. 8-bit formats live in a byte
/// buffer, Gray16 in a native-endian uint16 buffer; only one is populated.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, PixelFormat format);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  PixelFormat format() const noexcept { return format_; }
  int channels() const noexcept { return channel_count(format_); }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }

  /// Number of samples (pixels x channels).
  std::size_t sample_count() const noexcept;

  std::span<std::uint8_t> data8();
  std::span<const std::uint8_t> data8() const;
  std::span<std::uint16_t> data16();
  std::span<const std::uint16_t> data16() const;

  std::uint8_t* row8(int y);
  const std::uint8_t* row8(int y) const;
  std::uint16_t* row16(int y);
  const std::uint16_t* row16(int y) const;

  /// Rgb8 only.
  Rgb pixel(int x, int y) const;
  void set_pixel(int x, int y, Rgb c);

  bool operator==(const Raster& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  PixelFormat format_ = PixelFormat::Gray8;
  std::vector<std::uint8_t> bytes_;
  std::vector<std::uint16_t> words_;
};

/// FNV-1a over dimensions, format and samples. Used for checksum equality.
std::uint64_t checksum(const Raster& r);

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool empty() const noexcept { return w <= 0 || h <= 0; }
  bool contains(int px, int py) const noexcept {
    return px >= x && py >= y && px < x + w && py < y + h;
  }
  bool inside(int width, int height) const noexcept {
    return x >= 0 && y >= 0 && x + w <= width && y + h <= height;
  }
  bool operator==(const Rect&) const = default;
};

Rect intersect(const Rect& a, const Rect& b) noexcept;

}  // namespace emr
