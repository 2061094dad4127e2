#include "emr/raster.hpp"

#include <algorithm>
#include <stdexcept>

namespace emr {

int channel_count(PixelFormat f) noexcept { return f == PixelFormat::Rgb8 ? 3 : 1; }

bool is_single_channel(PixelFormat f) noexcept { return f != PixelFormat::Rgb8; }

Raster::Raster(int width, int height, PixelFormat format)
    : width_(width), height_(height), format_(format) {
  if (width < 1 || height < 1) throw std::invalid_argument("raster dimensions must be >= 1");
  if (format == PixelFormat::Gray16)
    words_.assign(sample_count(), 0);
  else
    bytes_.assign(sample_count(), 0);
}

std::size_t Raster::sample_count() const noexcept {
  return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_) *
         static_cast<std::size_t>(channels());
}

std::span<std::uint8_t> Raster::data8() { return bytes_; }
std::span<const std::uint8_t> Raster::data8() const { return bytes_; }
std::span<std::uint16_t> Raster::data16() { return words_; }
std::span<const std::uint16_t> Raster::data16() const { return words_; }

std::uint8_t* Raster::row8(int y) {
  return bytes_.data() + static_cast<std::size_t>(y) * width_ * channels();
}
const std::uint8_t* Raster::row8(int y) const {
  return bytes_.data() + static_cast<std::size_t>(y) * width_ * channels();
}
std::uint16_t* Raster::row16(int y) { return words_.data() + static_cast<std::size_t>(y) * width_; }
const std::uint16_t* Raster::row16(int y) const {
  return words_.data() + static_cast<std::size_t>(y) * width_;
}

Rgb Raster::pixel(int x, int y) const {
  const std::uint8_t* p = row8(y) + 3 * x;
  return {p[0], p[1], p[2]};
}

void Raster::set_pixel(int x, int y, Rgb c) {
  std::uint8_t* p = row8(y) + 3 * x;
  p[0] = c.r;
  p[1] = c.g;
  p[2] = c.b;
}

std::uint64_t checksum(const Raster& r) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<std::uint64_t>(r.width()));
  mix(static_cast<std::uint64_t>(r.height()));
  mix(static_cast<std::uint64_t>(r.format()));
  for (std::uint8_t b : r.data8()) mix(b);
  for (std::uint16_t w : r.data16()) mix(w);
  return h;
}

Rect intersect(const Rect& a, const Rect& b) noexcept {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.x + a.w, b.x + b.w);
  const int y1 = std::min(a.y + a.h, b.y + b.h);
  if (x1 <= x0 || y1 <= y0) return {x0, y0, 0, 0};
  return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace emr
