#pragma once

// Per-pixel kernels. Every kernel exists twice: `serial` is the reference
// implementation kept for testing, `omp` is the row-parallel version used by
// the pipeline. Both must produce bit-identical output.

#include <cstdint>
#include <span>
#include <utility>

#include "emr/raster.hpp"

namespace emr::kernels {

/// One tinted intensity layer as seen by the compositor. Samples are read
/// from the source raster and mapped to t = clamp((s - offset) * scale, 0, 1).
struct LayerView {
  const Raster* samples = nullptr;  // Gray8 or Gray16
  Rgb color;
  float offset = 0.0f;
  float scale = 1.0f;
  bool visible = true;
};

namespace serial {
void gray8_to_rgb(const Raster& src, Raster& dst);
void gray16_window_to_rgb(const Raster& src, std::uint16_t lo, std::uint16_t hi, Raster& dst);
std::pair<std::uint16_t, std::uint16_t> minmax(const Raster& single_channel);
void composite(Raster& base, std::span<const LayerView> layers, float opacity);
void blend_rect(Raster& img, const Rect& r, Rgb color, float opacity);
void downscale_box(const Raster& src, Raster& dst);
}  // namespace serial

namespace omp {
void gray8_to_rgb(const Raster& src, Raster& dst);
void gray16_window_to_rgb(const Raster& src, std::uint16_t lo, std::uint16_t hi, Raster& dst);
std::pair<std::uint16_t, std::uint16_t> minmax(const Raster& single_channel);
void composite(Raster& base, std::span<const LayerView> layers, float opacity);
void blend_rect(Raster& img, const Rect& r, Rgb color, float opacity);
void downscale_box(const Raster& src, Raster& dst);
}  // namespace omp

/// Half-up quantization of a blended channel value to 8 bits.
inline std::uint8_t quantize(float v) noexcept {
  if (v <= 0.0f) return 0;
  if (v >= 255.0f) return 255;
  return static_cast<std::uint8_t>(v + 0.5f);
}

inline float max_representable(PixelFormat f) noexcept {
  return f == PixelFormat::Gray16 ? 65535.0f : 255.0f;
}

}  // namespace emr::kernels
