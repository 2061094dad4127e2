#include <algorithm>
#include <cstdint>
#include <limits>

#include "emr/kernels.hpp"

namespace emr::kernels::serial {

void gray8_to_rgb(const Raster& src, Raster& dst) {
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      const std::uint8_t v = src.row8(y)[x];
      dst.set_pixel(x, y, {v, v, v});
    }
  }
}

void gray16_window_to_rgb(const Raster& src, std::uint16_t lo, std::uint16_t hi, Raster& dst) {
  const float range = static_cast<float>(hi) - static_cast<float>(lo);
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      std::uint8_t v = 0;
      if (range > 0.0f) {
        const float s = static_cast<float>(src.row16(y)[x]) - static_cast<float>(lo);
        v = quantize(s * 255.0f / range);
      }
      dst.set_pixel(x, y, {v, v, v});
    }
  }
}

std::pair<std::uint16_t, std::uint16_t> minmax(const Raster& img) {
  std::uint16_t lo = std::numeric_limits<std::uint16_t>::max();
  std::uint16_t hi = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const std::uint16_t v =
          img.format() == PixelFormat::Gray16 ? img.row16(y)[x] : img.row8(y)[x];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return {lo, hi};
}

static float unit_value(const LayerView& l, int x, int y) {
  const float s = l.samples->format() == PixelFormat::Gray16
                      ? static_cast<float>(l.samples->row16(y)[x])
                      : static_cast<float>(l.samples->row8(y)[x]);
  return std::clamp((s - l.offset) * l.scale, 0.0f, 1.0f);
}

void composite(Raster& base, std::span<const LayerView> layers, float opacity) {
  for (int y = 0; y < base.height(); ++y) {
    for (int x = 0; x < base.width(); ++x) {
      const Rgb px = base.pixel(x, y);
      float r = px.r;
      float g = px.g;
      float b = px.b;
      for (const LayerView& l : layers) {
        if (!l.visible) continue;
        const float a = opacity * unit_value(l, x, y);
        r = a * l.color.r + (1.0f - a) * r;
        g = a * l.color.g + (1.0f - a) * g;
        b = a * l.color.b + (1.0f - a) * b;
      }
      base.set_pixel(x, y, {quantize(r), quantize(g), quantize(b)});
    }
  }
}

void blend_rect(Raster& img, const Rect& rect, Rgb c, float opacity) {
  const Rect r = intersect(rect, {0, 0, img.width(), img.height()});
  for (int y = r.y; y < r.y + r.h; ++y) {
    for (int x = r.x; x < r.x + r.w; ++x) {
      const Rgb px = img.pixel(x, y);
      img.set_pixel(x, y,
                    {quantize(opacity * c.r + (1.0f - opacity) * px.r),
                     quantize(opacity * c.g + (1.0f - opacity) * px.g),
                     quantize(opacity * c.b + (1.0f - opacity) * px.b)});
    }
  }
}

void downscale_box(const Raster& src, Raster& dst) {
  const int ch = src.channels();
  for (int y = 0; y < dst.height(); ++y) {
    const int y0 = static_cast<int>(static_cast<long long>(y) * src.height() / dst.height());
    const int y1 = std::max(y0 + 1, static_cast<int>(static_cast<long long>(y + 1) * src.height() / dst.height()));
    for (int x = 0; x < dst.width(); ++x) {
      const int x0 = static_cast<int>(static_cast<long long>(x) * src.width() / dst.width());
      const int x1 = std::max(x0 + 1, static_cast<int>(static_cast<long long>(x + 1) * src.width() / dst.width()));
      for (int c = 0; c < ch; ++c) {
        std::uint64_t sum = 0;
        for (int sy = y0; sy < y1; ++sy)
          for (int sx = x0; sx < x1; ++sx) sum += src.row8(sy)[sx * ch + c];
        const std::uint64_t n = static_cast<std::uint64_t>(y1 - y0) * static_cast<std::uint64_t>(x1 - x0);
        dst.row8(y)[x * ch + c] = static_cast<std::uint8_t>((sum + n / 2) / n);
      }
    }
  }
}

}  // namespace emr::kernels::serial
