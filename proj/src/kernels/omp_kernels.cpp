#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include <omp.h>

#include "emr/kernels.hpp"

namespace emr::kernels::omp {

void gray8_to_rgb(const Raster& src, Raster& dst) {
  const int w = src.width();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < src.height(); ++y) {
    const std::uint8_t* in = src.row8(y);
    std::uint8_t* out = dst.row8(y);
    for (int x = 0; x < w; ++x) {
      out[3 * x] = out[3 * x + 1] = out[3 * x + 2] = in[x];
    }
  }
}

void gray16_window_to_rgb(const Raster& src, std::uint16_t lo, std::uint16_t hi, Raster& dst) {
  const int w = src.width();
  const float flo = static_cast<float>(lo);
  const float range = static_cast<float>(hi) - flo;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < src.height(); ++y) {
    const std::uint16_t* in = src.row16(y);
    std::uint8_t* out = dst.row8(y);
    for (int x = 0; x < w; ++x) {
      const std::uint8_t v =
          range > 0.0f ? quantize((static_cast<float>(in[x]) - flo) * 255.0f / range) : 0;
      out[3 * x] = out[3 * x + 1] = out[3 * x + 2] = v;
    }
  }
}

std::pair<std::uint16_t, std::uint16_t> minmax(const Raster& img) {
  unsigned lo = std::numeric_limits<std::uint16_t>::max();
  unsigned hi = 0;
  const bool wide = img.format() == PixelFormat::Gray16;
  const long long n = static_cast<long long>(img.sample_count());
  if (wide) {
    const std::uint16_t* p = img.data16().data();
#pragma omp parallel for reduction(min : lo) reduction(max : hi) schedule(static)
    for (long long i = 0; i < n; ++i) {
      lo = std::min<unsigned>(lo, p[i]);
      hi = std::max<unsigned>(hi, p[i]);
    }
  } else {
    const std::uint8_t* p = img.data8().data();
#pragma omp parallel for reduction(min : lo) reduction(max : hi) schedule(static)
    for (long long i = 0; i < n; ++i) {
      lo = std::min<unsigned>(lo, p[i]);
      hi = std::max<unsigned>(hi, p[i]);
    }
  }
  return {static_cast<std::uint16_t>(lo), static_cast<std::uint16_t>(hi)};
}

namespace {

struct PreparedLayer {
  const std::uint8_t* data8 = nullptr;
  const std::uint16_t* data16 = nullptr;
  float cr = 0, cg = 0, cb = 0;
  float offset = 0;
  float scale = 1;
};

}  // namespace

void composite(Raster& base, std::span<const LayerView> layers, float opacity) {
  std::vector<PreparedLayer> active;
  for (const LayerView& l : layers) {
    if (!l.visible) continue;
    PreparedLayer p;
    if (l.samples->format() == PixelFormat::Gray16)
      p.data16 = l.samples->data16().data();
    else
      p.data8 = l.samples->data8().data();
    p.cr = l.color.r;
    p.cg = l.color.g;
    p.cb = l.color.b;
    p.offset = l.offset;
    p.scale = l.scale;
    active.push_back(p);
  }
  if (active.empty()) return;

  const int w = base.width();
  const std::size_t stride = static_cast<std::size_t>(w);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < base.height(); ++y) {
    std::uint8_t* px = base.row8(y);
    const std::size_t row = static_cast<std::size_t>(y) * stride;
    for (int x = 0; x < w; ++x) {
      float r = px[3 * x];
      float g = px[3 * x + 1];
      float b = px[3 * x + 2];
      for (const PreparedLayer& l : active) {
        const float s = l.data16 ? static_cast<float>(l.data16[row + x])
                                 : static_cast<float>(l.data8[row + x]);
        const float a = opacity * std::clamp((s - l.offset) * l.scale, 0.0f, 1.0f);
        r = a * l.cr + (1.0f - a) * r;
        g = a * l.cg + (1.0f - a) * g;
        b = a * l.cb + (1.0f - a) * b;
      }
      px[3 * x] = quantize(r);
      px[3 * x + 1] = quantize(g);
      px[3 * x + 2] = quantize(b);
    }
  }
}

void blend_rect(Raster& img, const Rect& rect, Rgb c, float opacity) {
  const Rect r = intersect(rect, {0, 0, img.width(), img.height()});
  if (r.empty()) return;
  const float keep = 1.0f - opacity;
  const float cr = opacity * c.r;
  const float cg = opacity * c.g;
  const float cb = opacity * c.b;
#pragma omp parallel for schedule(static)
  for (int y = r.y; y < r.y + r.h; ++y) {
    std::uint8_t* px = img.row8(y) + 3 * r.x;
    for (int x = 0; x < r.w; ++x) {
      px[3 * x] = quantize(cr + keep * px[3 * x]);
      px[3 * x + 1] = quantize(cg + keep * px[3 * x + 1]);
      px[3 * x + 2] = quantize(cb + keep * px[3 * x + 2]);
    }
  }
}

void downscale_box(const Raster& src, Raster& dst) {
  const int ch = src.channels();
  const int dw = dst.width();
  std::vector<int> xs(static_cast<std::size_t>(dw) + 1);
  for (int x = 0; x <= dw; ++x)
    xs[x] = static_cast<int>(static_cast<long long>(x) * src.width() / dw);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < dst.height(); ++y) {
    const int y0 = static_cast<int>(static_cast<long long>(y) * src.height() / dst.height());
    const int y1 = std::max(y0 + 1, static_cast<int>(static_cast<long long>(y + 1) * src.height() / dst.height()));
    std::uint8_t* out = dst.row8(y);
    for (int x = 0; x < dw; ++x) {
      const int x0 = xs[x];
      const int x1 = std::max(x0 + 1, xs[x + 1]);
      const std::uint64_t n = static_cast<std::uint64_t>(y1 - y0) * static_cast<std::uint64_t>(x1 - x0);
      for (int c = 0; c < ch; ++c) {
        std::uint64_t sum = 0;
        for (int sy = y0; sy < y1; ++sy) {
          const std::uint8_t* in = src.row8(sy);
          for (int sx = x0; sx < x1; ++sx) sum += in[sx * ch + c];
        }
        out[x * ch + c] = static_cast<std::uint8_t>((sum + n / 2) / n);
      }
    }
  }
}

}  // namespace emr::kernels::omp
