#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "emr/annotate.hpp"
#include "emr/error.hpp"

// Shape coordinates are continuous pixel coordinates with pixel centres on
// integers: pixel (px, py) is the unit square centred at (px, py).

namespace emr::annotate {

namespace {

void plot(Raster& img, int x, int y, Rgb c) {
  if (x >= 0 && y >= 0 && x < img.width() && y < img.height()) img.set_pixel(x, y, c);
}

// Square brush of side `stroke` anchored so that stroke 1 hits exactly (x, y).
void stamp(Raster& img, int x, int y, int stroke, Rgb c) {
  const int lo = -(stroke - 1) / 2;
  for (int dy = 0; dy < stroke; ++dy)
    for (int dx = 0; dx < stroke; ++dx) plot(img, x + lo + dx, y + lo + dy, c);
}

void stroke_segment(Raster& img, double xa, double ya, double xb, double yb, int stroke, Rgb c) {
  int x0 = static_cast<int>(std::lround(xa));
  int y0 = static_cast<int>(std::lround(ya));
  const int x1 = static_cast<int>(std::lround(xb));
  const int y1 = static_cast<int>(std::lround(yb));
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    stamp(img, x0, y0, stroke, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

// Pixels whose centre distance d from (cx, cy) satisfies inner <= d < outer.
void ring(Raster& img, double cx, double cy, double inner, double outer, Rgb c) {
  const double outer2 = outer * outer;
  const double inner2 = inner > 0 ? inner * inner : -1.0;
  const int y_lo = std::max(0, static_cast<int>(std::floor(cy - outer)));
  const int y_hi = std::min(img.height() - 1, static_cast<int>(std::ceil(cy + outer)));
  for (int py = y_lo; py <= y_hi; ++py) {
    const double dy = py - cy;
    const double rem = outer2 - dy * dy;
    if (rem <= 0) continue;
    const double half = std::sqrt(rem);
    const int x_lo = std::max(0, static_cast<int>(std::floor(cx - half)));
    const int x_hi = std::min(img.width() - 1, static_cast<int>(std::ceil(cx + half)));
    // Skip the interior chord of the inner disc.
    double skip_lo = 1, skip_hi = 0;
    if (inner2 > 0 && inner2 - dy * dy > 0) {
      const double ih = std::sqrt(inner2 - dy * dy);
      skip_lo = std::ceil(cx - ih) + 1;
      skip_hi = std::floor(cx + ih) - 1;
    }
    for (int px = x_lo; px <= x_hi; ++px) {
      if (px >= skip_lo && px <= skip_hi) {
        px = static_cast<int>(skip_hi);
        continue;
      }
      const double dx = px - cx;
      const double d2 = dx * dx + dy * dy;
      if (d2 < outer2 && d2 >= inner2) img.set_pixel(px, py, c);
    }
  }
}

void point_marker(Raster& img, double x, double y, const MarkerStyle& style, int stroke) {
  const Rgb c = rgb_of(style.color);
  const double extent = style.size_pct / 100.0 * img.width();
  const double half = extent / 2.0;
  const double hs = stroke / 2.0;
  switch (style.shape) {
    case MarkerShape::Dot:
      ring(img, x, y, 0.0, half, c);
      return;
    case MarkerShape::Circle:
      ring(img, x, y, std::max(0.0, half - stroke), half, c);
      return;
    case MarkerShape::Plus:
    case MarkerShape::Cross:
      break;
  }
  const int y_lo = std::max(0, static_cast<int>(std::floor(y - half)));
  const int y_hi = std::min(img.height() - 1, static_cast<int>(std::ceil(y + half)));
  const int x_lo = std::max(0, static_cast<int>(std::floor(x - half)));
  const int x_hi = std::min(img.width() - 1, static_cast<int>(std::ceil(x + half)));
  const double diag_hs = hs * std::sqrt(2.0);
  for (int py = y_lo; py <= y_hi; ++py) {
    const double dy = py - y;
    for (int px = x_lo; px <= x_hi; ++px) {
      const double dx = px - x;
      bool on = false;
      if (style.shape == MarkerShape::Plus) {
        on = (dy >= -hs && dy < hs && dx >= -half && dx < half) || (dx >= -hs && dx < hs && dy >= -half && dy < half);
      } else {
        const bool in_box = dx >= -half / std::sqrt(2.0) && dx < half / std::sqrt(2.0) &&
                            dy >= -half / std::sqrt(2.0) && dy < half / std::sqrt(2.0);
        on = in_box && ((dx - dy >= -diag_hs && dx - dy < diag_hs) || (dx + dy >= -diag_hs && dx + dy < diag_hs));
      }
      if (on) img.set_pixel(px, py, c);
    }
  }
}

}  // namespace

int outline_stroke(int image_width) { return 1 + static_cast<int>(std::lround(image_width / 1024.0)); }

void draw_markers_in_place(Raster& img, std::span<const io::SpectrumPosition> positions, const MarkerStyle& style,
                           const std::set<std::string>& enabled) {
  validate(style);
  if (img.format() != PixelFormat::Rgb8) throw Error(Errc::UnsupportedPixelFormat, {}, "annotation needs Rgb8");
  for (const std::string& id : enabled) {
    const bool known = std::any_of(positions.begin(), positions.end(),
                                   [&](const io::SpectrumPosition& p) { return p.id == id; });
    if (!known) throw Error(Errc::UnknownPositionId, id);
  }
  const int stroke = outline_stroke(img.width());
  const Rgb c = rgb_of(style.color);
  for (const io::SpectrumPosition& pos : positions) {
    if (!enabled.count(pos.id)) continue;
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, io::PointShape>) {
            point_marker(img, s.x, s.y, style, stroke);
          } else if constexpr (std::is_same_v<T, io::RectShape>) {
            stroke_segment(img, s.x, s.y, s.x + s.w, s.y, stroke, c);
            stroke_segment(img, s.x + s.w, s.y, s.x + s.w, s.y + s.h, stroke, c);
            stroke_segment(img, s.x + s.w, s.y + s.h, s.x, s.y + s.h, stroke, c);
            stroke_segment(img, s.x, s.y + s.h, s.x, s.y, stroke, c);
          } else if constexpr (std::is_same_v<T, io::CircleShape>) {
            const double hs = stroke / 2.0;
            ring(img, s.cx, s.cy, std::max(0.0, s.r - hs), s.r + hs, c);
          } else if constexpr (std::is_same_v<T, io::PolygonShape>) {
            const auto& v = s.vertices;
            for (std::size_t i = 0; i < v.size(); ++i) {
              const auto& a = v[i];
              const auto& b = v[(i + 1) % v.size()];
              stroke_segment(img, a.x, a.y, b.x, b.y, stroke, c);
            }
          } else {
            stroke_segment(img, s.x1, s.y1, s.x2, s.y2, stroke, c);
          }
        },
        pos.shape);
  }
}

Raster draw_markers(const Raster& img, std::span<const io::SpectrumPosition> positions, const MarkerStyle& style,
                    const std::set<std::string>& enabled) {
  Raster out = img;
  draw_markers_in_place(out, positions, style, enabled);
  return out;
}

}  // namespace emr::annotate
