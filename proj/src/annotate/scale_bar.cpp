#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "emr/annotate.hpp"
#include "emr/error.hpp"
#include "emr/kernels.hpp"

namespace emr::annotate {

namespace {

constexpr std::array<double, 10> kMantissas = {1, 1.25, 1.5, 2, 2.5, 3, 4, 5, 6, 8};

template <typename E, std::size_t N>
std::optional<E> lookup(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& table) {
  for (const auto& [value, name] : table)
    if (name == s) return value;
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(E v, const std::array<std::pair<E, std::string_view>, N>& table) {
  for (const auto& [value, name] : table)
    if (value == v) return name;
  return "";
}

constexpr std::array<std::pair<ScaleBarPosition, std::string_view>, 8> kPositions = {{
    {ScaleBarPosition::ImageTopLeft, "image-top-left"},
    {ScaleBarPosition::ImageTopRight, "image-top-right"},
    {ScaleBarPosition::ImageBottomLeft, "image-bottom-left"},
    {ScaleBarPosition::ImageBottomCenter, "image-bottom-center"},
    {ScaleBarPosition::ImageBottomRight, "image-bottom-right"},
    {ScaleBarPosition::BarBelowLeft, "bar-below-left"},
    {ScaleBarPosition::BarBelowCenter, "bar-below-center"},
    {ScaleBarPosition::BarBelowRight, "bar-below-right"},
}};
constexpr std::array<std::pair<FontColor, std::string_view>, 2> kFontColors = {{
    {FontColor::Black, "black"},
    {FontColor::White, "white"},
}};
constexpr std::array<std::pair<BarBackground, std::string_view>, 3> kBackgrounds = {{
    {BarBackground::None, "none"},
    {BarBackground::Black, "black"},
    {BarBackground::White, "white"},
}};
constexpr std::array<std::pair<MarkerShape, std::string_view>, 4> kShapes = {{
    {MarkerShape::Plus, "plus"},
    {MarkerShape::Cross, "cross"},
    {MarkerShape::Circle, "circle"},
    {MarkerShape::Dot, "dot"},
}};
constexpr std::array<std::pair<MarkerColor, std::string_view>, 4> kMarkerColors = {{
    {MarkerColor::Red, "red"},
    {MarkerColor::Yellow, "yellow"},
    {MarkerColor::White, "white"},
    {MarkerColor::Black, "black"},
}};

double round_significant(double v, int digits) {
  const double magnitude = std::floor(std::log10(v));
  const double scale = std::pow(10.0, digits - 1 - magnitude);
  return std::round(v * scale) / scale;
}

std::string trimmed_fixed(double v) {
  const int magnitude = static_cast<int>(std::floor(std::log10(v)));
  const int decimals = std::max(0, 2 - magnitude);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

int round_px(double v) { return static_cast<int>(std::lround(v)); }

}  // namespace

std::string_view to_string(ScaleBarPosition p) { return name_of(p, kPositions); }
std::optional<ScaleBarPosition> parse_scale_bar_position(std::string_view s) { return lookup(s, kPositions); }
bool is_data_bar(ScaleBarPosition p) {
  return p == ScaleBarPosition::BarBelowLeft || p == ScaleBarPosition::BarBelowCenter ||
         p == ScaleBarPosition::BarBelowRight;
}
std::string_view to_string(FontColor c) { return name_of(c, kFontColors); }
std::optional<FontColor> parse_font_color(std::string_view s) { return lookup(s, kFontColors); }
std::string_view to_string(BarBackground b) { return name_of(b, kBackgrounds); }
std::optional<BarBackground> parse_bar_background(std::string_view s) { return lookup(s, kBackgrounds); }
std::string_view to_string(MarkerShape s) { return name_of(s, kShapes); }
std::optional<MarkerShape> parse_marker_shape(std::string_view s) { return lookup(s, kShapes); }
std::string_view to_string(MarkerColor c) { return name_of(c, kMarkerColors); }
std::optional<MarkerColor> parse_marker_color(std::string_view s) { return lookup(s, kMarkerColors); }

Rgb rgb_of(FontColor c) { return c == FontColor::White ? Rgb{255, 255, 255} : Rgb{0, 0, 0}; }
Rgb rgb_of(BarBackground b) { return b == BarBackground::White ? Rgb{255, 255, 255} : Rgb{0, 0, 0}; }
Rgb rgb_of(MarkerColor c) {
  switch (c) {
    case MarkerColor::Red: return {255, 0, 0};
    case MarkerColor::Yellow: return {255, 255, 0};
    case MarkerColor::White: return {255, 255, 255};
    case MarkerColor::Black: return {0, 0, 0};
  }
  return {};
}

void validate(const ScaleBarStyle& s) {
  if (!(s.bar_height_pct > 0 && s.bar_height_pct <= 200))
    throw Error(Errc::InvalidSettings, "bar_height_pct", "must be in (0, 200]");
  if (!(s.font_size_pct > 0 && s.font_size_pct <= 50))
    throw Error(Errc::InvalidSettings, "font_size_pct", "must be in (0, 50]");
  if (!(s.background_opacity >= 0 && s.background_opacity <= 1))
    throw Error(Errc::InvalidSettings, "background_opacity", "must be in [0, 1]");
  if (s.fixed_length_um && !(*s.fixed_length_um > 0 && std::isfinite(*s.fixed_length_um)))
    throw Error(Errc::InvalidSettings, "length", "fixed length must be > 0");
}

void validate(const MarkerStyle& s) {
  if (!(s.size_pct > 0 && s.size_pct <= 100)) throw Error(Errc::InvalidSettings, "size_pct", "must be in (0, 100]");
}

double auto_bar_length(int width_px, double pixel_size_um) {
  if (width_px < 1 || !(pixel_size_um > 0)) throw Error(Errc::BadValue, "auto_bar_length", "invalid geometry");
  const double limit = width_px * pixel_size_um / 3.0;
  const int decade = static_cast<int>(std::floor(std::log10(limit)));
  double best = 0;
  for (int e = decade - 1; e <= decade + 1; ++e) {
    const double unit = std::pow(10.0, std::abs(e));
    for (double m : kMantissas) {
      const double v = e >= 0 ? m * unit : m / unit;
      if (v <= limit) best = std::max(best, v);
    }
  }
  return best;
}

std::string format_length_label(double length_um) {
  if (!(length_um > 0) || !std::isfinite(length_um)) throw Error(Errc::NonPositiveLength, {}, "length must be > 0");
  const double rounded = round_significant(length_um, 3);
  if (rounded < 1.0) return trimmed_fixed(round_significant(rounded * 1000.0, 3)) + " nm";
  if (rounded >= 1000.0) return trimmed_fixed(round_significant(rounded / 1000.0, 3)) + " mm";
  return trimmed_fixed(rounded) + " µm";
}

double parse_length_label(std::string_view label) {
  const std::size_t space = label.find(' ');
  if (space == std::string_view::npos) throw Error(Errc::BadValue, std::string(label), "expected '<number> <unit>'");
  double v = 0;
  auto r = std::from_chars(label.data(), label.data() + space, v);
  if (r.ec != std::errc{} || r.ptr != label.data() + space) throw Error(Errc::BadValue, std::string(label));
  const std::string_view unit = label.substr(space + 1);
  if (unit == "nm") return v / 1000.0;
  if (unit == "µm") return v;
  if (unit == "mm") return v * 1000.0;
  throw Error(Errc::BadValue, std::string(unit), "unknown unit");
}

ScaleBarLayout layout_scale_bar(int width, int height, const ScaleBarStyle& style, double pixel_size_um) {
  validate(style);
  if (width < 1 || height < 1) throw Error(Errc::BadValue, "dims", "image dimensions must be >= 1");
  if (!(pixel_size_um > 0)) throw Error(Errc::BadValue, "pixel_size", "must be > 0");

  ScaleBarLayout out;
  out.image_width = width;
  out.image_height = height;
  out.length_um = style.fixed_length_um ? *style.fixed_length_um : auto_bar_length(width, pixel_size_um);
  const int bar_w = std::max(1, round_px(out.length_um / pixel_size_um));
  if (bar_w > width)
    throw Error(Errc::BarTooWide, {},
                "scale bar of " + std::to_string(bar_w) + " px exceeds image width " + std::to_string(width));

  const int text_h = std::max(1, round_px(style.font_size_pct / 100.0 * height));
  const int bar_h = std::max(1, round_px(style.bar_height_pct / 100.0 * text_h));
  out.text_height = text_h;
  out.label = format_length_label(out.length_um);
  const int label_w = text_width(out.label, text_h);

  const bool left = style.position == ScaleBarPosition::ImageTopLeft ||
                    style.position == ScaleBarPosition::ImageBottomLeft ||
                    style.position == ScaleBarPosition::BarBelowLeft;
  const bool center = style.position == ScaleBarPosition::ImageBottomCenter ||
                      style.position == ScaleBarPosition::BarBelowCenter;
  auto place_x = [&](int block_w) {
    const int margin = std::min(text_h, (width - block_w) / 2);
    if (left) return margin;
    if (center) return (width - block_w) / 2;
    return width - margin - block_w;
  };

  if (is_data_bar(style.position)) {
    // Bar and label side by side, vertically centred in the band.
    const int band_h = std::max(text_h + 2, round_px(2.2 * text_h));
    const int gap = std::max(1, round_px(text_h / 2.0));
    const int block_w = bar_w + gap + label_w;
    if (block_w > width) throw Error(Errc::LayoutOverflow, {}, "scale bar and label do not fit the data bar");
    const int x0 = place_x(block_w);
    const int bar_y = height + (band_h - bar_h) / 2;
    const int text_y = height + (band_h - text_h) / 2;
    if (style.text_above_bar) {
      out.text_rect = {x0, text_y, label_w, text_h};
      out.bar_rect = {x0 + label_w + gap, bar_y, bar_w, bar_h};
    } else {
      out.bar_rect = {x0, bar_y, bar_w, bar_h};
      out.text_rect = {x0 + bar_w + gap, text_y, label_w, text_h};
    }
    out.background_rect = {0, height, width, band_h};
    out.extends_canvas = band_h;
    return out;
  }

  const int gap = std::max(1, round_px(text_h / 4.0));
  const int block_w = std::max(bar_w, label_w);
  const int block_h = bar_h + gap + text_h;
  if (block_w > width || block_h > height)
    throw Error(Errc::LayoutOverflow, {}, "scale bar block does not fit inside the image");
  const bool top = style.position == ScaleBarPosition::ImageTopLeft || style.position == ScaleBarPosition::ImageTopRight;
  const int margin_y = std::min(text_h, (height - block_h) / 2);
  const int x0 = place_x(block_w);
  const int y0 = top ? margin_y : height - margin_y - block_h;
  const int bar_x = x0 + (block_w - bar_w) / 2;
  const int text_x = x0 + (block_w - label_w) / 2;
  if (style.text_above_bar) {
    out.text_rect = {text_x, y0, label_w, text_h};
    out.bar_rect = {bar_x, y0 + text_h + gap, bar_w, bar_h};
  } else {
    out.bar_rect = {bar_x, y0, bar_w, bar_h};
    out.text_rect = {text_x, y0 + bar_h + gap, label_w, text_h};
  }
  const int pad = std::max(1, round_px(text_h / 2.0));
  out.background_rect = intersect({x0 - pad, y0 - pad, block_w + 2 * pad, block_h + 2 * pad}, {0, 0, width, height});
  return out;
}

namespace {

void check_layout(const Raster& img, const ScaleBarLayout& layout) {
  if (img.format() != PixelFormat::Rgb8) throw Error(Errc::UnsupportedPixelFormat, {}, "annotation needs Rgb8");
  if (img.width() != layout.image_width || img.height() != layout.image_height)
    throw Error(Errc::LayoutMismatch, {}, "layout was computed for a different image size");
}

void fill(Raster& img, const Rect& rect, Rgb c) {
  const Rect r = intersect(rect, {0, 0, img.width(), img.height()});
  for (int y = r.y; y < r.y + r.h; ++y)
    for (int x = r.x; x < r.x + r.w; ++x) img.set_pixel(x, y, c);
}

void draw_bar_and_label(Raster& canvas, const ScaleBarLayout& layout, const ScaleBarStyle& style) {
  const Rgb ink = rgb_of(style.font_color);
  fill(canvas, layout.bar_rect, ink);
  draw_text(canvas, layout.text_rect.x, layout.text_rect.y, layout.label, layout.text_height, ink);
}

Rgb band_color(const ScaleBarStyle& style) {
  if (style.background == BarBackground::None)
    return style.font_color == FontColor::White ? Rgb{0, 0, 0} : Rgb{255, 255, 255};
  return rgb_of(style.background);
}

Raster extend_with_band(const Raster& img, const ScaleBarLayout& layout, const ScaleBarStyle& style) {
  Raster out(img.width(), img.height() + layout.extends_canvas, PixelFormat::Rgb8);
  std::copy(img.data8().begin(), img.data8().end(), out.data8().begin());
  fill(out, layout.background_rect, band_color(style));
  return out;
}

}  // namespace

void draw_scale_bar_in_place(Raster& img, const ScaleBarLayout& layout, const ScaleBarStyle& style) {
  check_layout(img, layout);
  if (layout.extends_canvas > 0) {
    img = draw_scale_bar(img, layout, style);
    return;
  }
  if (style.background != BarBackground::None)
    kernels::omp::blend_rect(img, layout.background_rect, rgb_of(style.background),
                             static_cast<float>(style.background_opacity));
  draw_bar_and_label(img, layout, style);
}

Raster draw_scale_bar(const Raster& img, const ScaleBarLayout& layout, const ScaleBarStyle& style) {
  check_layout(img, layout);
  if (layout.extends_canvas > 0) {
    Raster out = extend_with_band(img, layout, style);
    draw_bar_and_label(out, layout, style);
    return out;
  }
  Raster out = img;
  draw_scale_bar_in_place(out, layout, style);
  return out;
}

}  // namespace emr::annotate
