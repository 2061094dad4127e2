#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "emr/project_io.hpp"
#include "emr/raster.hpp"

namespace emr::annotate {

// Five on-image placements and three on a data bar appended below the image.
enum class ScaleBarPosition {
  ImageTopLeft,
  ImageTopRight,
  ImageBottomLeft,
  ImageBottomCenter,
  ImageBottomRight,
  BarBelowLeft,
  BarBelowCenter,
  BarBelowRight,
};

enum class FontColor { Black, White };
enum class BarBackground { None, Black, White };
enum class MarkerShape { Plus, Cross, Circle, Dot };
enum class MarkerColor { Red, Yellow, White, Black };

std::string_view to_string(ScaleBarPosition p);
std::optional<ScaleBarPosition> parse_scale_bar_position(std::string_view s);
bool is_data_bar(ScaleBarPosition p);
std::string_view to_string(FontColor c);
std::optional<FontColor> parse_font_color(std::string_view s);
std::string_view to_string(BarBackground b);
std::optional<BarBackground> parse_bar_background(std::string_view s);
std::string_view to_string(MarkerShape s);
std::optional<MarkerShape> parse_marker_shape(std::string_view s);
std::string_view to_string(MarkerColor c);
std::optional<MarkerColor> parse_marker_color(std::string_view s);
Rgb rgb_of(FontColor c);
Rgb rgb_of(MarkerColor c);
Rgb rgb_of(BarBackground b);  // None maps to black

struct ScaleBarStyle {
  bool enabled = true;
  ScaleBarPosition position = ScaleBarPosition::ImageBottomRight;
  std::optional<double> fixed_length_um;  // empty: automatic length
  double bar_height_pct = 30.0;           // of text height
  double font_size_pct = 4.0;             // of image height
  FontColor font_color = FontColor::White;
  BarBackground background = BarBackground::Black;
  double background_opacity = 0.5;
  bool text_above_bar = false;

  bool auto_length() const noexcept { return !fixed_length_um.has_value(); }
  bool operator==(const ScaleBarStyle&) const = default;
};

struct MarkerStyle {
  MarkerShape shape = MarkerShape::Plus;
  MarkerColor color = MarkerColor::Red;
  double size_pct = 2.0;  // of image width
  bool operator==(const MarkerStyle&) const = default;
};

/// Throws InvalidSettings when a field is out of range.
void validate(const ScaleBarStyle& s);
void validate(const MarkerStyle& s);

struct ScaleBarLayout {
  int image_width = 0;
  int image_height = 0;
  Rect bar_rect;
  Rect text_rect;
  Rect background_rect;  // the whole band for data-bar positions
  int text_height = 0;
  double length_um = 0;
  std::string label;
  int extends_canvas = 0;  // rows appended below the image

  bool operator==(const ScaleBarLayout&) const = default;
};

/// Largest value from {1, 1.25, 1.5, 2, 2.5, 3, 4, 5, 6, 8} x 10^n that is
/// <= a third of the image width in µm. Consecutive mantissas differ by at
/// most 4/3, so the result is also >= a quarter of the width.
double auto_bar_length(int width_px, double pixel_size_um);

/// "30 µm", "500 nm", "2.5 mm": three significant figures, trailing zeros trimmed.
std::string format_length_label(double length_um);

/// Inverse of format_length_label; returns µm.
double parse_length_label(std::string_view label);

ScaleBarLayout layout_scale_bar(int width, int height, const ScaleBarStyle& style, double pixel_size_um);

/// Rgb8 only. Returns a taller raster for data-bar layouts.
Raster draw_scale_bar(const Raster& img, const ScaleBarLayout& layout, const ScaleBarStyle& style);

/// Same as draw_scale_bar but reuses `img` when the canvas does not grow.
void draw_scale_bar_in_place(Raster& img, const ScaleBarLayout& layout, const ScaleBarStyle& style);

/// Stroke width used for outlines on an image of this width.
int outline_stroke(int image_width);

/// Rgb8 only. Positions whose id is not in `enabled` are left untouched.
Raster draw_markers(const Raster& img, std::span<const io::SpectrumPosition> positions, const MarkerStyle& style,
                    const std::set<std::string>& enabled);
void draw_markers_in_place(Raster& img, std::span<const io::SpectrumPosition> positions, const MarkerStyle& style,
                           const std::set<std::string>& enabled);

// Embedded 5x7 glyph atlas (digits, '.', '-', ' ', 'n', 'm', 'µ'),
// nearest-neighbour scaled to the requested text height.
int glyph_width(int text_height);
int text_width(std::string_view utf8, int text_height);
void draw_text(Raster& img, int x, int y, std::string_view utf8, int text_height, Rgb color);

}  // namespace emr::annotate
