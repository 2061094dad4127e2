#include <array>
#include <cmath>
#include <cstdint>

#include "emr/annotate.hpp"

namespace emr::annotate {

namespace {

constexpr int kCellW = 5;
constexpr int kCellH = 7;

using Glyph = std::array<std::uint8_t, kCellH>;  // 5 low bits per row, MSB left

struct Entry {
  char32_t code;
  Glyph rows;
};

// clang-format off
constexpr Entry kAtlas[] = {
    {U'0', {0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110}},
    {U'1', {0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}},
    {U'2', {0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111}},
    {U'3', {0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110}},
    {U'4', {0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010}},
    {U'5', {0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110}},
    {U'6', {0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110}},
    {U'7', {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000}},
    {U'8', {0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110}},
    {U'9', {0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100}},
    {U'.', {0b00000, 0b00000, 0b00000, 0b00000, 0b00000, 0b01100, 0b01100}},
    {U'-', {0b00000, 0b00000, 0b00000, 0b11111, 0b00000, 0b00000, 0b00000}},
    {U' ', {0b00000, 0b00000, 0b00000, 0b00000, 0b00000, 0b00000, 0b00000}},
    {U'n', {0b00000, 0b00000, 0b10110, 0b11001, 0b10001, 0b10001, 0b10001}},
    {U'm', {0b00000, 0b00000, 0b11010, 0b10101, 0b10101, 0b10101, 0b10101}},
    {U'µ', {0b00000, 0b10001, 0b10001, 0b10001, 0b10011, 0b11101, 0b10000}},
};
// clang-format on

const Glyph* find_glyph(char32_t c) {
  for (const Entry& e : kAtlas)
    if (e.code == c) return &e.rows;
  return nullptr;
}

// Minimal UTF-8 decoder; malformed bytes decode to U+FFFD.
template <typename F>
void for_each_codepoint(std::string_view s, F&& f) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6 && i + 1 < s.size()) {
      cp = ((c & 0x1Fu) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
      len = 2;
    } else if ((c >> 4) == 0xE && i + 2 < s.size()) {
      cp = ((c & 0x0Fu) << 12) | ((static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 6) |
           (static_cast<unsigned char>(s[i + 2]) & 0x3Fu);
      len = 3;
    }
    f(cp);
    i += len;
  }
}

int spacing(int text_height) { return std::max(1, static_cast<int>(std::lround(text_height / 7.0))); }

}  // namespace

int glyph_width(int text_height) {
  return std::max(1, static_cast<int>(std::lround(text_height * static_cast<double>(kCellW) / kCellH)));
}

int text_width(std::string_view utf8, int text_height) {
  int count = 0;
  for_each_codepoint(utf8, [&](char32_t) { ++count; });
  if (count == 0) return 0;
  return count * glyph_width(text_height) + (count - 1) * spacing(text_height);
}

void draw_text(Raster& img, int x, int y, std::string_view utf8, int text_height, Rgb color) {
  const int gw = glyph_width(text_height);
  const int advance = gw + spacing(text_height);
  int pen = x;
  for_each_codepoint(utf8, [&](char32_t cp) {
    if (const Glyph* g = find_glyph(cp)) {
      for (int ty = 0; ty < text_height; ++ty) {
        const int py = y + ty;
        if (py < 0 || py >= img.height()) continue;
        const std::uint8_t bits = (*g)[static_cast<std::size_t>(ty * kCellH / text_height)];
        for (int tx = 0; tx < gw; ++tx) {
          const int px = pen + tx;
          if (px < 0 || px >= img.width()) continue;
          const int sx = tx * kCellW / gw;
          if (bits & (1u << (kCellW - 1 - sx))) img.set_pixel(px, py, color);
        }
      }
    }
    pen += advance;
  });
}

}  // namespace emr::annotate
