#include "emr/image_codec.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <jpeglib.h>
#include <png.h>
#include <tiffio.h>

#include "emr/error.hpp"
#include "webp_abi.hpp"

namespace emr {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void decode_fail(const std::string& what) { throw Error(Errc::DecodeError, {}, what); }
[[noreturn]] void encode_fail(const std::string& what) { throw Error(Errc::EncodeError, {}, what); }

// ---------------------------------------------------------------------------
// PNG

struct PngIo {
  std::span<const std::uint8_t> in;
  std::size_t pos = 0;
  std::vector<std::uint8_t>* out = nullptr;
  char message[256] = {};
};

void png_error_cb(png_structp png, png_const_charp msg) {
  auto* io = static_cast<PngIo*>(png_get_error_ptr(png));
  std::snprintf(io->message, sizeof io->message, "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

void png_read_cb(png_structp png, png_bytep dst, png_size_t n) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  if (io->pos + n > io->in.size()) png_error(png, "truncated PNG stream");
  std::memcpy(dst, io->in.data() + io->pos, n);
  io->pos += n;
}

void png_write_cb(png_structp png, png_bytep src, png_size_t n) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  io->out->insert(io->out->end(), src, src + n);
}

void png_flush_cb(png_structp) {}

// Everything between setjmp and libpng's longjmp is C frames or the
// callbacks above, none of which own resources.
bool png_decode_into(png_structp png, png_infop info, PngIo& io, Raster& out, std::vector<png_bytep>& rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_read_fn(png, &io, png_read_cb);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  const bool gray = (color & PNG_COLOR_MASK_COLOR) == 0;
  if (depth == 16) {
    if (gray)
      png_set_swap(png);  // host is little-endian
    else
      png_set_strip_16(png);
  }
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  const int bits = png_get_bit_depth(png, info);
  PixelFormat fmt;
  if (channels == 1 && bits == 16)
    fmt = PixelFormat::Gray16;
  else if (channels == 1 && bits == 8)
    fmt = PixelFormat::Gray8;
  else if (channels == 3 && bits == 8)
    fmt = PixelFormat::Rgb8;
  else
    png_error(png, "unsupported PNG layout");
  out = Raster(w, h, fmt);
  rows.resize(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y)
    rows[y] = fmt == PixelFormat::Gray16 ? reinterpret_cast<png_bytep>(out.row16(y)) : out.row8(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  return true;
}

Raster decode_png(std::span<const std::uint8_t> bytes) {
  PngIo io;
  io.in = bytes;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &io, png_error_cb, png_warning_cb);
  if (!png) decode_fail("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  Raster out;
  std::vector<png_bytep> rows;
  const bool ok = info && png_decode_into(png, info, io, out, rows);
  png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  if (!ok) decode_fail(std::string("PNG: ") + io.message);
  return out;
}

bool png_encode_into(png_structp png, png_infop info, PngIo& io, const Raster& img, std::vector<png_bytep>& rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, &io, png_write_cb, png_flush_cb);
  const int color = img.format() == PixelFormat::Rgb8 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  const int depth = img.format() == PixelFormat::Gray16 ? 16 : 8;
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), depth,
               color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (depth == 16) png_set_swap(png);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  return true;
}

std::vector<std::uint8_t> encode_png(const Raster& img) {
  std::vector<std::uint8_t> out;
  PngIo io;
  io.out = &out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &io, png_error_cb, png_warning_cb);
  if (!png) encode_fail("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
  for (int y = 0; y < img.height(); ++y) {
    rows[y] = img.format() == PixelFormat::Gray16
                  ? reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(img.row16(y)))
                  : const_cast<png_bytep>(img.row8(y));
  }
  const bool ok = info && png_encode_into(png, info, io, img, rows);
  png_destroy_write_struct(&png, info ? &info : nullptr);
  if (!ok) encode_fail(std::string("PNG: ") + io.message);
  return out;
}

// ---------------------------------------------------------------------------
// JPEG

struct JpegErr {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX] = {};
};

void jpeg_error_exit_cb(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_quiet_cb(j_common_ptr, int) {}

bool jpeg_decode_into(jpeg_decompress_struct& cinfo, JpegErr& err, std::span<const std::uint8_t> bytes, Raster& out) {
  if (setjmp(err.jump)) return false;
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  const bool gray = cinfo.jpeg_color_space == JCS_GRAYSCALE;
  cinfo.out_color_space = gray ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out = Raster(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height),
               gray ? PixelFormat::Gray8 : PixelFormat::Rgb8);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.row8(static_cast<int>(cinfo.output_scanline));
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  return true;
}

Raster decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErr err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit_cb;
  err.mgr.emit_message = jpeg_quiet_cb;
  Raster out;
  const bool ok = jpeg_decode_into(cinfo, err, bytes, out);
  jpeg_destroy_decompress(&cinfo);
  if (!ok) decode_fail(std::string("JPEG: ") + err.message);
  return out;
}

bool jpeg_encode_into(jpeg_compress_struct& cinfo, JpegErr& err, const Raster& img, int quality,
                      unsigned char** buf, unsigned long* len) {
  if (setjmp(err.jump)) return false;
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, buf, len);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = img.channels();
  cinfo.in_color_space = img.channels() == 3 ? JCS_RGB : JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(img.row8(static_cast<int>(cinfo.next_scanline)));
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  return true;
}

std::vector<std::uint8_t> encode_jpeg(const Raster& img, int quality) {
  if (img.format() == PixelFormat::Gray16) encode_fail("JPEG requires 8-bit samples");
  jpeg_compress_struct cinfo{};
  JpegErr err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit_cb;
  err.mgr.emit_message = jpeg_quiet_cb;
  unsigned char* buf = nullptr;
  unsigned long len = 0;
  const bool ok = jpeg_encode_into(cinfo, err, img, std::clamp(quality, 1, 100), &buf, &len);
  jpeg_destroy_compress(&cinfo);
  std::vector<std::uint8_t> out;
  if (ok) out.assign(buf, buf + len);
  std::free(buf);
  if (!ok) encode_fail(std::string("JPEG: ") + err.message);
  return out;
}

// ---------------------------------------------------------------------------
// TIFF

thread_local std::string tiff_last_error;

void tiff_error_cb(const char* module, const char* fmt, va_list ap) {
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  tiff_last_error = std::string(module ? module : "tiff") + ": " + buf;
}

void tiff_warning_cb(const char*, const char*, va_list) {}

struct TiffMem {
  std::vector<std::uint8_t> buf;
  std::span<const std::uint8_t> in;
  bool writing = false;
  toff_t pos = 0;

  toff_t size() const { return writing ? buf.size() : in.size(); }
};

tmsize_t tiff_read(thandle_t h, void* dst, tmsize_t n) {
  auto* m = static_cast<TiffMem*>(h);
  const std::uint8_t* base = m->writing ? m->buf.data() : m->in.data();
  const toff_t avail = m->pos < m->size() ? m->size() - m->pos : 0;
  const toff_t take = std::min<toff_t>(avail, static_cast<toff_t>(n));
  if (take) std::memcpy(dst, base + m->pos, take);
  m->pos += take;
  return static_cast<tmsize_t>(take);
}

tmsize_t tiff_write(thandle_t h, void* src, tmsize_t n) {
  auto* m = static_cast<TiffMem*>(h);
  if (!m->writing) return 0;
  const toff_t end = m->pos + static_cast<toff_t>(n);
  if (end > m->buf.size()) m->buf.resize(end);
  std::memcpy(m->buf.data() + m->pos, src, static_cast<std::size_t>(n));
  m->pos = end;
  return n;
}

toff_t tiff_seek(thandle_t h, toff_t off, int whence) {
  auto* m = static_cast<TiffMem*>(h);
  toff_t target = off;
  if (whence == SEEK_CUR) target = m->pos + off;
  if (whence == SEEK_END) target = m->size() + off;
  if (m->writing && target > m->buf.size()) m->buf.resize(target);
  m->pos = target;
  return target;
}

int tiff_close(thandle_t) { return 0; }
toff_t tiff_size(thandle_t h) { return static_cast<TiffMem*>(h)->size(); }
int tiff_map(thandle_t, void**, toff_t*) { return 0; }
void tiff_unmap(thandle_t, void*, toff_t) {}

struct TiffCloser {
  void operator()(TIFF* t) const { TIFFClose(t); }
};
using TiffPtr = std::unique_ptr<TIFF, TiffCloser>;

void install_tiff_handlers() {
  static const bool once = [] {
    TIFFSetErrorHandler(tiff_error_cb);
    TIFFSetWarningHandler(tiff_warning_cb);
    return true;
  }();
  (void)once;
}

Raster decode_tiff(std::span<const std::uint8_t> bytes) {
  install_tiff_handlers();
  tiff_last_error.clear();
  TiffMem mem;
  mem.in = bytes;
  TiffPtr tif(TIFFClientOpen("memory", "rm", &mem, tiff_read, tiff_write, tiff_seek, tiff_close, tiff_size,
                             tiff_map, tiff_unmap));
  if (!tif) decode_fail("TIFF: " + tiff_last_error);

  std::uint32_t w = 0, h = 0;
  std::uint16_t spp = 1, bps = 1, photometric = PHOTOMETRIC_MINISBLACK, planar = PLANARCONFIG_CONTIG;
  std::uint16_t sample_format = SAMPLEFORMAT_UINT;
  TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &w);
  TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &h);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bps);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_PLANARCONFIG, &planar);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLEFORMAT, &sample_format);
  if (!TIFFGetField(tif.get(), TIFFTAG_PHOTOMETRIC, &photometric))
    photometric = spp >= 3 ? PHOTOMETRIC_RGB : PHOTOMETRIC_MINISBLACK;
  if (w == 0 || h == 0) decode_fail("TIFF: zero dimensions");

  const bool gray = (photometric == PHOTOMETRIC_MINISBLACK || photometric == PHOTOMETRIC_MINISWHITE) && spp == 1;
  const bool direct = sample_format == SAMPLEFORMAT_UINT && planar == PLANARCONFIG_CONTIG &&
                      ((gray && (bps == 8 || bps == 16)) || (photometric == PHOTOMETRIC_RGB && spp >= 3 && bps == 8));

  if (!direct) {
    // Palette, YCbCr, odd bit depths: let libtiff convert to RGBA.
    std::vector<std::uint32_t> rgba(static_cast<std::size_t>(w) * h);
    if (!TIFFReadRGBAImageOriented(tif.get(), w, h, rgba.data(), ORIENTATION_TOPLEFT, 0))
      decode_fail("TIFF: unsupported layout " + tiff_last_error);
    Raster out(static_cast<int>(w), static_cast<int>(h), PixelFormat::Rgb8);
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x) {
        const std::uint32_t p = rgba[static_cast<std::size_t>(y) * w + x];
        out.set_pixel(static_cast<int>(x), static_cast<int>(y),
                      {static_cast<std::uint8_t>(TIFFGetR(p)), static_cast<std::uint8_t>(TIFFGetG(p)),
                       static_cast<std::uint8_t>(TIFFGetB(p))});
      }
    return out;
  }

  const PixelFormat fmt = !gray ? PixelFormat::Rgb8 : bps == 16 ? PixelFormat::Gray16 : PixelFormat::Gray8;
  Raster out(static_cast<int>(w), static_cast<int>(h), fmt);
  const std::size_t bytes_per_px = static_cast<std::size_t>(spp) * (bps / 8);
  const std::size_t out_px = fmt == PixelFormat::Rgb8 ? 3 : 1;

  auto store_row = [&](std::uint32_t y, std::uint32_t x0, const std::uint8_t* src, std::uint32_t count) {
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint8_t* p = src + i * bytes_per_px;
      if (fmt == PixelFormat::Gray16) {
        std::uint16_t v;
        std::memcpy(&v, p, 2);
        out.row16(static_cast<int>(y))[x0 + i] = v;
      } else {
        std::uint8_t* d = out.row8(static_cast<int>(y)) + (x0 + i) * out_px;
        std::memcpy(d, p, out_px);
      }
    }
  };

  if (TIFFIsTiled(tif.get())) {
    std::uint32_t tw = 0, th = 0;
    TIFFGetField(tif.get(), TIFFTAG_TILEWIDTH, &tw);
    TIFFGetField(tif.get(), TIFFTAG_TILELENGTH, &th);
    std::vector<std::uint8_t> tile(static_cast<std::size_t>(TIFFTileSize(tif.get())));
    for (std::uint32_t ty = 0; ty < h; ty += th)
      for (std::uint32_t tx = 0; tx < w; tx += tw) {
        if (TIFFReadTile(tif.get(), tile.data(), tx, ty, 0, 0) < 0) decode_fail("TIFF: " + tiff_last_error);
        const std::uint32_t cw = std::min(tw, w - tx);
        for (std::uint32_t r = 0; r < th && ty + r < h; ++r)
          store_row(ty + r, tx, tile.data() + static_cast<std::size_t>(r) * tw * bytes_per_px, cw);
      }
  } else {
    std::vector<std::uint8_t> line(static_cast<std::size_t>(TIFFScanlineSize(tif.get())));
    for (std::uint32_t y = 0; y < h; ++y) {
      if (TIFFReadScanline(tif.get(), line.data(), y, 0) < 0) decode_fail("TIFF: " + tiff_last_error);
      store_row(y, 0, line.data(), w);
    }
  }
  if (photometric == PHOTOMETRIC_MINISWHITE) {
    for (auto& v : out.data8()) v = static_cast<std::uint8_t>(255 - v);
    for (auto& v : out.data16()) v = static_cast<std::uint16_t>(65535 - v);
  }
  return out;
}

std::vector<std::uint8_t> encode_tiff(const Raster& img) {
  install_tiff_handlers();
  tiff_last_error.clear();
  TiffMem mem;
  mem.writing = true;
  {
    TiffPtr tif(TIFFClientOpen("memory", "w", &mem, tiff_read, tiff_write, tiff_seek, tiff_close, tiff_size,
                               tiff_map, tiff_unmap));
    if (!tif) encode_fail("TIFF: " + tiff_last_error);
    const std::uint16_t spp = static_cast<std::uint16_t>(img.channels());
    const std::uint16_t bps = img.format() == PixelFormat::Gray16 ? 16 : 8;
    TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(img.width()));
    TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(img.height()));
    TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, spp);
    TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, bps);
    TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, spp == 3 ? PHOTOMETRIC_RGB : PHOTOMETRIC_MINISBLACK);
    TIFFSetField(tif.get(), TIFFTAG_ORIENTATION, ORIENTATION_TOPLEFT);
    TIFFSetField(tif.get(), TIFFTAG_COMPRESSION,
                 TIFFIsCODECConfigured(COMPRESSION_ADOBE_DEFLATE) ? COMPRESSION_ADOBE_DEFLATE : COMPRESSION_NONE);
    TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, TIFFDefaultStripSize(tif.get(), 0));
    for (int y = 0; y < img.height(); ++y) {
      void* row = img.format() == PixelFormat::Gray16 ? static_cast<void*>(const_cast<std::uint16_t*>(img.row16(y)))
                                                      : static_cast<void*>(const_cast<std::uint8_t*>(img.row8(y)));
      if (TIFFWriteScanline(tif.get(), row, static_cast<std::uint32_t>(y), 0) < 0)
        encode_fail("TIFF: " + tiff_last_error);
    }
    if (!TIFFWriteDirectory(tif.get())) encode_fail("TIFF: " + tiff_last_error);
  }
  return std::move(mem.buf);
}

// ---------------------------------------------------------------------------
// BMP (uncompressed 8/24/32-bit, bitfields for 32-bit)

std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}
std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

Raster decode_bmp(std::span<const std::uint8_t> b) {
  if (b.size() < 54 || b[0] != 'B' || b[1] != 'M') decode_fail("BMP: bad header");
  const std::uint32_t data_offset = le32(b, 10);
  const std::uint32_t dib_size = le32(b, 14);
  if (dib_size < 40) decode_fail("BMP: unsupported DIB header");
  const auto width = static_cast<std::int32_t>(le32(b, 18));
  const auto raw_height = static_cast<std::int32_t>(le32(b, 22));
  const std::uint16_t bpp = le16(b, 28);
  const std::uint32_t compression = le32(b, 30);
  std::uint32_t palette_count = le32(b, 46);
  if (width <= 0 || raw_height == 0 || width > (1 << 16) || std::abs(raw_height) > (1 << 16))
    decode_fail("BMP: bad dimensions");
  if (!(compression == 0 || (compression == 3 && bpp == 32)))
    throw Error(Errc::UnsupportedFormat, "bmp", "compressed BMP");
  if (bpp != 8 && bpp != 24 && bpp != 32) throw Error(Errc::UnsupportedFormat, "bmp", "unsupported bit depth");
  const bool top_down = raw_height < 0;
  const int height = std::abs(raw_height);
  const std::size_t stride = (static_cast<std::size_t>(width) * bpp / 8 + 3) & ~std::size_t{3};
  if (data_offset + stride * height > b.size()) decode_fail("BMP: truncated pixel data");

  std::array<Rgb, 256> palette{};
  bool palette_gray = true;
  if (bpp == 8) {
    if (palette_count == 0) palette_count = 256;
    const std::size_t pal_at = 14 + dib_size;
    if (palette_count > 256 || pal_at + palette_count * 4 > b.size()) decode_fail("BMP: bad palette");
    for (std::uint32_t i = 0; i < palette_count; ++i) {
      palette[i] = {b[pal_at + i * 4 + 2], b[pal_at + i * 4 + 1], b[pal_at + i * 4]};
      palette_gray = palette_gray && palette[i].r == palette[i].g && palette[i].g == palette[i].b;
    }
  }
  const PixelFormat fmt = bpp == 8 && palette_gray ? PixelFormat::Gray8 : PixelFormat::Rgb8;
  Raster out(width, height, fmt);
  for (int y = 0; y < height; ++y) {
    const int src_row = top_down ? y : height - 1 - y;
    const std::uint8_t* src = b.data() + data_offset + stride * src_row;
    for (int x = 0; x < width; ++x) {
      if (bpp == 8) {
        const Rgb c = palette[src[x]];
        if (fmt == PixelFormat::Gray8)
          out.row8(y)[x] = c.r;
        else
          out.set_pixel(x, y, c);
      } else {
        const std::uint8_t* p = src + x * (bpp / 8);
        out.set_pixel(x, y, {p[2], p[1], p[0]});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// WebP

Raster decode_webp(std::span<const std::uint8_t> bytes) {
  int w = 0, h = 0;
  std::uint8_t* px = WebPDecodeRGB(bytes.data(), bytes.size(), &w, &h);
  if (!px) decode_fail("WebP: decode failed");
  Raster out(w, h, PixelFormat::Rgb8);
  std::memcpy(out.data8().data(), px, out.sample_count());
  WebPFree(px);
  return out;
}

std::vector<std::uint8_t> encode_webp(const Raster& img, const EncodeOptions& opts) {
  if (img.format() == PixelFormat::Gray16) encode_fail("WebP requires 8-bit samples");
  if (img.width() > 16383 || img.height() > 16383) encode_fail("WebP dimensions exceed 16383");
  Raster rgb;
  const Raster* src = &img;
  if (img.format() == PixelFormat::Gray8) {
    rgb = Raster(img.width(), img.height(), PixelFormat::Rgb8);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        const std::uint8_t v = img.row8(y)[x];
        rgb.set_pixel(x, y, {v, v, v});
      }
    src = &rgb;
  }
  std::uint8_t* buf = nullptr;
  const int stride = src->width() * 3;
  const std::size_t n = opts.webp_lossless
                            ? WebPEncodeLosslessRGB(src->data8().data(), src->width(), src->height(), stride, &buf)
                            : WebPEncodeRGB(src->data8().data(), src->width(), src->height(), stride,
                                            static_cast<float>(std::clamp(opts.quality, 1, 100)), &buf);
  if (n == 0 || !buf) encode_fail("WebP: encode failed");
  std::vector<std::uint8_t> out(buf, buf + n);
  WebPFree(buf);
  return out;
}

}  // namespace

std::string_view extension_for(ImageFormat f) {
  switch (f) {
    case ImageFormat::Png: return "png";
    case ImageFormat::Jpeg: return "jpg";
    case ImageFormat::Tiff: return "tif";
    case ImageFormat::Bmp: return "bmp";
    case ImageFormat::WebP: return "webp";
  }
  return "bin";
}

std::optional<ImageFormat> parse_image_format(std::string_view name) {
  const std::string s = lower(name);
  if (s == "png") return ImageFormat::Png;
  if (s == "jpg" || s == "jpeg") return ImageFormat::Jpeg;
  if (s == "tif" || s == "tiff") return ImageFormat::Tiff;
  if (s == "bmp") return ImageFormat::Bmp;
  if (s == "webp") return ImageFormat::WebP;
  return std::nullopt;
}

std::optional<ImageFormat> format_from_extension(std::string_view ext) {
  if (!ext.empty() && ext.front() == '.') ext.remove_prefix(1);
  return parse_image_format(ext);
}

std::optional<ImageFormat> sniff_format(std::span<const std::uint8_t> b) {
  auto starts = [&](std::initializer_list<std::uint8_t> magic) {
    return b.size() >= magic.size() && std::equal(magic.begin(), magic.end(), b.begin());
  };
  if (starts({0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A})) return ImageFormat::Png;
  if (starts({0xFF, 0xD8, 0xFF})) return ImageFormat::Jpeg;
  if (starts({'I', 'I', 42, 0}) || starts({'M', 'M', 0, 42}) || starts({'I', 'I', 43, 0}) ||
      starts({'M', 'M', 0, 43}))
    return ImageFormat::Tiff;
  if (starts({'B', 'M'})) return ImageFormat::Bmp;
  if (b.size() >= 12 && starts({'R', 'I', 'F', 'F'}) && b[8] == 'W' && b[9] == 'E' && b[10] == 'B' && b[11] == 'P')
    return ImageFormat::WebP;
  return std::nullopt;
}

Raster decode_image(std::span<const std::uint8_t> bytes, std::optional<ImageFormat> hint) {
  // Magic bytes win over the hint; a hint only matters for streams we cannot sniff.
  const std::optional<ImageFormat> sniffed = sniff_format(bytes);
  if (!sniffed) {
    if (hint) decode_fail("content does not match ." + std::string(extension_for(*hint)));
    throw Error(Errc::UnsupportedFormat, {}, "unrecognized image signature");
  }
  switch (*sniffed) {
    case ImageFormat::Png: return decode_png(bytes);
    case ImageFormat::Jpeg: return decode_jpeg(bytes);
    case ImageFormat::Tiff: return decode_tiff(bytes);
    case ImageFormat::Bmp: return decode_bmp(bytes);
    case ImageFormat::WebP: return decode_webp(bytes);
  }
  throw Error(Errc::UnsupportedFormat, {}, "unreachable");
}

std::vector<std::uint8_t> encode_image(const Raster& img, ImageFormat format, const EncodeOptions& opts) {
  if (img.empty()) encode_fail("empty raster");
  switch (format) {
    case ImageFormat::Png: return encode_png(img);
    case ImageFormat::Jpeg: return encode_jpeg(img, opts.quality);
    case ImageFormat::Tiff: return encode_tiff(img);
    case ImageFormat::WebP: return encode_webp(img, opts);
    case ImageFormat::Bmp: break;
  }
  throw Error(Errc::UnsupportedFormat, std::string(extension_for(format)), "not an export format");
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, path.string(), "cannot open for reading");
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(std::max<std::streamoff>(size, 0)));
  if (!out.empty() && !in.read(reinterpret_cast<char*>(out.data()), size))
    throw Error(Errc::IoError, path.string(), "read failed");
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, path.string(), "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, path.string(), "write failed");
}

}  // namespace emr
