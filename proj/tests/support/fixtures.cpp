#include "fixtures.hpp"

#include <cmath>
#include <random>

#include "emr/image_codec.hpp"

namespace emr::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    fs::path p = fs::temp_directory_path() / ("emr-test-" + std::to_string(rd()));
    if (fs::create_directory(p)) {
      path_ = p;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Raster synthetic_gray8(int w, int h, unsigned seed) {
  Raster img(w, h, PixelFormat::Gray8);
  std::mt19937 rng(seed);
  const double cx = static_cast<double>(rng() % static_cast<unsigned>(w));
  const double cy = static_cast<double>(rng() % static_cast<unsigned>(h));
  const double r = 4.0 + static_cast<double>(rng() % 16u);
  for (int y = 0; y < h; ++y) {
    std::uint8_t* row = img.row8(y);
    for (int x = 0; x < w; ++x) {
      int v = 30 + (x * 120) / w + (y * 60) / h + static_cast<int>(rng() % 9u);
      if (std::hypot(x - cx, y - cy) < r) v = 230;
      row[x] = static_cast<std::uint8_t>(std::min(v, 255));
    }
  }
  return img;
}

Raster disk_layer(int w, int h, double cx, double cy, double r, PixelFormat fmt) {
  Raster img(w, h, fmt);
  const int peak = fmt == PixelFormat::Gray16 ? 65535 : 255;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      if (d >= r) continue;
      const int v = static_cast<int>(peak * (1.0 - 0.5 * d / r));
      if (fmt == PixelFormat::Gray16)
        img.row16(y)[x] = static_cast<std::uint16_t>(v);
      else
        img.row8(y)[x] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

void write_entry(const fs::path& entry_dir, const io::EntryManifest& m) {
  fs::create_directories(entry_dir);
  const std::string text = io::serialize_entry_manifest(m);
  write_file(entry_dir / "entry.json", std::vector<std::uint8_t>(text.begin(), text.end()));
}

namespace {

void save(const fs::path& path, const Raster& img, ImageFormat fmt) {
  write_file(path, encode_image(img, fmt));
}

}  // namespace

void make_project(const fs::path& dir) {
  {
    const fs::path d = dir / "area1";
    fs::create_directories(d);
    save(d / "area1.png", synthetic_gray8(320, 240, 1), ImageFormat::Png);
    io::EntryManifest m;
    m.id = "area1";
    m.kind = io::EntryKind::PointId;
    m.magnification = 1000;
    m.image = "area1.png";
    m.width = 320;
    m.height = 240;
    m.positions = {{"p1", io::PointShape{60, 50}},
                   {"p2", io::RectShape{150, 40, 50, 30}},
                   {"p3", io::CircleShape{100, 150, 20}}};
    m.date = "2024-03-05";
    write_entry(d, m);
  }
  {
    const fs::path d = dir / "map1";
    fs::create_directories(d);
    save(d / "map1.png", synthetic_gray8(256, 192, 2), ImageFormat::Png);
    save(d / "Fe.png", disk_layer(256, 192, 60, 60, 40), ImageFormat::Png);
    save(d / "K.png", disk_layer(256, 192, 190, 60, 40), ImageFormat::Png);
    save(d / "Si.tif", disk_layer(256, 192, 128, 140, 40, PixelFormat::Gray16), ImageFormat::Tiff);
    io::EntryManifest m;
    m.id = "map1";
    m.kind = io::EntryKind::SpectralImage;
    m.magnification = 500;
    m.image = "map1.png";
    m.width = 256;
    m.height = 192;
    m.positions = {{"s1", io::PolygonShape{{{20, 20}, {80, 25}, {60, 90}}}},
                   {"s2", io::PointShape{200, 150}},
                   {"s3", io::CircleShape{128, 96, 12}}};
    m.layers = {{"Fe", Rgb{255, 0, 0}, "Fe.png", 0, true},
                {"K", Rgb{0, 255, 0}, "K.png", 1, true},
                {"Si", Rgb{0, 0, 255}, "Si.tif", 2, true}};
    write_entry(d, m);
  }
  {
    const fs::path d = dir / "sem1";
    fs::create_directories(d);
    Raster full = synthetic_gray8(400, 340, 3);
    for (int y = 300; y < 340; ++y)
      for (int x = 0; x < 400; ++x) full.row8(y)[x] = 255;
    save(d / "sem1.tif", full, ImageFormat::Tiff);
    const std::string sidecar = "MAG=40\nFULL_SIZE=400x340\nDATA_SIZE=400x300\n";
    write_file(d / "sem1.txt", std::vector<std::uint8_t>(sidecar.begin(), sidecar.end()));
    io::EntryManifest m;
    m.id = "sem1";
    m.kind = io::EntryKind::JeolImage;
    m.magnification = 40;
    m.image = "sem1.tif";
    m.width = 400;
    m.height = 300;
    m.positions = {{"q1", io::LineShape{10, 10, 200, 120}}};
    write_entry(d, m);
  }
}

void make_large_entry(const fs::path& dir, const std::string& id, int w, int h, int layers) {
  const fs::path d = dir / id;
  fs::create_directories(d);
  save(d / (id + ".png"), synthetic_gray8(w, h, 7), ImageFormat::Png);
  io::EntryManifest m;
  m.id = id;
  m.kind = io::EntryKind::SpectralImage;
  m.magnification = 2000;
  m.image = id + ".png";
  m.width = w;
  m.height = h;
  m.positions = {{"p1", io::PointShape{w / 2.0, h / 2.0}}};
  static const Rgb colors[] = {{255, 0, 0}, {0, 255, 0}, {0, 0, 255}, {255, 255, 0}};
  for (int i = 0; i < layers; ++i) {
    const std::string name = "L" + std::to_string(i);
    save(d / (name + ".png"), disk_layer(w, h, w * (i + 1) / (layers + 1.0), h / 2.0, w / 6.0), ImageFormat::Png);
    m.layers.push_back({name, colors[i % 4], name + ".png", i, true});
  }
  write_entry(d, m);
}

}  // namespace emr::testing
