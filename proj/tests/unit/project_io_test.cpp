#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "emr/error.hpp"
#include "emr/image_codec.hpp"
#include "emr/project_io.hpp"
#include "fixtures.hpp"

namespace emr {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

template <typename F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an emr::Error";
  return Errc::IoError;
}

TEST(ScanProject, IndexesFixtureEntriesInIdOrder) {
  TempDir tmp;
  testing::make_project(tmp.path());
  const io::ProjectIndex index = io::scan_project(tmp.path());
  ASSERT_EQ(index.entries.size(), 3u);
  EXPECT_EQ(index.entries[0].id, "area1");
  EXPECT_EQ(index.entries[1].id, "map1");
  EXPECT_EQ(index.entries[2].id, "sem1");
  EXPECT_TRUE(index.warnings.empty());
  EXPECT_EQ(index.dir_of("map1"), tmp.path() / "map1");
}

TEST(ScanProject, EmptyDirectoryIsNotAProject) {
  TempDir tmp;
  EXPECT_EQ(code_of([&] { io::scan_project(tmp.path()); }), Errc::NotAProject);
  EXPECT_EQ(code_of([&] { io::scan_project(tmp / "missing"); }), Errc::DirNotFound);
}

TEST(ScanProject, MalformedManifestBecomesWarning) {
  TempDir tmp;
  testing::make_project(tmp.path());
  fs::remove_all(tmp / "sem1");
  fs::create_directories(tmp / "broken");
  const std::string bad = "{\n  \"id\": \"broken\",\n  \"kind\": \n}";
  write_file(tmp / "broken" / "entry.json", std::vector<std::uint8_t>(bad.begin(), bad.end()));
  const io::ProjectIndex index = io::scan_project(tmp.path());
  EXPECT_EQ(index.entries.size(), 2u);
  ASSERT_EQ(index.warnings.size(), 1u);
  EXPECT_NE(index.warnings[0].find("broken"), std::string::npos);
  EXPECT_NE(index.warnings[0].find("line 4"), std::string::npos);
}

TEST(EntryManifest, MinimalPointIdManifest) {
  const io::EntryManifest m = io::parse_entry_manifest(
      R"({"id":"A","kind":"point_id","magnification":1000,"image":"a.png","width":1024,"height":768})");
  EXPECT_EQ(m.magnification, 1000);
  EXPECT_EQ(m.width, 1024);
  EXPECT_EQ(m.height, 768);
  EXPECT_TRUE(m.layers.empty());
  EXPECT_TRUE(m.positions.empty());
}

TEST(EntryManifest, RejectsInvalidValues) {
  auto parse = [](const std::string& s) { return [s] { io::parse_entry_manifest(s); }; };
  EXPECT_EQ(code_of(parse(R"({"id":"A","kind":"point_id","magnification":-5,"image":"a.png","width":4,"height":4})")),
            Errc::BadValue);
  EXPECT_EQ(code_of(parse(R"({"id":"A","kind":"point_id","image":"a.png","width":4,"height":4})")), Errc::MissingField);
  EXPECT_EQ(code_of(parse(R"({"id":"A","kind":"point_id","magnification":5,"image":"../a.png","width":4,"height":4})")),
            Errc::BadValue);
  EXPECT_EQ(code_of(parse(R"({"id":"A","kind":"point_id","magnification":5,"image":"a.png","width":4,"height":4,
      "positions":[{"id":"p","type":"point","x":9,"y":1}]})")),
            Errc::BadValue);
  EXPECT_EQ(code_of(parse(R"({"id":"A","kind":"point_id","magnification":5,"image":"a.png","width":4,"height":4,
      "positions":[{"id":"p","type":"polygon","points":[[0,0],[1,1],[2,2]]}]})")),
            Errc::BadValue);
  EXPECT_EQ(code_of(parse("{\"id\": }")), Errc::SyntaxError);
}

io::EntryManifest random_manifest(std::mt19937& rng) {
  auto coord = [&](int limit) { return static_cast<double>(rng() % static_cast<unsigned>(limit * 4)) / 4.0; };
  io::EntryManifest m;
  m.id = "e" + std::to_string(rng() % 1000);
  m.kind = static_cast<io::EntryKind>(rng() % 4);
  m.magnification = 1 + rng() % 100000;
  m.image = "img.png";
  m.width = 16 + static_cast<int>(rng() % 2000);
  m.height = 16 + static_cast<int>(rng() % 2000);
  const int n = static_cast<int>(rng() % 6);
  for (int i = 0; i < n; ++i) {
    io::SpectrumPosition p;
    p.id = "p" + std::to_string(i);
    switch (rng() % 5) {
      case 0: p.shape = io::PointShape{coord(m.width), coord(m.height)}; break;
      case 1: p.shape = io::RectShape{0, 0, 1 + coord(m.width - 1), 1 + coord(m.height - 1)}; break;
      case 2: p.shape = io::CircleShape{m.width / 2.0, m.height / 2.0, 1 + coord(std::min(m.width, m.height) / 2 - 1)}; break;
      case 3: p.shape = io::PolygonShape{{{0, 0}, {m.width * 1.0, 0}, {0, m.height * 1.0}}}; break;
      default: p.shape = io::LineShape{coord(m.width), coord(m.height), coord(m.width), coord(m.height)}; break;
    }
    m.positions.push_back(std::move(p));
  }
  const int layers = static_cast<int>(rng() % 4);
  for (int i = 0; i < layers; ++i)
    m.layers.push_back({"L" + std::to_string(i),
                        Rgb{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                            static_cast<std::uint8_t>(rng())},
                        "L" + std::to_string(i) + ".tif", i * 3, (rng() & 1u) != 0});
  if (rng() & 1u) m.date = "2023-11-02";
  return m;
}

TEST(EntryManifest, RoundTripIsIdentity) {
  std::mt19937 rng(42);
  for (int i = 0; i < 300; ++i) {
    const io::EntryManifest m = random_manifest(rng);
    EXPECT_EQ(io::parse_entry_manifest(io::serialize_entry_manifest(m)), m) << io::serialize_entry_manifest(m);
  }
}

TEST(JeolSidecar, ParsesAndValidates) {
  const io::JeolSidecar sc = io::parse_jeol_sidecar("MAG=430\nFULL_SIZE=1280x1024\nDATA_SIZE=1280x960\n");
  EXPECT_EQ(sc.magnification, 430);
  EXPECT_EQ(sc.full_height, 1024);
  EXPECT_EQ(sc.data_height, 960);
  EXPECT_EQ(code_of([] { io::parse_jeol_sidecar("MAG=430\nFULL_SIZE=1280x1024\nDATA_SIZE=1280x1100\n"); }),
            Errc::BadValue);
  EXPECT_EQ(code_of([] { io::parse_jeol_sidecar("FULL_SIZE=1280x1024\nDATA_SIZE=1280x960\n"); }), Errc::MissingKey);
}

TEST(JeolSidecar, CropRemovesFooter) {
  Raster img = testing::synthetic_gray8(1280, 1024, 5);
  io::JeolSidecar sc{430, 1280, 1024, 1280, 960};
  const Raster cropped = io::crop_jeol_footer(img, sc);
  ASSERT_EQ(cropped.width(), 1280);
  ASSERT_EQ(cropped.height(), 960);
  for (int y : {0, 500, 959}) EXPECT_EQ(0, std::memcmp(cropped.row8(y), img.row8(y), 1280));

  sc.data_height = 1024;
  EXPECT_EQ(io::crop_jeol_footer(img, sc), img);

  const Raster square = testing::synthetic_gray8(1024, 1024, 6);
  EXPECT_EQ(code_of([&] { io::crop_jeol_footer(square, sc); }), Errc::DimensionMismatch);
}

TEST(LoadRaster, ConstantGrayPng) {
  TempDir tmp;
  Raster img(4, 4, PixelFormat::Gray8);
  for (auto& v : img.data8()) v = 128;
  write_file(tmp / "c.png", encode_image(img, ImageFormat::Png));
  const Raster back = io::load_raster(tmp / "c.png");
  EXPECT_EQ(back.format(), PixelFormat::Gray8);
  EXPECT_EQ(back, img);
}

TEST(LoadRaster, SixteenBitTiffKeepsDepth) {
  TempDir tmp;
  Raster img(33, 17, PixelFormat::Gray16);
  for (std::size_t i = 0; i < img.data16().size(); ++i) img.data16()[i] = static_cast<std::uint16_t>(i * 977 + 3);
  write_file(tmp / "deep.tif", encode_image(img, ImageFormat::Tiff));
  const Raster back = io::load_raster(tmp / "deep.tif");
  EXPECT_EQ(back.format(), PixelFormat::Gray16);
  EXPECT_EQ(back, img);
}

TEST(LoadRaster, TextRenamedTifIsDecodeError) {
  TempDir tmp;
  const std::string text = "this is not an image\n";
  write_file(tmp / "fake.tif", std::vector<std::uint8_t>(text.begin(), text.end()));
  EXPECT_EQ(code_of([&] { io::load_raster(tmp / "fake.tif"); }), Errc::DecodeError);
}

std::vector<std::uint8_t> bmp24(int w, int h, Rgb c) {
  const int stride = (w * 3 + 3) & ~3;
  const std::uint32_t size = 54 + static_cast<std::uint32_t>(stride * h);
  std::vector<std::uint8_t> b(size, 0);
  auto put32 = [&](std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
  };
  b[0] = 'B';
  b[1] = 'M';
  put32(2, size);
  put32(10, 54);
  put32(14, 40);
  put32(18, static_cast<std::uint32_t>(w));
  put32(22, static_cast<std::uint32_t>(h));
  b[26] = 1;
  b[28] = 24;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t at = 54 + static_cast<std::size_t>(y * stride + x * 3);
      b[at] = c.b;
      b[at + 1] = c.g;
      b[at + 2] = c.r;
    }
  return b;
}

TEST(Codecs, DecodesBmp) {
  const Raster img = decode_image(bmp24(5, 3, {10, 20, 30}));
  ASSERT_EQ(img.width(), 5);
  ASSERT_EQ(img.height(), 3);
  EXPECT_EQ(img.pixel(4, 2), (Rgb{10, 20, 30}));
}

TEST(Codecs, SniffingWinsOverExtension) {
  TempDir tmp;
  const Raster img = testing::synthetic_gray8(20, 10, 1);
  write_file(tmp / "really_png.tif", encode_image(img, ImageFormat::Png));
  EXPECT_EQ(io::load_raster(tmp / "really_png.tif"), img);
}

TEST(Codecs, LosslessRoundTrips) {
  Raster rgb(31, 23, PixelFormat::Rgb8);
  std::mt19937 rng(3);
  for (auto& v : rgb.data8()) v = static_cast<std::uint8_t>(rng());
  EXPECT_EQ(decode_image(encode_image(rgb, ImageFormat::Png)), rgb);
  EXPECT_EQ(decode_image(encode_image(rgb, ImageFormat::Tiff)), rgb);
  EncodeOptions lossless;
  lossless.webp_lossless = true;
  EXPECT_EQ(decode_image(encode_image(rgb, ImageFormat::WebP, lossless)), rgb);
}

TEST(LoadEntryImage, CropsJeolAndChecksDimensions) {
  TempDir tmp;
  testing::make_project(tmp.path());
  const io::ProjectIndex index = io::scan_project(tmp.path());
  const Raster sem = io::load_entry_image(index.dir_of("sem1"), *index.find("sem1"));
  EXPECT_EQ(sem.width(), 400);
  EXPECT_EQ(sem.height(), 300);

  io::EntryManifest wrong = *index.find("area1");
  wrong.width = 321;
  EXPECT_EQ(code_of([&] { io::load_entry_image(index.dir_of("area1"), wrong); }), Errc::DimensionMismatch);

  const io::EntryManifest& map = *index.find("map1");
  const Raster si = io::load_layer_raster(index.dir_of("map1"), map, map.layers[2]);
  EXPECT_EQ(si.format(), PixelFormat::Gray16);
  EXPECT_EQ(code_of([&] {
              io::MapLayerRef base{"X", {}, "map1.png", 9, true};
              io::EntryManifest m = map;
              m.width = 128;
              io::load_layer_raster(index.dir_of("map1"), m, base);
            }),
            Errc::DimensionMismatch);
}

}  // namespace
}  // namespace emr
