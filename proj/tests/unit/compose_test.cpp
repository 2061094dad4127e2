#include <gtest/gtest.h>

#include <random>

#include "edits.hpp"
#include "emr/compose.hpp"
#include "emr/error.hpp"
#include "fixtures.hpp"

namespace emr {
namespace {

using compose::RenderSettings;

Raster solid_rgb(int w, int h, Rgb c) {
  Raster r(w, h, PixelFormat::Rgb8);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) r.set_pixel(x, y, c);
  return r;
}

Raster solid_gray(int w, int h, std::uint8_t v) {
  Raster r(w, h, PixelFormat::Gray8);
  for (auto& s : r.data8()) s = v;
  return r;
}

RenderSettings bare() {
  RenderSettings s;
  s.scale_bar.enabled = false;
  s.positions.mode = compose::PositionSelection::Mode::None;
  return s;
}

TEST(Normalize, FullScaleAndMinMax) {
  const auto ones = compose::normalize_intensity(solid_gray(3, 3, 255));
  for (float t : ones) EXPECT_EQ(t, 1.0f);

  Raster g16(1, 1, PixelFormat::Gray16);
  g16.data16()[0] = 32768;
  EXPECT_NEAR(compose::normalize_intensity(g16)[0], 0.5, 1e-5);

  const auto flat = compose::normalize_intensity(solid_gray(4, 2, 77), compose::IntensityMode::MinMax);
  for (float t : flat) EXPECT_EQ(t, 0.0f);
}

TEST(Composite, OpacityZeroIsIdentity) {
  const Raster base = solid_rgb(8, 8, {10, 200, 30});
  const Raster layer = solid_gray(8, 8, 255);
  const kernels::LayerView v = compose::make_layer_view(layer, {255, 0, 0}, true);
  EXPECT_EQ(compose::composite_layers(base, std::span(&v, 1), 0.0), base);
}

TEST(Composite, RedHalfOverGray) {
  const Raster base = solid_rgb(4, 4, {128, 128, 128});
  const Raster layer = solid_gray(4, 4, 255);
  const kernels::LayerView v = compose::make_layer_view(layer, {255, 0, 0}, true);
  EXPECT_EQ(compose::composite_layers(base, std::span(&v, 1), 0.5).pixel(2, 2), (Rgb{192, 64, 64}));
}

TEST(Composite, OrderMatters) {
  const Raster base = solid_rgb(2, 2, {0, 0, 0});
  const Raster layer = solid_gray(2, 2, 255);
  const kernels::LayerView red = compose::make_layer_view(layer, {255, 0, 0}, true);
  const kernels::LayerView green = compose::make_layer_view(layer, {0, 255, 0}, true);
  const kernels::LayerView rg[] = {red, green};
  const kernels::LayerView gr[] = {green, red};
  EXPECT_EQ(compose::composite_layers(base, rg, 0.5).pixel(0, 0), (Rgb{64, 128, 0}));
  EXPECT_EQ(compose::composite_layers(base, gr, 0.5).pixel(0, 0), (Rgb{128, 64, 0}));
}

TEST(Composite, DisjointReorderIsNoOp) {
  const Raster base = solid_rgb(100, 50, {90, 90, 90});
  const Raster a = testing::disk_layer(100, 50, 20, 25, 15);
  const Raster b = testing::disk_layer(100, 50, 75, 25, 15);
  const kernels::LayerView va = compose::make_layer_view(a, {255, 0, 0}, true);
  const kernels::LayerView vb = compose::make_layer_view(b, {0, 0, 255}, true);
  const kernels::LayerView ab[] = {va, vb};
  const kernels::LayerView ba[] = {vb, va};
  EXPECT_EQ(compose::composite_layers(base, ab, 0.7), compose::composite_layers(base, ba, 0.7));
}

TEST(Composite, ValidatesInputs) {
  const Raster base = solid_rgb(4, 4, {});
  const Raster small = solid_gray(3, 4, 1);
  const kernels::LayerView v = compose::make_layer_view(small, {255, 0, 0}, true);
  EXPECT_THROW(compose::composite_layers(base, std::span(&v, 1), 0.5), Error);
}

TEST(Settings, JsonRoundTrip) {
  std::mt19937 rng(5);
  RenderSettings s;
  for (int i = 0; i < 200; ++i) {
    testing::random_edit(s, rng);
    EXPECT_EQ(compose::settings_from_json(compose::to_json(s)), s);
  }
}

TEST(Settings, RejectsBadValues) {
  EXPECT_THROW(compose::settings_from_json(nlohmann::json{{"opacity", 2}}), Error);
  EXPECT_THROW(compose::settings_from_json(nlohmann::json{{"scale_bar", {{"position", "middle"}}}}), Error);
  EXPECT_THROW(compose::settings_from_json(nlohmann::json{{"background", "#12"}}), Error);
  EXPECT_THROW(compose::settings_from_json(nlohmann::json{{"layers", {{"order", {"Fe", "Fe"}}}}}), Error);
}

TEST(ResolveLayers, PermutationOfEntryLayers) {
  testing::TempDir tmp;
  testing::make_project(tmp.path());
  const io::ProjectIndex index = io::scan_project(tmp.path());
  const io::EntryManifest& m = *index.find("map1");
  compose::LayerSettings ls;
  ls.order = {"Si", "Fe"};
  auto r = compose::resolve_layers(m, ls, true);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].index, 2u);
  EXPECT_EQ(r[1].index, 0u);
  EXPECT_EQ(r[2].index, 1u);
  ls.listed_only = true;
  r = compose::resolve_layers(m, ls, true);
  EXPECT_FALSE(r[2].visible);
  ls.order = {"Zn"};
  EXPECT_THROW(compose::resolve_layers(m, ls, true), Error);
  EXPECT_NO_THROW(compose::resolve_layers(m, ls, false));
}

class RenderFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    testing::make_project(tmp_.path());
    index_ = io::scan_project(tmp_.path());
  }
  compose::EntrySource source(const std::string& id) const {
    return compose::source_for(index_, id, calib::default_model());
  }

  testing::TempDir tmp_;
  io::ProjectIndex index_;
};

TEST_F(RenderFixture, ColdCacheRunsEveryStage) {
  compose::RenderCache cache;
  compose::render_entry(source("map1"), RenderSettings{}, cache);
  EXPECT_EQ(cache.counters(), (compose::RenderCache::Counters{1, 1, 1, 1}));
  compose::render_entry(source("map1"), RenderSettings{}, cache);
  EXPECT_EQ(cache.counters(), (compose::RenderCache::Counters{1, 1, 1, 1}));
}

TEST_F(RenderFixture, ScaleBarMoveOnlyRedrawsBar) {
  compose::RenderCache cache;
  RenderSettings s;
  const Raster first = *compose::render_entry(source("area1"), s, cache);
  s.scale_bar.position = annotate::ScaleBarPosition::ImageTopLeft;
  const Raster second = *compose::render_entry(source("area1"), s, cache);
  EXPECT_EQ(cache.counters(), (compose::RenderCache::Counters{1, 1, 1, 2}));

  const auto& m = *index_.find("area1");
  const double ps = calib::pixel_size_at(calib::default_model(), m.magnification, m.width);
  const auto la = annotate::layout_scale_bar(m.width, m.height, RenderSettings{}.scale_bar, ps);
  const auto lb = annotate::layout_scale_bar(m.width, m.height, s.scale_bar, ps);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (first.pixel(x, y) != second.pixel(x, y))
        ASSERT_TRUE(la.background_rect.contains(x, y) || lb.background_rect.contains(x, y)) << x << "," << y;
}

TEST_F(RenderFixture, OpacityZeroWithoutAnnotationsIsBase) {
  RenderSettings s = bare();
  s.layer_opacity = 0;
  const Raster out = compose::render_uncached(source("map1"), s);
  const Raster base = io::load_entry_image(index_.dir_of("map1"), *index_.find("map1"));
  ASSERT_EQ(out.width(), base.width());
  for (int y = 0; y < base.height(); ++y)
    for (int x = 0; x < base.width(); ++x) {
      const std::uint8_t v = base.row8(y)[x];
      ASSERT_EQ(out.pixel(x, y), (Rgb{v, v, v}));
    }
}

TEST_F(RenderFixture, IncrementalMatchesUncached) {
  std::mt19937 rng(2024);
  const compose::EntrySource src = source("map1");
  compose::RenderCache cache;
  RenderSettings s;
  compose::render_entry(src, s, cache);
  for (int i = 0; i < 60; ++i) {
    const RenderSettings before = s;
    testing::random_edit(s, rng);
    const auto counters = cache.counters();
    const Raster incremental = *compose::render_entry(src, s, cache, false);
    ASSERT_EQ(incremental, compose::render_uncached(src, s, false)) << compose::to_json(s).dump();
    const std::size_t first = testing::first_changed_stage(src.manifest, before, s);
    for (std::size_t k = 0; k < 4; ++k)
      ASSERT_EQ(cache.counters()[k] - counters[k], k >= first ? 1u : 0u) << "stage " << k << " step " << i;
  }
}

TEST_F(RenderFixture, FailedRenderLeavesCacheConsistent) {
  compose::RenderCache cache;
  RenderSettings s;
  compose::render_entry(source("area1"), s, cache);
  s.scale_bar.fixed_length_um = 1e6;
  EXPECT_THROW(compose::render_entry(source("area1"), s, cache), Error);
  s.scale_bar.fixed_length_um.reset();
  const Raster again = *compose::render_entry(source("area1"), s, cache);
  EXPECT_EQ(again, compose::render_uncached(source("area1"), s));
}

TEST_F(RenderFixture, OutputDimensionsIncludeDataBar) {
  RenderSettings s;
  s.scale_bar.position = annotate::ScaleBarPosition::BarBelowLeft;
  const auto& m = *index_.find("sem1");
  const auto [w, h] = compose::output_dimensions(m, s, calib::default_model());
  const Raster out = compose::render_uncached(source("sem1"), s);
  EXPECT_EQ(out.width(), w);
  EXPECT_EQ(out.height(), h);
  EXPECT_GT(h, m.height);
}

TEST(FitWithin, CapsLongEdge) {
  const Raster img = solid_rgb(400, 100, {1, 2, 3});
  const Raster small = compose::fit_within(img, 200);
  EXPECT_EQ(small.width(), 200);
  EXPECT_EQ(small.height(), 50);
  EXPECT_EQ(small.pixel(10, 10), (Rgb{1, 2, 3}));
  EXPECT_EQ(compose::fit_within(img, 1000), img);
}

}  // namespace
}  // namespace emr
