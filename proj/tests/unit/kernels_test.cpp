#include <gtest/gtest.h>
#include <omp.h>

#include <random>
#include <vector>

#include "emr/kernels.hpp"

namespace emr {
namespace {

Raster random_raster(int w, int h, PixelFormat fmt, unsigned seed) {
  Raster r(w, h, fmt);
  std::mt19937 rng(seed);
  if (fmt == PixelFormat::Gray16) {
    for (auto& v : r.data16()) v = static_cast<std::uint16_t>(rng());
  } else {
    for (auto& v : r.data8()) v = static_cast<std::uint8_t>(rng());
  }
  return r;
}

class KernelParity : public ::testing::Test {
 protected:
  void SetUp() override { omp_set_num_threads(4); }
};

TEST_F(KernelParity, GrayToRgb) {
  const Raster g8 = random_raster(97, 61, PixelFormat::Gray8, 1);
  Raster a(97, 61, PixelFormat::Rgb8), b(97, 61, PixelFormat::Rgb8);
  kernels::serial::gray8_to_rgb(g8, a);
  kernels::omp::gray8_to_rgb(g8, b);
  EXPECT_EQ(a, b);

  const Raster g16 = random_raster(97, 61, PixelFormat::Gray16, 2);
  kernels::serial::gray16_window_to_rgb(g16, 1000, 60000, a);
  kernels::omp::gray16_window_to_rgb(g16, 1000, 60000, b);
  EXPECT_EQ(a, b);
}

TEST_F(KernelParity, MinMax) {
  const Raster g16 = random_raster(300, 200, PixelFormat::Gray16, 3);
  EXPECT_EQ(kernels::serial::minmax(g16), kernels::omp::minmax(g16));
  const Raster g8 = random_raster(300, 200, PixelFormat::Gray8, 4);
  EXPECT_EQ(kernels::serial::minmax(g8), kernels::omp::minmax(g8));
}

TEST_F(KernelParity, Composite) {
  const Raster l0 = random_raster(128, 77, PixelFormat::Gray8, 5);
  const Raster l1 = random_raster(128, 77, PixelFormat::Gray16, 6);
  const Raster l2 = random_raster(128, 77, PixelFormat::Gray8, 7);
  std::vector<kernels::LayerView> views = {
      {&l0, {255, 0, 0}, 0.0f, 1.0f / 255.0f, true},
      {&l1, {0, 255, 0}, 1000.0f, 1.0f / 40000.0f, true},
      {&l2, {0, 0, 255}, 0.0f, 1.0f / 255.0f, false},
  };
  for (float opacity : {0.0f, 0.3f, 0.5f, 1.0f}) {
    Raster a = random_raster(128, 77, PixelFormat::Rgb8, 8);
    Raster b = a;
    kernels::serial::composite(a, views, opacity);
    kernels::omp::composite(b, views, opacity);
    EXPECT_EQ(a, b) << "opacity " << opacity;
  }
}

TEST_F(KernelParity, BlendRect) {
  Raster a = random_raster(200, 100, PixelFormat::Rgb8, 9);
  Raster b = a;
  kernels::serial::blend_rect(a, {-5, 10, 120, 200}, {255, 255, 255}, 0.37f);
  kernels::omp::blend_rect(b, {-5, 10, 120, 200}, {255, 255, 255}, 0.37f);
  EXPECT_EQ(a, b);
}

TEST_F(KernelParity, DownscaleBox) {
  const Raster src = random_raster(333, 211, PixelFormat::Rgb8, 10);
  Raster a(100, 63, PixelFormat::Rgb8), b(100, 63, PixelFormat::Rgb8);
  kernels::serial::downscale_box(src, a);
  kernels::omp::downscale_box(src, b);
  EXPECT_EQ(a, b);
}

TEST(Quantize, RoundsHalfUpAndClamps) {
  EXPECT_EQ(kernels::quantize(-3.0f), 0);
  EXPECT_EQ(kernels::quantize(177.5f), 178);
  EXPECT_EQ(kernels::quantize(177.49f), 177);
  EXPECT_EQ(kernels::quantize(300.0f), 255);
}

TEST(BlendRect, WhiteHalfOverGray100Gives178) {
  Raster img(10, 10, PixelFormat::Rgb8);
  for (auto& v : img.data8()) v = 100;
  kernels::serial::blend_rect(img, {2, 2, 4, 4}, {255, 255, 255}, 0.5f);
  EXPECT_EQ(img.pixel(3, 3), (Rgb{178, 178, 178}));
  EXPECT_EQ(img.pixel(0, 0), (Rgb{100, 100, 100}));
}

}  // namespace
}  // namespace emr
