// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "emr/kernels.hpp"

namespace {

using emr::PixelFormat;
using emr::Raster;
namespace serial = emr::kernels::serial;
namespace omp = emr::kernels::omp;

Raster noise(int n, PixelFormat fmt, unsigned seed) {
  Raster r(n, n, fmt);
  std::mt19937 rng(seed);
  if (fmt == PixelFormat::Gray16)
    for (auto& v : r.data16()) v = static_cast<std::uint16_t>(rng());
  else
    for (auto& v : r.data8()) v = static_cast<std::uint8_t>(rng());
  return r;
}

template <bool Parallel>
void BM_Composite(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Raster l0 = noise(n, PixelFormat::Gray8, 1), l1 = noise(n, PixelFormat::Gray8, 2),
               l2 = noise(n, PixelFormat::Gray16, 3);
  const std::vector<emr::kernels::LayerView> views = {{&l0, {255, 0, 0}, 0, 1 / 255.0f, true},
                                                      {&l1, {0, 255, 0}, 0, 1 / 255.0f, true},
                                                      {&l2, {0, 0, 255}, 0, 1 / 65535.0f, true}};
  const Raster base = noise(n, PixelFormat::Rgb8, 4);
  for (auto _ : state) {
    Raster canvas = base;
    if constexpr (Parallel)
      omp::composite(canvas, views, 0.5f);
    else
      serial::composite(canvas, views, 0.5f);
    benchmark::DoNotOptimize(canvas.data8().data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <bool Parallel>
void BM_GrayToRgb(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Raster src = noise(n, PixelFormat::Gray8, 5);
  Raster dst(n, n, PixelFormat::Rgb8);
  for (auto _ : state) {
    if constexpr (Parallel)
      omp::gray8_to_rgb(src, dst);
    else
      serial::gray8_to_rgb(src, dst);
    benchmark::DoNotOptimize(dst.data8().data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <bool Parallel>
void BM_BlendRect(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Raster img = noise(n, PixelFormat::Rgb8, 6);
  for (auto _ : state) {
    if constexpr (Parallel)
      omp::blend_rect(img, {0, 0, n, n}, {255, 255, 255}, 0.5f);
    else
      serial::blend_rect(img, {0, 0, n, n}, {255, 255, 255}, 0.5f);
    benchmark::DoNotOptimize(img.data8().data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <bool Parallel>
void BM_Downscale(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Raster src = noise(n, PixelFormat::Rgb8, 7);
  Raster dst(n / 3, n / 3, PixelFormat::Rgb8);
  for (auto _ : state) {
    if constexpr (Parallel)
      omp::downscale_box(src, dst);
    else
      serial::downscale_box(src, dst);
    benchmark::DoNotOptimize(dst.data8().data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <bool Parallel>
void BM_MinMax(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Raster src = noise(n, PixelFormat::Gray16, 8);
  for (auto _ : state) {
    auto r = Parallel ? omp::minmax(src) : serial::minmax(src);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

#define EMR_PAIR(fn)                                                                  \
  BENCHMARK(fn<false>)->Name(#fn "/serial")->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond); \
  BENCHMARK(fn<true>)->Name(#fn "/omp")->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond)

EMR_PAIR(BM_Composite);
EMR_PAIR(BM_GrayToRgb);
EMR_PAIR(BM_BlendRect);
EMR_PAIR(BM_Downscale);
EMR_PAIR(BM_MinMax);

}  // namespace

BENCHMARK_MAIN();
