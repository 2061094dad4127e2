#pragma once

#include <filesystem>
#include <string>

#include "emr/project_io.hpp"
#include "emr/raster.hpp"

namespace emr::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Deterministic gray8 gradient with a few bright disks.
Raster synthetic_gray8(int w, int h, unsigned seed);
/// Single-channel layer with one filled disk of the given peak.
Raster disk_layer(int w, int h, double cx, double cy, double r, PixelFormat fmt = PixelFormat::Gray8);

void write_entry(const std::filesystem::path& entry_dir, const io::EntryManifest& m);

/// Three entries:
///   area1  point_id, 320x240 PNG, positions p1 (point), p2 (rect), p3 (circle)
///   map1   spectral_image, 256x192 PNG, layers Fe/K/Si (Si is 16-bit TIFF), positions s1..s3
///   sem1   jeol_image, 400x340 TIFF with a 40-row footer, sidecar .txt
void make_project(const std::filesystem::path& dir);

/// One spectral entry of the given size with `layers` disk layers and one point.
void make_large_entry(const std::filesystem::path& dir, const std::string& id, int w, int h, int layers);

}  // namespace emr::testing
