#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "emr/image_codec.hpp"
#include "emr/raster.hpp"

namespace emr::io {

enum class EntryKind { PointId, SpectralImage, Linescan, JeolImage };

std::string_view to_string(EntryKind k);
std::optional<EntryKind> parse_entry_kind(std::string_view s);

struct Point2 {
  double x = 0;
  double y = 0;
  bool operator==(const Point2&) const = default;
};

struct PointShape {
  double x = 0, y = 0;
  bool operator==(const PointShape&) const = default;
};
struct RectShape {
  double x = 0, y = 0, w = 0, h = 0;
  bool operator==(const RectShape&) const = default;
};
struct CircleShape {
  double cx = 0, cy = 0, r = 0;
  bool operator==(const CircleShape&) const = default;
};
struct PolygonShape {
  std::vector<Point2> vertices;
  bool operator==(const PolygonShape&) const = default;
};
struct LineShape {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  bool operator==(const LineShape&) const = default;
};

using Shape = std::variant<PointShape, RectShape, CircleShape, PolygonShape, LineShape>;

/// A spectrum acquisition location, in pixels of the acquired resolution.
struct SpectrumPosition {
  std::string id;
  Shape shape;
  bool operator==(const SpectrumPosition&) const = default;
};

struct MapLayerRef {
  std::string element;
  Rgb color;
  std::string file;
  int order = 0;
  bool visible = true;
  bool operator==(const MapLayerRef&) const = default;
};

struct EntryManifest {
  std::string id;
  EntryKind kind = EntryKind::PointId;
  double magnification = 1.0;
  std::string image;
  int width = 0;
  int height = 0;
  std::vector<SpectrumPosition> positions;
  std::vector<MapLayerRef> layers;
  std::optional<std::string> date;

  bool operator==(const EntryManifest&) const = default;
};

struct JeolSidecar {
  double magnification = 0;
  int full_width = 0;
  int full_height = 0;
  int data_width = 0;
  int data_height = 0;
  bool operator==(const JeolSidecar&) const = default;
};

struct ProjectIndex {
  std::filesystem::path root;
  std::vector<EntryManifest> entries;  // sorted by id
  std::vector<std::filesystem::path> dirs;  // entry directory, parallel to entries
  std::vector<std::string> warnings;

  const EntryManifest* find(std::string_view id) const;
  std::filesystem::path dir_of(std::string_view id) const;
};

/// Parses an `entry.json` document. Unknown keys are ignored.
EntryManifest parse_entry_manifest(std::string_view text);
std::string serialize_entry_manifest(const EntryManifest& m);

/// Parses the line-oriented KEY=VALUE JEOL sidecar.
JeolSidecar parse_jeol_sidecar(std::string_view text);

/// Rows [0, data_height) of a full-frame JEOL image.
Raster crop_jeol_footer(const Raster& img, const JeolSidecar& sc);

Raster load_raster(const std::filesystem::path& path, std::optional<ImageFormat> hint = std::nullopt);

/// Scans `<dir>/<entry-id>/entry.json`. Invalid entries become warnings.
ProjectIndex scan_project(const std::filesystem::path& dir);

/// Sidecar path for a JEOL image reference: same stem, `.txt`.
std::filesystem::path sidecar_path_for(const std::filesystem::path& image);

/// Loads the entry's base image at acquired resolution (JEOL footer removed).
Raster load_entry_image(const std::filesystem::path& entry_dir, const EntryManifest& m);

/// Loads one map layer; must be single-channel at the acquired dimensions.
Raster load_layer_raster(const std::filesystem::path& entry_dir, const EntryManifest& m, const MapLayerRef& layer);

Rgb parse_hex_color(std::string_view s);
std::string format_hex_color(Rgb c);

}  // namespace emr::io
