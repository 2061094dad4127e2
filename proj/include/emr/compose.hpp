#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "emr/annotate.hpp"
#include "emr/calibration.hpp"
#include "emr/kernels.hpp"
#include "emr/project_io.hpp"
#include "emr/raster.hpp"

namespace emr::compose {

enum class IntensityMode { FullScale, MinMax };

/// Per-pixel t in [0, 1]. FullScale divides by 255 or 65535; MinMax stretches
/// the observed range and maps constant layers to 0.
std::vector<float> normalize_intensity(const Raster& layer, IntensityMode mode = IntensityMode::FullScale);

/// Compositor view of a single-channel layer using the same normalisation.
kernels::LayerView make_layer_view(const Raster& layer, Rgb color, bool visible,
                                   IntensityMode mode = IntensityMode::FullScale);

/// Folds layers bottom to top: out = a*color + (1-a)*under, a = opacity * t.
Raster composite_layers(const Raster& base, std::span<const kernels::LayerView> layers, double opacity);

struct LayerSettings {
  std::vector<std::string> order;           // bottom to top; unlisted layers follow in manifest rank
  std::map<std::string, bool> visibility;   // overrides the manifest flag
  bool listed_only = false;                 // hide layers not named in `order`
  bool operator==(const LayerSettings&) const = default;
};

struct PositionSelection {
  enum class Mode { All, None, Ids };
  Mode mode = Mode::All;
  std::set<std::string> ids;
  bool operator==(const PositionSelection&) const = default;
};

struct Background {
  bool solid = false;  // false: electron image
  Rgb color;
  bool operator==(const Background&) const = default;
};

/// Annotation and compositing state. Entry-agnostic so one document can
/// drive a batch; see resolve_layers / resolve_positions.
struct RenderSettings {
  annotate::ScaleBarStyle scale_bar;
  annotate::MarkerStyle marker;
  PositionSelection positions;
  LayerSettings layers;
  double layer_opacity = 0.5;
  Background background;
  IntensityMode intensity = IntensityMode::FullScale;

  bool operator==(const RenderSettings&) const = default;
};

void validate(const RenderSettings& s);

nlohmann::json to_json(const RenderSettings& s);
/// Missing keys keep their defaults; malformed values throw InvalidSettings.
RenderSettings settings_from_json(const nlohmann::json& j);

struct ResolvedLayer {
  std::size_t index = 0;  // into manifest.layers
  bool visible = true;
  bool operator==(const ResolvedLayer&) const = default;
};

/// Concrete bottom-to-top order; always a permutation of the entry's layers.
/// With `strict`, names that the entry does not have are an error.
std::vector<ResolvedLayer> resolve_layers(const io::EntryManifest& m, const LayerSettings& s, bool strict);
std::set<std::string> resolve_positions(const io::EntryManifest& m, const PositionSelection& s, bool strict);

/// Everything stage 0 needs to know about an entry.
struct EntrySource {
  io::EntryManifest manifest;
  std::filesystem::path dir;
  calib::CalibrationModel calibration;
};

EntrySource source_for(const io::ProjectIndex& project, std::string_view id, const calib::CalibrationModel& model);

enum Stage : std::size_t { kBase = 0, kLayers = 1, kMarkers = 2, kScaleBar = 3 };

/// Stage rasters for one entry: base, layer composite, markers, scale bar.
/// A key mismatch at stage k rebuilds k and everything after it.
/// Single writer; stage rasters are immutable once stored.
class RenderCache {
 public:
  using Counters = std::array<std::uint64_t, 4>;

  const Counters& counters() const noexcept { return counters_; }
  void clear();

  std::shared_ptr<const Raster> render(const EntrySource& src, const RenderSettings& settings, bool strict = true);

 private:
  struct Base {
    Raster rgb;
    std::vector<Raster> layers;  // manifest order
  };

  std::optional<std::string> key_[4];
  std::shared_ptr<const Base> base_;
  std::shared_ptr<const Raster> stage_[4];
  Counters counters_{};
};

/// render_entry: incremental render through `cache`.
std::shared_ptr<const Raster> render_entry(const EntrySource& src, const RenderSettings& settings, RenderCache& cache,
                                           bool strict = true);

/// The same composition with no cache, mutating one working raster.
Raster render_uncached(const EntrySource& src, const RenderSettings& settings, bool strict = true);

/// Box-filtered copy whose long edge is at most max_px (no-op if already smaller).
Raster fit_within(const Raster& img, int max_px);

/// Output dimensions for an entry under these settings (data-bar band included).
std::pair<int, int> output_dimensions(const io::EntryManifest& m, const RenderSettings& s,
                                      const calib::CalibrationModel& model);

}  // namespace emr::compose
