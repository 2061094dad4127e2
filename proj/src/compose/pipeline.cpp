#include <algorithm>
#include <cmath>
#include <sstream>

#include "emr/compose.hpp"
#include "emr/error.hpp"

namespace emr::compose {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<float> normalize_intensity(const Raster& layer, IntensityMode mode) {
  const kernels::LayerView view = make_layer_view(layer, {}, true, mode);
  std::vector<float> t(layer.sample_count());
  for (int y = 0; y < layer.height(); ++y)
    for (int x = 0; x < layer.width(); ++x) {
      const float s = layer.format() == PixelFormat::Gray16 ? static_cast<float>(layer.row16(y)[x])
                                                            : static_cast<float>(layer.row8(y)[x]);
      t[static_cast<std::size_t>(y) * layer.width() + x] = std::clamp((s - view.offset) * view.scale, 0.0f, 1.0f);
    }
  return t;
}

kernels::LayerView make_layer_view(const Raster& layer, Rgb color, bool visible, IntensityMode mode) {
  if (!is_single_channel(layer.format())) throw Error(Errc::NotSingleChannel, {}, "intensity layers are single-channel");
  kernels::LayerView v;
  v.samples = &layer;
  v.color = color;
  v.visible = visible;
  if (mode == IntensityMode::FullScale) {
    v.offset = 0.0f;
    v.scale = 1.0f / kernels::max_representable(layer.format());
  } else {
    const auto [lo, hi] = kernels::omp::minmax(layer);
    v.offset = static_cast<float>(lo);
    v.scale = hi > lo ? 1.0f / static_cast<float>(hi - lo) : 0.0f;
  }
  return v;
}

Raster composite_layers(const Raster& base, std::span<const kernels::LayerView> layers, double opacity) {
  if (base.format() != PixelFormat::Rgb8) throw Error(Errc::UnsupportedPixelFormat, {}, "base must be Rgb8");
  if (!(opacity >= 0 && opacity <= 1)) throw Error(Errc::InvalidSettings, "opacity", "must be in [0, 1]");
  for (const auto& l : layers) {
    if (!l.samples || !is_single_channel(l.samples->format())) throw Error(Errc::NotSingleChannel, {});
    if (l.samples->width() != base.width() || l.samples->height() != base.height())
      throw Error(Errc::DimensionMismatch, {}, "layer does not match base dimensions");
  }
  Raster out = base;
  kernels::omp::composite(out, layers, static_cast<float>(opacity));
  return out;
}

EntrySource source_for(const io::ProjectIndex& project, std::string_view id, const calib::CalibrationModel& model) {
  const io::EntryManifest* m = project.find(id);
  if (!m) throw Error(Errc::UnknownEntry, std::string(id));
  return {*m, project.dir_of(id), model};
}

namespace {

Raster to_display_rgb(const Raster& img) {
  Raster rgb(img.width(), img.height(), PixelFormat::Rgb8);
  switch (img.format()) {
    case PixelFormat::Rgb8: return img;
    case PixelFormat::Gray8: kernels::omp::gray8_to_rgb(img, rgb); break;
    case PixelFormat::Gray16: {
      const auto [lo, hi] = kernels::omp::minmax(img);
      kernels::omp::gray16_window_to_rgb(img, lo, hi, rgb);
      break;
    }
  }
  return rgb;
}

std::string file_stamp(const fs::path& p) {
  std::error_code ec;
  const auto size = fs::file_size(p, ec);
  const auto time = fs::last_write_time(p, ec);
  std::ostringstream os;
  os << p.string() << ':' << (ec ? 0 : size) << ':' << (ec ? 0 : time.time_since_epoch().count());
  return os.str();
}

std::string base_key(const EntrySource& src) {
  std::string key = src.dir.string() + "\n" + io::serialize_entry_manifest(src.manifest);
  const fs::path image = src.dir / src.manifest.image;
  key += file_stamp(image);
  if (src.manifest.kind == io::EntryKind::JeolImage) key += file_stamp(io::sidecar_path_for(image));
  for (const auto& l : src.manifest.layers) key += file_stamp(src.dir / l.file);
  return key;
}

struct Resolved {
  std::vector<ResolvedLayer> layers;
  std::set<std::string> positions;
};

Resolved resolve(const EntrySource& src, const RenderSettings& s, bool strict) {
  validate(s);
  return {resolve_layers(src.manifest, s.layers, strict), resolve_positions(src.manifest, s.positions, strict)};
}

std::string layers_key(const Resolved& r, const RenderSettings& s) {
  json j = {{"opacity", s.layer_opacity},
            {"background", s.background.solid ? io::format_hex_color(s.background.color) : "image"},
            {"intensity", static_cast<int>(s.intensity)}};
  for (const auto& l : r.layers) j["layers"].push_back({l.index, l.visible});
  return j.dump();
}

std::string markers_key(const Resolved& r, const RenderSettings& s) {
  return json({{"marker", to_json(s)["marker"]}, {"enabled", r.positions}}).dump();
}

std::string scale_bar_key(const EntrySource& src, const RenderSettings& s) {
  return json({{"scale_bar", to_json(s)["scale_bar"]},
               {"k", src.calibration.k},
               {"b", src.calibration.exponent},
               {"ref", src.calibration.reference_width},
               {"mag", src.manifest.magnification}})
      .dump();
}

// Stage bodies shared by the cached and uncached paths.

void apply_layers(Raster& canvas, const std::vector<Raster>& layer_rasters, const EntrySource& src,
                  const Resolved& r, const RenderSettings& s) {
  if (s.background.solid) {
    for (std::size_t i = 0; i < canvas.sample_count(); i += 3) {
      canvas.data8()[i] = s.background.color.r;
      canvas.data8()[i + 1] = s.background.color.g;
      canvas.data8()[i + 2] = s.background.color.b;
    }
  }
  std::vector<kernels::LayerView> views;
  for (const ResolvedLayer& l : r.layers)
    views.push_back(make_layer_view(layer_rasters[l.index], src.manifest.layers[l.index].color, l.visible, s.intensity));
  kernels::omp::composite(canvas, views, static_cast<float>(s.layer_opacity));
}

void apply_markers(Raster& canvas, const EntrySource& src, const Resolved& r, const RenderSettings& s) {
  if (r.positions.empty()) return;
  annotate::draw_markers_in_place(canvas, src.manifest.positions, s.marker, r.positions);
}

void apply_scale_bar(Raster& canvas, const EntrySource& src, const RenderSettings& s) {
  if (!s.scale_bar.enabled) return;
  const double ps = calib::pixel_size_at(src.calibration, src.manifest.magnification, canvas.width());
  const auto layout = annotate::layout_scale_bar(canvas.width(), canvas.height(), s.scale_bar, ps);
  annotate::draw_scale_bar_in_place(canvas, layout, s.scale_bar);
}

std::vector<Raster> load_layers(const EntrySource& src) {
  std::vector<Raster> out;
  out.reserve(src.manifest.layers.size());
  for (const auto& l : src.manifest.layers) out.push_back(io::load_layer_raster(src.dir, src.manifest, l));
  return out;
}

}  // namespace

void RenderCache::clear() {
  for (auto& k : key_) k.reset();
  for (auto& s : stage_) s.reset();
  base_.reset();
}

std::shared_ptr<const Raster> RenderCache::render(const EntrySource& src, const RenderSettings& settings,
                                                  bool strict) {
  const Resolved r = resolve(src, settings, strict);
  const std::string keys[4] = {base_key(src), layers_key(r, settings), markers_key(r, settings),
                               scale_bar_key(src, settings)};
  std::size_t first = 4;
  for (std::size_t k = 0; k < 4; ++k)
    if (!key_[k] || *key_[k] != keys[k]) {
      first = k;
      break;
    }

  try {
    for (std::size_t k = first; k < 4; ++k) {
      key_[k].reset();
      switch (k) {
        case kBase: {
          auto base = std::make_shared<Base>();
          base->rgb = to_display_rgb(io::load_entry_image(src.dir, src.manifest));
          base->layers = load_layers(src);
          base_ = base;
          stage_[kBase] = std::shared_ptr<const Raster>(base_, &base_->rgb);
          break;
        }
        case kLayers: {
          auto canvas = std::make_shared<Raster>(*stage_[kBase]);
          apply_layers(*canvas, base_->layers, src, r, settings);
          stage_[kLayers] = std::move(canvas);
          break;
        }
        case kMarkers: {
          if (r.positions.empty()) {
            stage_[kMarkers] = stage_[kLayers];
          } else {
            auto canvas = std::make_shared<Raster>(*stage_[kLayers]);
            apply_markers(*canvas, src, r, settings);
            stage_[kMarkers] = std::move(canvas);
          }
          break;
        }
        case kScaleBar: {
          if (!settings.scale_bar.enabled) {
            stage_[kScaleBar] = stage_[kMarkers];
          } else {
            auto canvas = std::make_shared<Raster>(*stage_[kMarkers]);
            apply_scale_bar(*canvas, src, settings);
            stage_[kScaleBar] = std::move(canvas);
          }
          break;
        }
        default: break;
      }
      key_[k] = keys[k];
      ++counters_[k];
    }
  } catch (...) {
    // Leave no stage whose predecessors are stale.
    for (std::size_t k = first; k < 4; ++k) {
      key_[k].reset();
      stage_[k].reset();
    }
    throw;
  }
  return stage_[kScaleBar];
}

std::shared_ptr<const Raster> render_entry(const EntrySource& src, const RenderSettings& settings, RenderCache& cache,
                                           bool strict) {
  return cache.render(src, settings, strict);
}

Raster render_uncached(const EntrySource& src, const RenderSettings& settings, bool strict) {
  const Resolved r = resolve(src, settings, strict);
  Raster canvas = to_display_rgb(io::load_entry_image(src.dir, src.manifest));
  {
    const std::vector<Raster> layers = load_layers(src);
    apply_layers(canvas, layers, src, r, settings);
  }
  apply_markers(canvas, src, r, settings);
  apply_scale_bar(canvas, src, settings);
  return canvas;
}

Raster fit_within(const Raster& img, int max_px) {
  if (max_px < 1) throw Error(Errc::BadValue, "max_px", "must be >= 1");
  const int long_edge = std::max(img.width(), img.height());
  if (long_edge <= max_px) return img;
  const double scale = static_cast<double>(max_px) / long_edge;
  const int w = std::max(1, static_cast<int>(std::lround(img.width() * scale)));
  const int h = std::max(1, static_cast<int>(std::lround(img.height() * scale)));
  Raster out(w, h, img.format());
  if (img.format() == PixelFormat::Gray16) throw Error(Errc::UnsupportedPixelFormat, {}, "preview needs 8-bit");
  kernels::omp::downscale_box(img, out);
  return out;
}

std::pair<int, int> output_dimensions(const io::EntryManifest& m, const RenderSettings& s,
                                      const calib::CalibrationModel& model) {
  if (!s.scale_bar.enabled || !annotate::is_data_bar(s.scale_bar.position)) return {m.width, m.height};
  const double ps = calib::pixel_size_at(model, m.magnification, m.width);
  const auto layout = annotate::layout_scale_bar(m.width, m.height, s.scale_bar, ps);
  return {m.width, m.height + layout.extends_canvas};
}

}  // namespace emr::compose
