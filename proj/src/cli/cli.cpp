#include "emr/cli.hpp"

#include <csignal>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "emr/calibration.hpp"
#include "emr/compose.hpp"
#include "emr/error.hpp"
#include "emr/export.hpp"
#include "emr/project_io.hpp"
#include "emr/service.hpp"
#include "emr/version.hpp"

namespace emr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flag values that fail validation; always reported before any file is touched.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::DirNotFound:
    case Errc::IoError:
    case Errc::DestNotWritable:
    case Errc::EncodeError:
      return kIo;
    case Errc::InvalidSettings:
    case Errc::UnbalancedBrace:
    case Errc::UnknownVariable:
    case Errc::UnknownEntry:
    case Errc::UnknownPositionId:
      return kUsage;
    default:
      return kFormat;
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw UsageError("empty item in list '" + s + "'");
    out.push_back(item);
  }
  return out;
}

double parse_number(const std::string& s, const std::string& flag) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw UsageError(flag + ": expected a number, got '" + s + "'");
  return v;
}

std::string read_text(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

/// Style flags shared by export and preview; empty strings mean "not given".
struct StyleFlags {
  std::string settings_file;
  std::string scalebar;
  std::string scalebar_pos;
  std::string opacity;
  std::string layers;
  std::string positions;
  std::string marker;
  std::string background;
  std::string bar_height;
  std::string font_size;
  std::string font_color;
  std::string bar_background;
  std::string bar_opacity;
  bool text_above = false;
  std::string intensity;
  std::string calibration;

  void add_to(CLI::App& app) {
    app.add_option("--settings", settings_file, "RenderSettings JSON document (same schema as the service)");
    app.add_option("--scalebar", scalebar, "auto | <length in um> | none");
    app.add_option("--scalebar-pos", scalebar_pos, "scale-bar position, e.g. image-bottom-right");
    app.add_option("--opacity", opacity, "X-ray map layer opacity in [0, 1]");
    app.add_option("--layers", layers, "visible layers, bottom to top: Fe,K,...");
    app.add_option("--positions", positions, "all | none | id,id,...");
    app.add_option("--marker", marker, "<shape>:<color>:<pct>");
    app.add_option("--background", background, "image | #RRGGBB");
    app.add_option("--bar-height", bar_height, "bar height, % of text height");
    app.add_option("--font-size", font_size, "text height, % of image height");
    app.add_option("--font-color", font_color, "black | white");
    app.add_option("--bar-background", bar_background, "none | black | white");
    app.add_option("--bar-opacity", bar_opacity, "scale-bar background opacity in [0, 1]");
    app.add_flag("--text-above", text_above, "label above the bar");
    app.add_option("--intensity", intensity, "full | minmax");
    app.add_option("--calibration", calibration, "saved calibration model");
  }

  /// Settings from the file (format errors) overlaid with flags (usage errors).
  compose::RenderSettings build() const {
    json doc = compose::to_json(compose::RenderSettings{});
    if (!settings_file.empty()) {
      const std::string text = read_text(settings_file);
      json parsed;
      try {
        parsed = json::parse(text);
      } catch (const json::parse_error& e) {
        throw Error(Errc::SyntaxError, settings_file, e.what());
      }
      try {
        doc = compose::to_json(compose::settings_from_json(parsed));
      } catch (const Error& e) {
        throw Error(Errc::BadValue, settings_file, e.what());
      }
    }
    json& sb = doc["scale_bar"];
    if (!scalebar.empty()) {
      if (scalebar == "none") {
        sb["enabled"] = false;
      } else {
        sb["enabled"] = true;
        if (scalebar == "auto")
          sb["length"] = "auto";
        else
          sb["length"] = parse_number(scalebar, "--scalebar");
      }
    }
    if (!scalebar_pos.empty()) sb["position"] = scalebar_pos;
    if (!bar_height.empty()) sb["bar_height_pct"] = parse_number(bar_height, "--bar-height");
    if (!font_size.empty()) sb["font_size_pct"] = parse_number(font_size, "--font-size");
    if (!font_color.empty()) sb["font_color"] = font_color;
    if (!bar_background.empty()) sb["background"] = bar_background;
    if (!bar_opacity.empty()) sb["background_opacity"] = parse_number(bar_opacity, "--bar-opacity");
    if (text_above) sb["text_above_bar"] = true;
    if (!opacity.empty()) doc["opacity"] = parse_number(opacity, "--opacity");
    if (!layers.empty()) doc["layers"] = {{"order", split_list(layers)}, {"visible", json::object()}, {"listed_only", true}};
    if (!positions.empty()) {
      if (positions == "all" || positions == "none")
        doc["positions"] = positions;
      else
        doc["positions"] = split_list(positions);
    }
    if (!marker.empty()) {
      const std::vector<std::string> parts = split_list(marker.find(':') == std::string::npos ? marker : [&] {
        std::string m = marker;
        std::replace(m.begin(), m.end(), ':', ',');
        return m;
      }());
      if (parts.empty() || parts.size() > 3) throw UsageError("--marker: expected <shape>:<color>:<pct>");
      doc["marker"]["shape"] = parts[0];
      if (parts.size() > 1) doc["marker"]["color"] = parts[1];
      if (parts.size() > 2) doc["marker"]["size_pct"] = parse_number(parts[2], "--marker");
    }
    if (!background.empty()) doc["background"] = background;
    if (!intensity.empty()) doc["intensity"] = intensity;
    try {
      return compose::settings_from_json(doc);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }

  calib::CalibrationModel model() const {
    return calibration.empty() ? calib::default_model() : calib::load_model(calibration);
  }
};

int cmd_list(const std::string& dir, std::ostream& out, std::ostream& err) {
  const io::ProjectIndex project = io::scan_project(dir);
  for (const auto& w : project.warnings) err << "warning: " << w << "\n";
  for (const auto& e : project.entries)
    out << e.id << "\t" << io::to_string(e.kind) << "\t" << e.magnification << "\t" << e.width << "x" << e.height
        << "\n";
  return kOk;
}

int cmd_calibrate(const std::string& csv, bool constrain, int ref_width, const std::string& save, std::ostream& out) {
  const std::vector<calib::CalibrationSample> samples = calib::parse_calibration_csv(read_text(csv), ref_width);
  const calib::CalibrationModel model = calib::fit_pixel_size_model(samples, constrain, ref_width);
  char line[160];
  std::snprintf(line, sizeof line, "K=%.2f b=%.3f rms_residual=%.3g\n", model.k, model.exponent, model.rms_residual);
  out << line;
  if (!save.empty()) calib::save_model(model, save);
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Electron-microscopy image annotation and export", "emr"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string project_dir;

  auto* list = app.add_subcommand("list", "list project entries");
  list->add_option("project", project_dir, "project directory")->required();

  std::string csv, save;
  bool constrain = false;
  int ref_width = 1024;
  auto* calibrate = app.add_subcommand("calibrate", "fit the pixel-size model to measured samples");
  calibrate->add_option("--csv", csv, "magnification,pixel_size_um[,width_px]")->required();
  calibrate->add_flag("--constrain-b", constrain, "fix the exponent at -1");
  calibrate->add_option("--reference-width", ref_width, "reference width in pixels")->check(CLI::PositiveNumber);
  calibrate->add_option("--save", save, "write the fitted model");

  StyleFlags style;
  std::string entries, tmpl, format = "png", out_dir, date;
  int quality = 90, workers = 0;
  bool lossless = false;
  auto* exp = app.add_subcommand("export", "render entries at native resolution and write files");
  exp->add_option("project", project_dir, "project directory")->required();
  exp->add_option("--entries", entries, "entry ids in queue order (default: all)");
  exp->add_option("--template", tmpl, "file name template; default {name}.<ext>");
  exp->add_option("--format", format, "png | jpg | webp | tiff");
  exp->add_option("--quality", quality, "JPEG/WebP quality")->check(CLI::Range(1, 100));
  exp->add_flag("--lossless", lossless, "lossless WebP");
  exp->add_option("--out", out_dir, "destination directory (default: <project>/export)");
  exp->add_option("--date", date, "value of {date} (YYYY-MM-DD)");
  exp->add_option("--workers", workers, "parallel jobs; 0 uses every core")->check(CLI::NonNegativeNumber);
  style.add_to(*exp);

  std::string entry_id, preview_out;
  int max_px = 0;
  auto* prev = app.add_subcommand("preview", "render one entry to PNG through the preview path");
  prev->add_option("project", project_dir, "project directory")->required();
  prev->add_option("entry", entry_id, "entry id")->required();
  prev->add_option("--out", preview_out, "output PNG")->required();
  prev->add_option("--max-px", max_px, "cap the long edge")->check(CLI::PositiveNumber);
  style.add_to(*prev);

  service::ServeOptions serve_opts;
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "start the local HTTP service");
  serve->add_option("--port", serve_opts.port, "TCP port on 127.0.0.1 (0 picks one)")->check(CLI::Range(0, 65535));
  serve->add_option("--static", static_dir, "directory served at /");
  serve->add_option("--project", project_dir, "project opened at startup");
  serve->add_option("--workers", workers, "export parallelism")->check(CLI::NonNegativeNumber);
  serve->add_option("--date", date, "value of {date}");
  serve->add_option("--calibration", style.calibration, "saved calibration model");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*list) return cmd_list(project_dir, out, err);
    if (*calibrate) return cmd_calibrate(csv, constrain, ref_width, save, out);

    if (*exp) {
      const auto fmt = parse_image_format(format);
      if (!fmt || *fmt == ImageFormat::Bmp) throw UsageError("--format: expected png, jpg, webp or tiff");
      const compose::RenderSettings settings = style.build();
      const exporter::NameTemplate name_template =
          exporter::NameTemplate::parse(tmpl.empty() ? "{name}." + std::string(extension_for(*fmt)) : tmpl);
      const calib::CalibrationModel model = style.model();
      const io::ProjectIndex project = io::scan_project(project_dir);
      for (const auto& w : project.warnings) err << "warning: " << w << "\n";

      std::vector<std::string> ids;
      if (entries.empty()) {
        for (const auto& e : project.entries) ids.push_back(e.id);
      } else {
        ids = split_list(entries);
        for (const auto& id : ids)
          if (!project.find(id)) throw UsageError("--entries: unknown entry '" + id + "'");
      }
      std::vector<exporter::ExportJob> jobs;
      for (const auto& id : ids) {
        exporter::ExportJob job;
        job.entry_id = id;
        job.settings = settings;
        job.format = *fmt;
        job.quality = quality;
        job.webp_lossless = lossless;
        job.name_template = name_template;
        jobs.push_back(std::move(job));
      }
      exporter::BatchOptions opts;
      opts.workers = workers;
      opts.date = date;
      opts.calibration = model;
      const fs::path dest = out_dir.empty() ? fs::path(project_dir) / "export" : fs::path(out_dir);
      const exporter::BatchReport report = exporter::run_batch(jobs, dest, project, opts);
      out << report.to_json_lines();
      for (const auto& o : report.outcomes)
        if (o.error) err << "job " << o.index << " (" << o.entry_id << "): " << *o.error << "\n";
      return report.failures() == 0 ? kOk : kPartial;
    }

    if (*prev) {
      const compose::RenderSettings settings = style.build();
      const calib::CalibrationModel model = style.model();
      const io::ProjectIndex project = io::scan_project(project_dir);
      if (!project.find(entry_id)) throw UsageError("unknown entry '" + entry_id + "'");
      compose::RenderCache cache;
      const std::vector<std::uint8_t> png = service::preview_png(
          compose::source_for(project, entry_id, model), settings, cache,
          max_px > 0 ? std::optional<int>(max_px) : std::nullopt);
      write_file(preview_out, png);
      return kOk;
    }

    if (*serve) {
      service::SessionOptions sopts;
      sopts.calibration = style.model();
      sopts.workers = workers;
      sopts.date = date;
      if (!static_dir.empty()) serve_opts.static_dir = static_dir;
      service::Session session(sopts);
      if (!project_dir.empty()) {
        const service::Response r =
            service::handle_request(session, "POST", "/api/project", json{{"dir", project_dir}}.dump());
        if (r.status != 200) throw Error(Errc::DirNotFound, project_dir, json::parse(r.body).value("error", ""));
      }
      service::serve(session, serve_opts, [&out](int port, std::function<void()>) {
        out << "listening on http://127.0.0.1:" << port << "\n" << std::flush;
      });
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}

}  // namespace emr::cli
