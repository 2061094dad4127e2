#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "emr/calibration.hpp"
#include "emr/compose.hpp"
#include "emr/error.hpp"
#include "emr/image_codec.hpp"
#include "emr/project_io.hpp"

namespace emr::exporter {

/// Literal text with {name}, {index} and {date} variables.
class NameTemplate {
 public:
  /// Throws UnbalancedBrace or UnknownVariable.
  static NameTemplate parse(std::string_view raw);

  const std::string& raw() const noexcept { return raw_; }

  struct Piece {
    bool variable = false;
    std::string text;  // literal text, or the variable name
    bool operator==(const Piece&) const = default;
  };
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }

  bool operator==(const NameTemplate& o) const { return raw_ == o.raw_; }

 private:
  std::string raw_;
  std::vector<Piece> pieces_;
};

struct TemplateVars {
  std::string name;
  int index = 1;
  std::string date;  // YYYY-MM-DD
};

/// Single pass; substituted values are never re-scanned.
std::string substitute_name_template(const NameTemplate& t, const TemplateVars& vars);

struct OsFilenameRules {
  std::set<char> forbidden;
  bool forbid_control_chars = false;
  bool forbid_trailing_dot_space = false;
  std::size_t max_length = 255;  // bytes per path component
  std::set<std::string> reserved;  // compared case-insensitively, extension ignored
  bool reserved_ignores_extension = false;

  static OsFilenameRules windows();
  static OsFilenameRules posix();
  static OsFilenameRules host();
};

/// Empty when the name is acceptable.
std::optional<Error> validate_filename(std::string_view name, const OsFilenameRules& rules);

std::vector<std::uint8_t> encode_raster(const Raster& img, ImageFormat format, int quality = 90,
                                        bool webp_lossless = false);

struct ExportJob {
  std::string entry_id;
  compose::RenderSettings settings;
  ImageFormat format = ImageFormat::Png;
  int quality = 90;
  bool webp_lossless = false;
  NameTemplate name_template = NameTemplate::parse("{name}.png");
};

nlohmann::json to_json(const ExportJob& job);
ExportJob job_from_json(const nlohmann::json& j);

struct JobOutcome {
  int index = 0;  // 1-based queue position
  std::string entry_id;
  std::optional<std::filesystem::path> path;
  std::optional<std::string> error;

  bool ok() const noexcept { return path.has_value(); }
};

struct BatchReport {
  std::vector<JobOutcome> outcomes;  // queue order

  std::size_t failures() const;
  /// One JSON object per line: {index, entry, path} or {index, entry, error}.
  std::string to_json_lines() const;
  nlohmann::json to_json() const;
};

struct BatchOptions {
  int workers = 0;  // 0: logical CPU count
  std::string date;  // {date}; empty: today (local time)
  OsFilenameRules rules = OsFilenameRules::host();
  calib::CalibrationModel calibration = calib::default_model();
};

std::string today_iso_date();

/// Runs every job; a failing job never aborts the batch. Throws
/// DestNotWritable when dest_dir cannot be created or written.
BatchReport run_batch(const std::vector<ExportJob>& queue, const std::filesystem::path& dest_dir,
                      const io::ProjectIndex& project, const BatchOptions& opts = {});

}  // namespace emr::exporter
