#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emr::calib {

/// Pixel size measured at one magnification, expressed at the model's
/// reference width.
struct CalibrationSample {
  double magnification = 0;
  double pixel_size_um = 0;
};

/// pixel_size(mag, width) = k * mag^exponent * reference_width / width
struct CalibrationModel {
  double k = 116.73;
  double exponent = -1.0;
  int reference_width = 1024;
  double rms_residual = 0.0;  // log space; 0 for hand-entered models

  bool operator==(const CalibrationModel&) const = default;
};

/// The lab default shipped with the tool.
CalibrationModel default_model();

/// Least-squares fit of log(pixel_size) = log k + exponent * log(mag).
/// With `constrain_exponent` the exponent is fixed at -1 and k is the
/// geometric mean of mag * pixel_size.
CalibrationModel fit_pixel_size_model(std::span<const CalibrationSample> samples, bool constrain_exponent = false,
                                      int reference_width = 1024);

double pixel_size_at(const CalibrationModel& model, double magnification, double width_px);

struct FieldOfView {
  double x_um = 0;
  double y_um = 0;
  double diagonal_um = 0;
};

/// Extents may be fractional (e.g. a mapped area that is not a whole number
/// of pixels tall).
FieldOfView field_of_view(const CalibrationModel& model, double magnification, double width_px, double height_px);

/// `magnification,pixel_size_um[,width_px]` with a header row. Samples are
/// rescaled to `reference_width`.
std::vector<CalibrationSample> parse_calibration_csv(std::string_view text, int reference_width = 1024);

std::string serialize_model(const CalibrationModel& model);
CalibrationModel parse_model(std::string_view text);
CalibrationModel load_model(const std::filesystem::path& path);
void save_model(const CalibrationModel& model, const std::filesystem::path& path);

}  // namespace emr::calib
