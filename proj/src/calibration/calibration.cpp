#include "emr/calibration.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "emr/error.hpp"
#include "emr/image_codec.hpp"

namespace emr::calib {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc{} && r.ptr == s.data() + s.size() && std::isfinite(out);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    out.push_back(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

CalibrationModel default_model() { return {}; }

CalibrationModel fit_pixel_size_model(std::span<const CalibrationSample> samples, bool constrain_exponent,
                                      int reference_width) {
  for (const auto& s : samples)
    if (!(s.magnification > 0) || !(s.pixel_size_um > 0) || !std::isfinite(s.magnification) ||
        !std::isfinite(s.pixel_size_um))
      throw Error(Errc::NonPositiveSample, {}, "magnification and pixel size must be > 0");

  const std::size_t n = samples.size();
  CalibrationModel model;
  model.reference_width = reference_width;

  if (constrain_exponent) {
    if (n < 1) throw Error(Errc::TooFewSamples, {}, "need at least 1 sample");
    double sum = 0;
    for (const auto& s : samples) sum += std::log(s.magnification * s.pixel_size_um);
    const double log_k = sum / static_cast<double>(n);
    double sq = 0;
    for (const auto& s : samples) {
      const double r = std::log(s.pixel_size_um) - (log_k - std::log(s.magnification));
      sq += r * r;
    }
    model.k = std::exp(log_k);
    model.exponent = -1.0;
    model.rms_residual = std::sqrt(sq / static_cast<double>(n));
    return model;
  }

  std::set<double> mags;
  for (const auto& s : samples) mags.insert(s.magnification);
  if (n < 2 || mags.size() < 2) throw Error(Errc::TooFewSamples, {}, "need at least 2 distinct magnifications");

  double mx = 0, my = 0;
  for (const auto& s : samples) {
    mx += std::log(s.magnification);
    my += std::log(s.pixel_size_um);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (const auto& s : samples) {
    const double dx = std::log(s.magnification) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(s.pixel_size_um) - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sq = 0;
  for (const auto& s : samples) {
    const double r = std::log(s.pixel_size_um) - (intercept + slope * std::log(s.magnification));
    sq += r * r;
  }
  model.k = std::exp(intercept);
  model.exponent = slope;
  model.rms_residual = std::sqrt(sq / static_cast<double>(n));
  return model;
}

double pixel_size_at(const CalibrationModel& model, double magnification, double width_px) {
  if (!(magnification > 0) || !std::isfinite(magnification))
    throw Error(Errc::BadMagnification, {}, "magnification must be > 0");
  if (!(width_px >= 1)) throw Error(Errc::BadValue, "width_px", "width must be >= 1");
  return model.k * std::pow(magnification, model.exponent) * (static_cast<double>(model.reference_width) / width_px);
}

FieldOfView field_of_view(const CalibrationModel& model, double magnification, double width_px, double height_px) {
  const double ps = pixel_size_at(model, magnification, width_px);
  if (!(height_px > 0)) throw Error(Errc::BadValue, "height_px", "height must be > 0");
  FieldOfView f;
  f.x_um = width_px * ps;
  f.y_um = height_px * ps;
  f.diagonal_um = std::hypot(f.x_um, f.y_um);
  return f;
}

std::vector<CalibrationSample> parse_calibration_csv(std::string_view text, int reference_width) {
  std::vector<CalibrationSample> out;
  const auto lines = split(text, '\n');
  bool header_seen = false;
  bool has_width = false;
  int line_no = 0;
  for (std::string_view raw : lines) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split(line, ',');
    if (!header_seen) {
      if (cols.size() < 2 || trim(cols[0]) != "magnification" || trim(cols[1]) != "pixel_size_um" ||
          (cols.size() == 3 && trim(cols[2]) != "width_px") || cols.size() > 3)
        throw Error(Errc::SyntaxError, "line " + std::to_string(line_no),
                    "expected header magnification,pixel_size_um[,width_px]");
      has_width = cols.size() == 3;
      header_seen = true;
      continue;
    }
    if (cols.size() != (has_width ? 3u : 2u))
      throw Error(Errc::SyntaxError, "line " + std::to_string(line_no), "wrong column count");
    CalibrationSample s;
    double width = reference_width;
    if (!parse_double(cols[0], s.magnification) || !parse_double(cols[1], s.pixel_size_um) ||
        (has_width && !parse_double(cols[2], width)))
      throw Error(Errc::BadValue, "line " + std::to_string(line_no), "not a number");
    if (!(s.magnification > 0) || !(s.pixel_size_um > 0) || !(width >= 1))
      throw Error(Errc::NonPositiveSample, "line " + std::to_string(line_no));
    s.pixel_size_um *= width / static_cast<double>(reference_width);
    out.push_back(s);
  }
  if (!header_seen) throw Error(Errc::SyntaxError, "line 1", "empty calibration file");
  return out;
}

std::string serialize_model(const CalibrationModel& m) {
  std::ostringstream os;
  os << "K=" << format_double(m.k) << "\n"
     << "b=" << format_double(m.exponent) << "\n"
     << "reference_width=" << m.reference_width << "\n"
     << "rms_residual=" << format_double(m.rms_residual) << "\n";
  return os.str();
}

CalibrationModel parse_model(std::string_view text) {
  CalibrationModel m;
  bool have_k = false, have_b = false;
  for (std::string_view raw : split(text, '\n')) {
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::SyntaxError, std::string(line), "expected KEY=VALUE");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = line.substr(eq + 1);
    double v = 0;
    if (!parse_double(value, v)) throw Error(Errc::BadValue, std::string(key));
    if (key == "K") {
      if (!(v > 0)) throw Error(Errc::BadValue, "K", "must be > 0");
      m.k = v;
      have_k = true;
    } else if (key == "b") {
      m.exponent = v;
      have_b = true;
    } else if (key == "reference_width") {
      if (v < 1 || v != std::floor(v)) throw Error(Errc::BadValue, "reference_width");
      m.reference_width = static_cast<int>(v);
    } else if (key == "rms_residual") {
      m.rms_residual = v;
    }
  }
  if (!have_k) throw Error(Errc::MissingKey, "K");
  if (!have_b) throw Error(Errc::MissingKey, "b");
  return m;
}

CalibrationModel load_model(const std::filesystem::path& path) {
  const auto raw = read_file(path);
  return parse_model(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
}

void save_model(const CalibrationModel& model, const std::filesystem::path& path) {
  const std::string s = serialize_model(model);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

}  // namespace emr::calib
