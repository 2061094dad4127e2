#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <unordered_set>

#include <omp.h>

#include "emr/export.hpp"

namespace emr::exporter {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::uint8_t> encode_raster(const Raster& img, ImageFormat format, int quality, bool webp_lossless) {
  if (quality < 1 || quality > 100) throw Error(Errc::EncodeError, "quality", "must be in 1..100");
  EncodeOptions opts;
  opts.quality = quality;
  opts.webp_lossless = webp_lossless;
  return encode_image(img, format, opts);
}

json to_json(const ExportJob& job) {
  return {{"entry", job.entry_id},
          {"settings", compose::to_json(job.settings)},
          {"format", std::string(extension_for(job.format))},
          {"quality", job.quality},
          {"webp_lossless", job.webp_lossless},
          {"template", job.name_template.raw()}};
}

ExportJob job_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidSettings, "job", "expected an object");
  ExportJob job;
  auto entry = j.find("entry");
  if (entry == j.end() || !entry->is_string()) throw Error(Errc::InvalidSettings, "entry", "missing entry id");
  job.entry_id = entry->get<std::string>();
  if (auto it = j.find("settings"); it != j.end() && !it->is_null()) job.settings = compose::settings_from_json(*it);
  if (auto it = j.find("format"); it != j.end() && !it->is_null()) {
    auto f = it->is_string() ? parse_image_format(it->get<std::string>()) : std::nullopt;
    if (!f || *f == ImageFormat::Bmp) throw Error(Errc::InvalidSettings, "format", "expected png, jpg, webp or tiff");
    job.format = *f;
  }
  if (auto it = j.find("quality"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<int>() < 1 || it->get<int>() > 100)
      throw Error(Errc::InvalidSettings, "quality", "expected an integer in 1..100");
    job.quality = it->get<int>();
  }
  if (auto it = j.find("webp_lossless"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) throw Error(Errc::InvalidSettings, "webp_lossless", "expected a boolean");
    job.webp_lossless = it->get<bool>();
  }
  if (auto it = j.find("template"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(Errc::InvalidSettings, "template", "expected a string");
    job.name_template = NameTemplate::parse(it->get<std::string>());
  }
  return job;
}

std::size_t BatchReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(outcomes.begin(), outcomes.end(), [](const JobOutcome& o) { return !o.ok(); }));
}

json BatchReport::to_json() const {
  json rows = json::array();
  for (const auto& o : outcomes) {
    json row = {{"index", o.index}, {"entry", o.entry_id}};
    if (o.path)
      row["path"] = o.path->string();
    else
      row["error"] = o.error.value_or("unknown error");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string BatchReport::to_json_lines() const {
  std::string out;
  for (const auto& row : to_json()) out += row.dump() + "\n";
  return out;
}

std::string today_iso_date() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm local{};
  localtime_r(&now, &local);
  char buf[16];
  std::strftime(buf, sizeof buf, "%Y-%m-%d", &local);
  return buf;
}

namespace {

void ensure_writable(const fs::path& dest) {
  std::error_code ec;
  fs::create_directories(dest, ec);
  if (!fs::is_directory(dest, ec)) throw Error(Errc::DestNotWritable, dest.string(), "not a directory");
  const fs::path probe = dest / ".emr-write-probe";
  {
    std::ofstream out(probe, std::ios::binary);
    if (!out) throw Error(Errc::DestNotWritable, dest.string(), "cannot create files");
  }
  fs::remove(probe, ec);
}

std::string with_suffix(const std::string& name, int n) {
  const std::size_t dot = name.rfind('.');
  if (dot == std::string::npos || dot == 0) return name + "-" + std::to_string(n);
  return name.substr(0, dot) + "-" + std::to_string(n) + name.substr(dot);
}

}  // namespace

BatchReport run_batch(const std::vector<ExportJob>& queue, const fs::path& dest_dir, const io::ProjectIndex& project,
                      const BatchOptions& opts) {
  ensure_writable(dest_dir);
  const std::string date = opts.date.empty() ? today_iso_date() : opts.date;

  BatchReport report;
  report.outcomes.resize(queue.size());

  // Names are claimed serially in queue order so the -2, -3 suffixes do not
  // depend on which worker finishes first.
  std::unordered_set<std::string> taken;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    JobOutcome& o = report.outcomes[i];
    o.index = static_cast<int>(i) + 1;
    o.entry_id = queue[i].entry_id;
    const std::string name =
        substitute_name_template(queue[i].name_template, {queue[i].entry_id, o.index, date});
    if (auto problem = validate_filename(name, opts.rules)) {
      o.error = problem->what();
      continue;
    }
    std::string candidate = name;
    std::error_code ec;
    for (int n = 2; taken.count(candidate) || fs::exists(dest_dir / candidate, ec); ++n)
      candidate = with_suffix(name, n);
    if (auto problem = validate_filename(candidate, opts.rules)) {
      o.error = problem->what();
      continue;
    }
    taken.insert(candidate);
    o.path = dest_dir / candidate;
  }

  const int workers = std::max(1, opts.workers > 0 ? opts.workers : omp_get_num_procs());
  const int team = std::max(1, std::min<int>(workers, static_cast<int>(queue.size())));
  const long long n = static_cast<long long>(queue.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
  for (long long i = 0; i < n; ++i) {
    JobOutcome& o = report.outcomes[static_cast<std::size_t>(i)];
    if (!o.path) continue;
    const ExportJob& job = queue[static_cast<std::size_t>(i)];
    try {
      const compose::EntrySource src = compose::source_for(project, job.entry_id, opts.calibration);
      const Raster img = compose::render_uncached(src, job.settings, /*strict=*/false);
      const std::vector<std::uint8_t> bytes = encode_raster(img, job.format, job.quality, job.webp_lossless);
      write_file(*o.path, bytes);
    } catch (const std::exception& e) {
      o.error = e.what();
      o.path.reset();
    }
  }
  return report;
}

}  // namespace emr::exporter
