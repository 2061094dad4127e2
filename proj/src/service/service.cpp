#include "emr/service.hpp"

#include <algorithm>
#include <charconv>

#include <json.hpp>

#include "emr/error.hpp"
#include "emr/version.hpp"

namespace emr::service {

using nlohmann::json;

namespace {

Response json_response(int status, const json& body) {
  Response r;
  r.status = status;
  r.body = body.dump();
  return r;
}

Response error_response(int status, const std::string& message) {
  return json_response(status, {{"error", message}});
}

int status_for(const Error& e) {
  switch (e.code()) {
    case Errc::UnknownEntry: return 404;
    case Errc::InvalidSettings:
    case Errc::UnknownPositionId:
    case Errc::BarTooWide:
    case Errc::LayoutOverflow:
    case Errc::UnbalancedBrace:
    case Errc::UnknownVariable:
    case Errc::DirNotFound:
    case Errc::NotAProject:
    case Errc::DestNotWritable:
    case Errc::BadValue:
      return 400;
    default: return 500;
  }
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(Errc::InvalidSettings, "body", e.what());
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start < path.size()) {
    std::size_t end = path.find('/', start);
    if (end == std::string::npos) end = path.size();
    if (end > start) parts.push_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

json summary(const io::EntryManifest& m) {
  json layers = json::array();
  for (const auto& l : m.layers) layers.push_back(l.element);
  return {{"id", m.id},
          {"kind", std::string(io::to_string(m.kind))},
          {"magnification", m.magnification},
          {"width", m.width},
          {"height", m.height},
          {"positions", m.positions.size()},
          {"layers", std::move(layers)}};
}

std::optional<int> parse_int(const std::string& s) {
  int v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string counters_header(const compose::RenderCache::Counters& c) {
  return std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]) + "," + std::to_string(c[3]);
}

}  // namespace

std::vector<std::uint8_t> preview_png(const compose::EntrySource& src, const compose::RenderSettings& settings,
                                      compose::RenderCache& cache, std::optional<int> max_px) {
  const std::shared_ptr<const Raster> img = compose::render_entry(src, settings, cache);
  if (max_px) return encode_image(compose::fit_within(*img, *max_px), ImageFormat::Png);
  return encode_image(*img, ImageFormat::Png);
}

Session::Session(SessionOptions opts) : opts_(std::move(opts)) {}

Response handle_request(Session& session, const std::string& method, const std::string& path,
                        const std::string& body) {
  Request req;
  req.method = method;
  const std::size_t q = path.find('?');
  req.path = path.substr(0, q);
  if (q != std::string::npos) {
    std::string rest = path.substr(q + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      std::size_t end = rest.find('&', start);
      if (end == std::string::npos) end = rest.size();
      const std::string kv = rest.substr(start, end - start);
      const std::size_t eq = kv.find('=');
      if (!kv.empty()) req.query[kv.substr(0, eq)] = eq == std::string::npos ? "" : kv.substr(eq + 1);
      start = end + 1;
    }
  }
  req.body = body;
  return session.handle(req);
}

Response Session::handle(const Request& req) {
  const std::vector<std::string> parts = split_path(req.path);
  try {
    if (parts.size() < 2 || parts[0] != "api") return error_response(404, "no such endpoint");
    const std::string& what = parts[1];
    const std::string& m = req.method;
    if (what == "version" && parts.size() == 2 && m == "GET") return json_response(200, {{"version", kVersion}});
    if (what == "project" && parts.size() == 2 && m == "POST") return open_project(req);
    if (what == "entries") {
      if (parts.size() == 2 && m == "GET") return list_entries();
      if (parts.size() == 3 && m == "GET") return get_entry(parts[2]);
      if (parts.size() == 4 && parts[3] == "preview" && m == "POST") return preview(parts[2], req);
    }
    if (what == "queue") {
      if (parts.size() == 2 && m == "GET") return get_queue();
      if (parts.size() == 2 && m == "POST") return append_queue(req);
      if (parts.size() == 2 && m == "DELETE") return clear_queue();
      if (parts.size() == 3 && m == "DELETE") return remove_from_queue(parts[2]);
    }
    if (what == "export" && parts.size() == 2 && m == "POST") return run_export(req);
    return error_response(404, "no such endpoint");
  } catch (const Error& e) {
    return error_response(status_for(e), e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

Response Session::open_project(const Request& req) {
  const json body = parse_body(req.body);
  auto dir = body.find("dir");
  if (dir == body.end() || !dir->is_string()) return error_response(400, "body must be {\"dir\": <path>}");
  auto index = std::make_shared<const io::ProjectIndex>(io::scan_project(dir->get<std::string>()));
  {
    std::unique_lock lock(state_mutex_);
    project_ = index;
    queue_.clear();
    std::lock_guard caches(caches_mutex_);
    caches_.clear();
  }
  json entries = json::array();
  for (const auto& e : index->entries) entries.push_back(summary(e));
  return json_response(200, {{"dir", index->root.string()}, {"entries", entries}, {"warnings", index->warnings}});
}

Response Session::list_entries() {
  std::shared_lock lock(state_mutex_);
  if (!project_) return error_response(409, "no project opened");
  json entries = json::array();
  for (const auto& e : project_->entries) entries.push_back(summary(e));
  return json_response(200, {{"entries", entries}});
}

Response Session::get_entry(const std::string& id) {
  std::shared_lock lock(state_mutex_);
  if (!project_) return error_response(409, "no project opened");
  const io::EntryManifest* m = project_->find(id);
  if (!m) return error_response(404, "unknown entry '" + id + "'");
  return json_response(200, json::parse(io::serialize_entry_manifest(*m)));
}

std::shared_ptr<Session::EntryCache> Session::cache_for(const std::string& id) {
  std::lock_guard lock(caches_mutex_);
  auto& slot = caches_[id];
  if (!slot) slot = std::make_shared<EntryCache>();
  return slot;
}

Response Session::preview(const std::string& id, const Request& req) {
  std::shared_ptr<const io::ProjectIndex> project;
  {
    std::shared_lock lock(state_mutex_);
    project = project_;
  }
  if (!project) return error_response(409, "no project opened");
  if (!project->find(id)) return error_response(404, "unknown entry '" + id + "'");

  const compose::RenderSettings settings = compose::settings_from_json(parse_body(req.body));
  std::optional<int> max_px;
  if (auto it = req.query.find("max_px"); it != req.query.end()) {
    max_px = parse_int(it->second);
    if (!max_px || *max_px < 1) return error_response(400, "max_px must be a positive integer");
  }
  const compose::EntrySource src = compose::source_for(*project, id, opts_.calibration);
  const std::shared_ptr<EntryCache> entry = cache_for(id);

  std::lock_guard lock(entry->mutex);
  const compose::RenderCache::Counters before = entry->cache.counters();
  Response r;
  try {
    const std::vector<std::uint8_t> png = preview_png(src, settings, entry->cache, max_px);
    r.body.assign(png.begin(), png.end());
  } catch (const Error& e) {
    const int status = status_for(e);
    return error_response(status == 404 ? 500 : status, e.what());
  }
  compose::RenderCache::Counters delta{};
  for (std::size_t k = 0; k < delta.size(); ++k) delta[k] = entry->cache.counters()[k] - before[k];
  r.content_type = "image/png";
  r.headers["X-Render-Stages"] = counters_header(delta);
  r.headers["X-Render-Counters"] = counters_header(entry->cache.counters());
  return r;
}

Response Session::get_queue() {
  std::shared_lock lock(state_mutex_);
  json jobs = json::array();
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    json j = exporter::to_json(queue_[i]);
    j["position"] = i;
    jobs.push_back(std::move(j));
  }
  return json_response(200, {{"jobs", jobs}});
}

Response Session::append_queue(const Request& req) {
  const json body = parse_body(req.body);
  std::vector<exporter::ExportJob> jobs;
  if (auto it = body.find("jobs"); it != body.end()) {
    if (!it->is_array()) return error_response(400, "jobs must be an array");
    for (const json& j : *it) jobs.push_back(exporter::job_from_json(j));
  } else {
    jobs.push_back(exporter::job_from_json(body));
  }
  std::unique_lock lock(state_mutex_);
  if (!project_) return error_response(409, "no project opened");
  for (const auto& job : jobs)
    if (!project_->find(job.entry_id)) return error_response(404, "unknown entry '" + job.entry_id + "'");
  json positions = json::array();
  for (auto& job : jobs) {
    positions.push_back(queue_.size());
    queue_.push_back(std::move(job));
  }
  return json_response(201, {{"positions", positions}, {"length", queue_.size()}});
}

Response Session::remove_from_queue(const std::string& position) {
  const std::optional<int> pos = parse_int(position);
  std::unique_lock lock(state_mutex_);
  if (!pos || *pos < 0 || static_cast<std::size_t>(*pos) >= queue_.size())
    return error_response(404, "no queue position '" + position + "'");
  queue_.erase(queue_.begin() + *pos);
  return json_response(200, {{"length", queue_.size()}});
}

Response Session::clear_queue() {
  std::unique_lock lock(state_mutex_);
  queue_.clear();
  return json_response(200, {{"length", 0}});
}

Response Session::run_export(const Request& req) {
  const json body = parse_body(req.body);
  auto dest = body.find("dest");
  if (dest == body.end() || !dest->is_string()) return error_response(400, "body must include \"dest\"");

  std::shared_ptr<const io::ProjectIndex> project;
  std::vector<exporter::ExportJob> jobs;
  {
    std::shared_lock lock(state_mutex_);
    project = project_;
    jobs = queue_;
  }
  if (!project) return error_response(409, "no project opened");
  if (auto it = body.find("jobs"); it != body.end()) {
    if (!it->is_array()) return error_response(400, "jobs must be an array");
    jobs.clear();
    for (const json& j : *it) jobs.push_back(exporter::job_from_json(j));
  }
  if (auto it = body.find("template"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) return error_response(400, "template must be a string");
    const exporter::NameTemplate t = exporter::NameTemplate::parse(it->get<std::string>());
    for (auto& j : jobs) j.name_template = t;
  }
  exporter::BatchOptions opts;
  opts.workers = opts_.workers;
  opts.date = opts_.date;
  opts.calibration = opts_.calibration;
  const exporter::BatchReport report = exporter::run_batch(jobs, dest->get<std::string>(), *project, opts);
  if (body.value("clear", false)) {
    std::unique_lock lock(state_mutex_);
    queue_.clear();
  }
  return json_response(200, {{"report", report.to_json()}, {"failures", report.failures()}});
}

}  // namespace emr::service
