#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "emr/calibration.hpp"
#include "emr/compose.hpp"
#include "emr/export.hpp"
#include "emr/project_io.hpp"

namespace emr::service {

inline constexpr int kDefaultPort = 8537;

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

/// Renders through `cache` and encodes PNG, optionally capped to `max_px` on
/// the long edge. The CLI `preview` command and the preview endpoint share it.
std::vector<std::uint8_t> preview_png(const compose::EntrySource& src, const compose::RenderSettings& settings,
                                      compose::RenderCache& cache, std::optional<int> max_px);

struct SessionOptions {
  calib::CalibrationModel calibration = calib::default_model();
  int workers = 0;
  std::string date;  // frozen {date}; empty: today
};

/// Open project, per-entry render caches and the processing queue.
/// Project and queue edits take an exclusive lock; each entry cache has its
/// own mutex so previews of distinct entries run concurrently.
class Session {
 public:
  explicit Session(SessionOptions opts = {});

  Response handle(const Request& req);

 private:
  struct EntryCache {
    std::mutex mutex;
    compose::RenderCache cache;
  };

  Response open_project(const Request& req);
  Response list_entries();
  Response get_entry(const std::string& id);
  Response preview(const std::string& id, const Request& req);
  Response get_queue();
  Response append_queue(const Request& req);
  Response remove_from_queue(const std::string& position);
  Response clear_queue();
  Response run_export(const Request& req);

  std::shared_ptr<EntryCache> cache_for(const std::string& id);

  SessionOptions opts_;
  std::shared_mutex state_mutex_;
  std::shared_ptr<const io::ProjectIndex> project_;
  std::vector<exporter::ExportJob> queue_;
  std::mutex caches_mutex_;
  std::map<std::string, std::shared_ptr<EntryCache>> caches_;
};

/// handle_request: dispatch one request against a session.
Response handle_request(Session& session, const std::string& method, const std::string& path,
                        const std::string& body);

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = kDefaultPort;  // 0: pick a free port
  std::optional<std::filesystem::path> static_dir;
};

/// Blocks until `stop` is called. `on_ready` receives the bound port and a
/// stop function.
void serve(Session& session, const ServeOptions& opts,
           const std::function<void(int port, std::function<void()> stop)>& on_ready = {});

}  // namespace emr::service
