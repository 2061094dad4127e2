#include <httplib.h>

#include "emr/service.hpp"

namespace emr::service {

namespace {

void adapt(Session& session, const httplib::Request& in, httplib::Response& out) {
  Request req;
  req.method = in.method;
  req.path = in.path;
  for (const auto& [k, v] : in.params) req.query[k] = v;
  req.body = in.body;
  const Response r = session.handle(req);
  out.status = r.status;
  for (const auto& [k, v] : r.headers) out.set_header(k, v);
  out.set_content(r.body, r.content_type);
}

}  // namespace

void serve(Session& session, const ServeOptions& opts,
           const std::function<void(int port, std::function<void()> stop)>& on_ready) {
  httplib::Server server;
  auto handler = [&session](const httplib::Request& in, httplib::Response& out) { adapt(session, in, out); };
  server.Get(R"(/api/.*)", handler);
  server.Post(R"(/api/.*)", handler);
  server.Delete(R"(/api/.*)", handler);
  if (opts.static_dir && !server.set_mount_point("/", opts.static_dir->string()))
    throw std::runtime_error("static directory not found: " + opts.static_dir->string());

  int port = opts.port;
  if (port == 0) {
    port = server.bind_to_any_port(opts.host);
  } else if (!server.bind_to_port(opts.host, port)) {
    port = -1;
  }
  if (port < 0) throw std::runtime_error("cannot bind " + opts.host + ":" + std::to_string(opts.port));
  if (on_ready) on_ready(port, [&server] { server.stop(); });
  server.listen_after_bind();
}

}  // namespace emr::service
