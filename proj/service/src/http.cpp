#include <httplib.h>

#include "gesturekit/service.hpp"

namespace gesturekit::service {

void mount(httplib::Server& server, Api& api) {
  auto forward = [&api](const httplib::Request& req, httplib::Response& res) {
    std::multimap<std::string, std::string> query(req.params.begin(), req.params.end());
    const auto r = api.handle(req.method, req.path, req.body, query);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  const std::string pattern = R"(/sessions(/.*)?)";
  server.Get(pattern, forward);
  server.Post(pattern, forward);
  server.Patch(pattern, forward);
  server.Put(pattern, forward);
  server.Delete(pattern, forward);
  // The trainer UI is served from another origin during development.
  server.Options(pattern, [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, PATCH, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
}

}  // namespace gesturekit::service
