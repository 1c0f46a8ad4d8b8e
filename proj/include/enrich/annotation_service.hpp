#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "enrich/annotation.hpp"

namespace httplib {
class Server;
}

namespace enrich {

// HTTP surface of the annotation store, consumed by the browser UI:
//
//   GET  /api/schema                     schema sidecar JSON
//   GET  /api/tasks/next?annotator=ID    record JSON, or 204 when done
//   POST /api/labels                     {item_id, annotator, attribute, value} -> 200 | 422 {error}
//   GET  /api/agreement?attribute=A      agreement summary JSON
//   GET  /api/progress?annotator=ID      {labeled, total}
//
// Handlers are plain functions of the request so they can be tested without
// a socket; mount() wires them into an httplib::Server.
class AnnotationService {
 public:
  struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
  };

  using Clock = std::function<std::int64_t()>;  // epoch milliseconds

  explicit AnnotationService(AnnotationStore& store, Clock clock = {});

  Response schema() const;
  Response next_task(const std::string& annotator) const;
  Response post_label(const std::string& body) const;
  Response agreement(const std::string& attribute) const;
  Response progress(const std::string& annotator) const;

  // Registers the API routes; serves `static_dir` at "/" when given.
  void mount(httplib::Server& server, const std::optional<std::filesystem::path>& static_dir = std::nullopt) const;

 private:
  AnnotationStore& store_;
  Clock clock_;
};

}  // namespace enrich
