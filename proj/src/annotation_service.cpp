#include "enrich/annotation_service.hpp"

#include <chrono>

#include <httplib.h>

namespace enrich {

using nlohmann::json;

namespace {

AnnotationService::Response error_response(int status, const std::string& reason) {
  return {status, json{{"error", reason}}.dump()};
}

std::int64_t system_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

AnnotationService::AnnotationService(AnnotationStore& store, Clock clock)
    : store_(store), clock_(clock ? std::move(clock) : Clock(system_now_ms)) {}

AnnotationService::Response AnnotationService::schema() const {
  return {200, schemas_to_json(store_.corpus().schemas).dump()};
}

AnnotationService::Response AnnotationService::next_task(const std::string& annotator) const {
  if (annotator.empty()) return error_response(400, "missing annotator");
  auto rec = store_.next_task(annotator);
  if (!rec) return {204, "", "text/plain"};
  rec->author_name.reset();
  return {200, record_to_json(*rec).dump()};
}

AnnotationService::Response AnnotationService::post_label(const std::string& body) const {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error&) {
    return error_response(400, "body is not valid JSON");
  }
  AnnotationEvent e;
  try {
    e = annotation_event_from_json(j);
  } catch (const ParseError& ex) {
    return error_response(422, ex.what());
  }
  if (!j.contains("timestamp")) e.timestamp_ms = clock_();
  try {
    store_.record_label(e);
  } catch (const LabelRejected& ex) {
    return error_response(422, ex.what());
  }
  return {200, json{{"ok", true}}.dump()};
}

AnnotationService::Response AnnotationService::agreement(const std::string& attribute) const {
  if (attribute.empty()) return error_response(400, "missing attribute");
  if (store_.corpus().schema(attribute) == nullptr) return error_response(422, "unknown attribute: " + attribute);
  AgreementSummary s = agreement_summary(store_, attribute);
  json j = to_json(s);
  if (s.pairs.empty()) j["error"] = "no overlap";
  return {200, j.dump()};
}

AnnotationService::Response AnnotationService::progress(const std::string& annotator) const {
  if (annotator.empty()) return error_response(400, "missing annotator");
  Progress p = store_.progress(annotator);
  return {200, json{{"labeled", p.labeled}, {"total", p.total}}.dump()};
}

void AnnotationService::mount(httplib::Server& server, const std::optional<std::filesystem::path>& static_dir) const {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    if (r.status != 204) res.set_content(r.body, r.content_type);
  };
  server.Get("/api/schema", [this, send](const httplib::Request&, httplib::Response& res) { send(res, schema()); });
  server.Get("/api/tasks/next", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, next_task(req.get_param_value("annotator")));
  });
  server.Post("/api/labels", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, post_label(req.body));
  });
  server.Get("/api/agreement", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, agreement(req.get_param_value("attribute")));
  });
  server.Get("/api/progress", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, progress(req.get_param_value("annotator")));
  });
  if (static_dir) server.set_mount_point("/", static_dir->string());
}

}  // namespace enrich
