#include "nlx/service.hpp"

#include <httplib.h>

#include "nlx/json_io.hpp"
#include "nlx/taxonomy.hpp"

namespace nlx {

namespace {

constexpr const char* kQ1 = "Does the explanation fit the gold label?";
constexpr const char* kQ2 = "Does the explanation fit the taxonomy?";

json category_json(const TaxonomyCategory& c) {
  return {{"index", c.index},
          {"id", std::string(to_string(c.id))},
          {"name", std::string(c.name)},
          {"group", c.group == ReasoningGroup::text_based ? "text_based" : "world_knowledge"},
          {"question", std::string(c.question)},
          {"check", std::string(c.check)},
          {"description", std::string(c.description)}};
}

json taxonomy_json() {
  json out = json::array();
  for (const auto& c : taxonomy()) out.push_back(category_json(c));
  return out;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
  send_json(res, status, {{"error", kind}, {"message", message}});
}

std::string annotator_of(const httplib::Request& req) {
  if (req.has_param("annotator")) return req.get_param_value("annotator");
  return req.get_header_value("X-Annotator-Id");
}

json task_json(const AnnotationStore& store, TaskMode mode, const std::string& expl_id) {
  const Explanation& e = *store.corpus().find_explanation(expl_id);
  const NliItem& item = store.corpus().item(e.item_id);
  json t{{"mode", mode == TaskMode::annotate ? "annotate" : "validate"},
         {"expl_id", e.expl_id},
         {"item",
          {{"item_id", item.item_id},
           {"premise", item.premise},
           {"hypothesis", item.hypothesis},
           {"gold_label", std::string(to_string(item.gold_label))}}},
         {"explanation", {{"expl_id", e.expl_id}, {"text", e.text}}},
         {"taxonomy", taxonomy_json()}};
  if (mode == TaskMode::validate) {
    t["prompted_category"] = category_json(category_info(*e.taxonomy));
    t["questions"] = {{"q1", kQ1}, {"q2", kQ2}};
  }
  return t;
}

// Parses the body into a record, fills the annotator from the header when
// the body has none, and stores it.
template <class Record, class Parse>
void post_record(AnnotationStore& store, const httplib::Request& req, httplib::Response& res, Parse parse) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::exception& e) {
    return send_error(res, 422, "malformed_body", e.what());
  }
  if (body.is_object() && !body.contains("annotator_id")) {
    const auto header = req.get_header_value("X-Annotator-Id");
    if (!header.empty()) body["annotator_id"] = header;
  }
  Record r;
  try {
    r = parse(body);
  } catch (const ParamError& e) {
    return send_error(res, 422, "malformed_body", e.what());
  }
  if (!store.corpus().find_explanation(r.expl_id)) {
    return send_error(res, 404, "unknown_explanation", "no explanation '" + r.expl_id + "'");
  }
  try {
    send_json(res, 201, to_json(store.add(std::move(r))));
  } catch (const StoreError& e) {
    send_error(res, 503, "store_unavailable", e.what());
  } catch (const ParamError& e) {
    send_error(res, 422, "wrong_task_kind", e.what());
  }
}

}  // namespace

struct AnnotationService::Impl {
  AnnotationStore& store;
  httplib::Server server;

  explicit Impl(AnnotationStore& s) : store(s) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type, X-Annotator-Id"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/taxonomy", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, taxonomy_json());
    });

    server.Get("/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
      const auto mode = task_mode_from_string(req.get_param_value("mode"));
      if (!mode) return send_error(res, 422, "bad_mode", "mode must be annotate or validate");
      const std::string annotator = annotator_of(req);
      if (annotator.empty()) return send_error(res, 422, "missing_annotator", "annotator is required");
      const auto id = store.next_task(*mode, annotator);
      json body{{"remaining", store.remaining(*mode, annotator)}};
      body["task"] = id ? task_json(store, *mode, *id) : json(nullptr);
      send_json(res, 200, body);
    });

    server.Post("/annotations", [this](const httplib::Request& req, httplib::Response& res) {
      post_record<AnnotationRecord>(store, req, res, annotation_from_json);
    });
    server.Post("/validations", [this](const httplib::Request& req, httplib::Response& res) {
      post_record<ValidationRecord>(store, req, res, validation_from_json);
    });

    server.Get("/progress", [this](const httplib::Request&, httplib::Response& res) {
      json annotators = json::object();
      std::size_t annotations = 0, validations = 0;
      for (const auto& [id, p] : store.progress()) {
        annotators[id] = {{"annotations", p.annotations}, {"validations", p.validations}};
        annotations += p.annotations;
        validations += p.validations;
      }
      send_json(res, 200,
                {{"annotators", annotators},
                 {"global",
                  {{"annotations", annotations},
                   {"validations", validations},
                   {"annotate_units", store.pool(TaskMode::annotate).size()},
                   {"validate_units", store.pool(TaskMode::validate).size()}}}});
    });

    server.Get("/export", [this](const httplib::Request&, httplib::Response& res) {
      std::string body;
      for (const auto& line : store.export_lines()) body += line + '\n';
      res.status = 200;
      res.set_content(body, "application/x-ndjson");
    });

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      } catch (...) {
        send_error(res, 500, "internal", "unknown failure");
      }
    });
  }
};

AnnotationService::AnnotationService(AnnotationStore& store) : impl_(std::make_unique<Impl>(store)) {}
AnnotationService::~AnnotationService() { stop(); }

int AnnotationService::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool AnnotationService::listen_after_bind() { return impl_->server.listen_after_bind(); }
void AnnotationService::stop() { impl_->server.stop(); }
bool AnnotationService::running() const { return impl_->server.is_running(); }

}  // namespace nlx
