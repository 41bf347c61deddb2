#pragma once

#include <memory>
#include <string>

#include "nlx/annotation_store.hpp"

namespace nlx {

// HTTP front end of an AnnotationStore:
//   GET  /tasks/next?mode=annotate|validate&annotator=ID
//   POST /annotations, POST /validations
//   GET  /progress, GET /export, GET /taxonomy
// The annotator may also be given in the X-Annotator-Id header.
// Status codes: 404 unknown expl_id, 422 malformed request, 503 write failure.
class AnnotationService {
 public:
  explicit AnnotationService(AnnotationStore& store);
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  // Port 0 picks a free port; returns the bound port or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen_after_bind();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nlx
