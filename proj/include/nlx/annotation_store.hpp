#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nlx/corpus.hpp"
#include "nlx/errors.hpp"
#include "nlx/labels.hpp"

namespace nlx {

struct AnnotationRecord {
  std::string expl_id;
  std::string annotator_id;
  Category taxonomy = Category::Coreference;
  std::string timestamp;  // UTC, "YYYY-MM-DDTHH:MM:SS[.fff]Z"

  bool operator==(const AnnotationRecord&) const = default;
};

struct ValidationRecord {
  std::string expl_id;
  std::string annotator_id;
  bool q1_label_fit = false;
  bool q2_taxonomy_fit = false;
  std::string timestamp;

  bool operator==(const ValidationRecord&) const = default;
};

// Log lines carry "kind": "annotation" | "validation".
nlohmann::json to_json(const AnnotationRecord& r);
nlohmann::json to_json(const ValidationRecord& r);
// Throw ParamError on missing or mistyped fields. An absent timestamp is
// left empty for the caller to fill.
AnnotationRecord annotation_from_json(const nlohmann::json& j);
ValidationRecord validation_from_json(const nlohmann::json& j);

bool is_utc_timestamp(std::string_view s);
std::string utc_now();

// Write failed; the log is unchanged.
class StoreError : public Error {
 public:
  using Error::Error;
};

enum class TaskMode { annotate, validate };
std::optional<TaskMode> task_mode_from_string(std::string_view s);

struct AnnotatorProgress {
  std::size_t annotations = 0;  // distinct explanations labeled
  std::size_t validations = 0;  // distinct explanations validated
};

// Append-only JSONL log plus an in-memory index of the latest record per
// (expl_id, annotator). Writes are serialized; a failed append truncates the
// log back to its previous length. Reads see a consistent snapshot.
class AnnotationStore {
 public:
  using Clock = std::chrono::steady_clock;

  // Replays an existing log. Records naming unknown explanations are an
  // IntegrityError. An empty path keeps records in memory only.
  AnnotationStore(const Corpus& corpus, std::filesystem::path log_path,
                  std::chrono::seconds lease_ttl = std::chrono::seconds(600));

  // Throw ParamError for an expl_id outside the task pool of that mode (a
  // missing expl_id is checked first by the caller via corpus()), StoreError
  // when the log cannot be written.
  AnnotationRecord add(AnnotationRecord r);
  ValidationRecord add(ValidationRecord r);

  // Next unit in (item_id, expl_id) order that the annotator has not done
  // and does not hold under an unexpired lease; leases it. nullopt when done.
  std::optional<std::string> next_task(TaskMode mode, const std::string& annotator);
  std::size_t remaining(TaskMode mode, const std::string& annotator) const;

  // Units of each mode: human explanations to label, model explanations
  // with a prompted category to validate.
  const std::vector<std::string>& pool(TaskMode mode) const;

  std::vector<std::string> export_lines() const;  // full history, log order
  std::vector<AnnotationRecord> latest_annotations() const;
  std::vector<ValidationRecord> latest_validations() const;
  std::map<std::string, AnnotatorProgress> progress() const;

  const Corpus& corpus() const { return corpus_; }

 private:
  using Key = std::pair<std::string, std::string>;  // (expl_id, annotator)

  void append_line(const std::string& line);
  void index(const AnnotationRecord& r);
  void index(const ValidationRecord& r);

  const Corpus& corpus_;
  std::filesystem::path path_;
  std::chrono::seconds lease_ttl_;
  std::vector<std::string> annotate_pool_, validate_pool_;

  mutable std::shared_mutex mu_;
  std::vector<std::string> lines_;
  std::map<Key, AnnotationRecord> annotations_;
  std::map<Key, ValidationRecord> validations_;
  std::map<std::pair<TaskMode, Key>, Clock::time_point> leases_;
};

}  // namespace nlx
