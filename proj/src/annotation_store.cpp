#include "nlx/annotation_store.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <regex>
#include <tuple>

#include "nlx/json_io.hpp"

namespace nlx {

namespace fs = std::filesystem;

namespace {

// Sort key that orders timestamps with and without fractional seconds.
std::string time_key(const std::string& ts) {
  const auto dot = ts.find('.');
  std::string whole = ts.substr(0, std::min(dot, ts.size() - 1));
  std::string frac = dot == std::string::npos ? "" : ts.substr(dot + 1, ts.size() - dot - 2);
  frac.resize(9, '0');
  return whole + "." + frac;
}

template <class R>
void keep_latest(std::map<std::pair<std::string, std::string>, R>& index, const R& r) {
  const std::pair<std::string, std::string> key{r.expl_id, r.annotator_id};
  auto it = index.find(key);
  if (it == index.end()) {
    index.emplace(key, r);
  } else if (time_key(r.timestamp) >= time_key(it->second.timestamp)) {
    it->second = r;  // equal times: the later log line wins
  }
}

std::string require_id(const json& j, const char* name) {
  std::string s = require_string(j, name);
  if (s.empty()) throw ParamError(std::string("'") + name + "' must not be empty");
  return s;
}

std::string timestamp_field(const json& j) {
  auto ts = optional_string(j, "timestamp").value_or("");
  if (!ts.empty() && !is_utc_timestamp(ts)) throw ParamError("timestamp '" + ts + "' is not UTC ISO-8601");
  return ts;
}

bool require_bool(const json& j, const char* name) {
  const json& v = require_field(j, name);
  if (!v.is_boolean()) throw ParamError(std::string("'") + name + "' must be true or false");
  return v.get<bool>();
}

}  // namespace

json to_json(const AnnotationRecord& r) {
  return {{"kind", "annotation"},
          {"expl_id", r.expl_id},
          {"annotator_id", r.annotator_id},
          {"taxonomy", std::string(to_string(r.taxonomy))},
          {"timestamp", r.timestamp}};
}

json to_json(const ValidationRecord& r) {
  return {{"kind", "validation"},
          {"expl_id", r.expl_id},
          {"annotator_id", r.annotator_id},
          {"q1_label_fit", r.q1_label_fit},
          {"q2_taxonomy_fit", r.q2_taxonomy_fit},
          {"timestamp", r.timestamp}};
}

AnnotationRecord annotation_from_json(const json& j) {
  if (!j.is_object()) throw ParamError("record must be a JSON object");
  AnnotationRecord r;
  r.expl_id = require_id(j, "expl_id");
  r.annotator_id = require_id(j, "annotator_id");
  const json& t = require_field(j, "taxonomy");
  std::optional<Category> c;
  if (t.is_string()) {
    c = category_from_string(t.get<std::string>());
  } else if (t.is_number_integer() && t.get<long long>() >= 1 && t.get<long long>() <= kCategoryCount) {
    c = static_cast<Category>(t.get<int>());
  }
  if (!c) throw ParamError("'taxonomy' must be a category name or 1-8");
  r.taxonomy = *c;
  r.timestamp = timestamp_field(j);
  return r;
}

ValidationRecord validation_from_json(const json& j) {
  if (!j.is_object()) throw ParamError("record must be a JSON object");
  ValidationRecord r;
  r.expl_id = require_id(j, "expl_id");
  r.annotator_id = require_id(j, "annotator_id");
  r.q1_label_fit = require_bool(j, "q1_label_fit");
  r.q2_taxonomy_fit = require_bool(j, "q2_taxonomy_fit");
  r.timestamp = timestamp_field(j);
  return r;
}

bool is_utc_timestamp(std::string_view s) {
  static const std::regex re(R"(^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d{1,9})?Z$)");
  return std::regex_match(s.begin(), s.end(), re);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

std::optional<TaskMode> task_mode_from_string(std::string_view s) {
  if (s == "annotate") return TaskMode::annotate;
  if (s == "validate") return TaskMode::validate;
  return std::nullopt;
}

AnnotationStore::AnnotationStore(const Corpus& corpus, fs::path log_path, std::chrono::seconds lease_ttl)
    : corpus_(corpus), path_(std::move(log_path)), lease_ttl_(lease_ttl) {
  std::vector<const Explanation*> human, model;
  for (const auto& e : corpus_.explanations()) {
    if (e.author == Author::human) {
      human.push_back(&e);
    } else if (e.taxonomy) {
      model.push_back(&e);
    }
  }
  auto ordered_ids = [](std::vector<const Explanation*> v) {
    std::sort(v.begin(), v.end(), [](const Explanation* a, const Explanation* b) {
      return std::tie(a->item_id, a->expl_id) < std::tie(b->item_id, b->expl_id);
    });
    std::vector<std::string> ids;
    for (const auto* e : v) ids.push_back(e->expl_id);
    return ids;
  };
  annotate_pool_ = ordered_ids(std::move(human));
  validate_pool_ = ordered_ids(std::move(model));

  if (path_.empty() || !fs::exists(path_)) return;
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw StoreError("cannot read annotation log '" + path_.string() + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  if (!content.empty() && content.back() != '\n') {
    // A torn final line from an interrupted append is dropped.
    const auto last_nl = content.rfind('\n');
    const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
    content.resize(keep);
    fs::resize_file(path_, keep);
  }
  std::size_t lineno = 0, start = 0;
  while (start < content.size()) {
    const auto nl = content.find('\n', start);
    const std::string line = content.substr(start, nl - start);
    start = nl + 1;
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const std::string kind = require_string(j, "kind");
      if (kind == "annotation") {
        auto r = annotation_from_json(j);
        if (!corpus_.find_explanation(r.expl_id)) {
          throw IntegrityError("annotation for unknown explanation '" + r.expl_id + "'", lineno);
        }
        index(r);
      } else if (kind == "validation") {
        auto r = validation_from_json(j);
        if (!corpus_.find_explanation(r.expl_id)) {
          throw IntegrityError("validation for unknown explanation '" + r.expl_id + "'", lineno);
        }
        index(r);
      } else {
        throw ParamError("unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw RowError(lineno, e.what());
    } catch (const ParamError& e) {
      throw RowError(lineno, e.what());
    }
    lines_.push_back(line);
  }
}

void AnnotationStore::index(const AnnotationRecord& r) { keep_latest(annotations_, r); }
void AnnotationStore::index(const ValidationRecord& r) { keep_latest(validations_, r); }

void AnnotationStore::append_line(const std::string& line) {
  if (path_.empty()) return;
  std::error_code ec;
  const auto before = fs::exists(path_, ec) ? fs::file_size(path_, ec) : 0;
  {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (out) {
      out << line << '\n';
      out.flush();
      if (out) return;
    }
  }
  if (fs::is_regular_file(path_, ec)) fs::resize_file(path_, before, ec);
  throw StoreError("cannot append to annotation log '" + path_.string() + "'");
}

AnnotationRecord AnnotationStore::add(AnnotationRecord r) {
  if (std::find(annotate_pool_.begin(), annotate_pool_.end(), r.expl_id) == annotate_pool_.end()) {
    throw ParamError("'" + r.expl_id + "' is not a human explanation to annotate");
  }
  if (r.timestamp.empty()) r.timestamp = utc_now();
  const std::string line = dump_line(to_json(r));
  std::unique_lock lock(mu_);
  append_line(line);
  lines_.push_back(line);
  index(r);
  leases_.erase({TaskMode::annotate, {r.expl_id, r.annotator_id}});
  return r;
}

ValidationRecord AnnotationStore::add(ValidationRecord r) {
  if (std::find(validate_pool_.begin(), validate_pool_.end(), r.expl_id) == validate_pool_.end()) {
    throw ParamError("'" + r.expl_id + "' is not a generated explanation to validate");
  }
  if (r.timestamp.empty()) r.timestamp = utc_now();
  const std::string line = dump_line(to_json(r));
  std::unique_lock lock(mu_);
  append_line(line);
  lines_.push_back(line);
  index(r);
  leases_.erase({TaskMode::validate, {r.expl_id, r.annotator_id}});
  return r;
}

const std::vector<std::string>& AnnotationStore::pool(TaskMode mode) const {
  return mode == TaskMode::annotate ? annotate_pool_ : validate_pool_;
}

std::optional<std::string> AnnotationStore::next_task(TaskMode mode, const std::string& annotator) {
  const auto now = Clock::now();
  std::unique_lock lock(mu_);
  for (const auto& id : pool(mode)) {
    const Key key{id, annotator};
    const bool done = mode == TaskMode::annotate ? annotations_.count(key) > 0 : validations_.count(key) > 0;
    if (done) continue;
    const auto lease = leases_.find({mode, key});
    if (lease != leases_.end() && lease->second > now) continue;
    leases_[{mode, key}] = now + lease_ttl_;
    return id;
  }
  return std::nullopt;
}

std::size_t AnnotationStore::remaining(TaskMode mode, const std::string& annotator) const {
  std::shared_lock lock(mu_);
  std::size_t n = 0;
  for (const auto& id : pool(mode)) {
    const Key key{id, annotator};
    n += (mode == TaskMode::annotate ? annotations_.count(key) : validations_.count(key)) == 0 ? 1 : 0;
  }
  return n;
}

std::vector<std::string> AnnotationStore::export_lines() const {
  std::shared_lock lock(mu_);
  return lines_;
}

std::vector<AnnotationRecord> AnnotationStore::latest_annotations() const {
  std::shared_lock lock(mu_);
  std::vector<AnnotationRecord> out;
  for (const auto& [k, r] : annotations_) out.push_back(r);
  return out;
}

std::vector<ValidationRecord> AnnotationStore::latest_validations() const {
  std::shared_lock lock(mu_);
  std::vector<ValidationRecord> out;
  for (const auto& [k, r] : validations_) out.push_back(r);
  return out;
}

std::map<std::string, AnnotatorProgress> AnnotationStore::progress() const {
  std::shared_lock lock(mu_);
  std::map<std::string, AnnotatorProgress> out;
  for (const auto& [k, r] : annotations_) ++out[k.second].annotations;
  for (const auto& [k, r] : validations_) ++out[k.second].validations;
  return out;
}

}  // namespace nlx
