#include "nlx/json_io.hpp"

#include "nlx/errors.hpp"

namespace nlx {

const json& require_field(const json& j, const char* name) {
  if (!j.is_object()) throw ParamError("record is not a JSON object");
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) throw ParamError(std::string("missing field '") + name + "'");
  return *it;
}

std::string require_string(const json& j, const char* name) {
  const json& v = require_field(j, name);
  if (!v.is_string()) throw ParamError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParamError(std::string("field '") + name + "' must be a string");
  return it->get<std::string>();
}

IndexSet index_set_from_json(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_array()) throw ParamError(std::string("field '") + name + "' must be an array");
  IndexSet out;
  for (const json& v : *it) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw ParamError(std::string("field '") + name + "' must hold non-negative integers");
    }
    out.insert(v.get<std::size_t>());
  }
  return out;
}

json index_set_to_json(const IndexSet& s) {
  json arr = json::array();
  for (std::size_t i : s) arr.push_back(i);
  return arr;
}

std::string dump_line(const json& j) {
  // nlohmann::json objects are std::map backed, so keys come out sorted.
  return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

json to_record(const NliItem& item) {
  return json{{"kind", "item"},
              {"item_id", item.item_id},
              {"premise", item.premise},
              {"hypothesis", item.hypothesis},
              {"gold_label", std::string(to_string(item.gold_label))}};
}

json to_record(const Explanation& e) {
  json j{{"kind", "explanation"},
         {"expl_id", e.expl_id},
         {"item_id", e.item_id},
         {"text", e.text},
         {"author", std::string(to_string(e.author))}};
  if (e.parent_expl_id) j["parent_expl_id"] = *e.parent_expl_id;
  if (e.taxonomy) j["taxonomy"] = std::string(to_string(*e.taxonomy));
  if (e.paradigm) j["paradigm"] = std::string(to_string(*e.paradigm));
  return j;
}

json to_record(const Highlight& h) {
  json j{{"kind", "highlight"},
         {"item_id", h.item_id},
         {"premise_indices", index_set_to_json(h.premise_indices)},
         {"hypothesis_indices", index_set_to_json(h.hypothesis_indices)}};
  if (h.expl_id) j["expl_id"] = *h.expl_id;
  return j;
}

NliItem item_from_record(const json& j) {
  NliItem item;
  item.item_id = require_string(j, "item_id");
  item.premise = require_string(j, "premise");
  item.hypothesis = require_string(j, "hypothesis");
  const std::string label = require_string(j, "gold_label");
  auto g = gold_label_from_string(label);
  if (!g) throw ParamError("unknown gold_label '" + label + "'");
  item.gold_label = *g;
  if (item.item_id.empty()) throw ParamError("empty item_id");
  return item;
}

Explanation explanation_from_record(const json& j) {
  Explanation e;
  e.expl_id = require_string(j, "expl_id");
  e.item_id = require_string(j, "item_id");
  e.text = require_string(j, "text");
  const std::string author = require_string(j, "author");
  auto a = author_from_string(author);
  if (!a) throw ParamError("unknown author '" + author + "'");
  e.author = *a;
  e.parent_expl_id = optional_string(j, "parent_expl_id");
  if (auto t = optional_string(j, "taxonomy")) {
    auto c = category_from_string(*t);
    if (!c) throw ParamError("unknown taxonomy '" + *t + "'");
    e.taxonomy = *c;
  }
  if (auto p = optional_string(j, "paradigm")) {
    auto par = paradigm_from_string(*p);
    if (!par) throw ParamError("unknown paradigm '" + *p + "'");
    e.paradigm = *par;
  }
  if (e.expl_id.empty()) throw ParamError("empty expl_id");
  return e;
}

Highlight highlight_from_record(const json& j) {
  Highlight h;
  h.item_id = require_string(j, "item_id");
  h.expl_id = optional_string(j, "expl_id");
  h.premise_indices = index_set_from_json(j, "premise_indices");
  h.hypothesis_indices = index_set_from_json(j, "hypothesis_indices");
  return h;
}

}  // namespace nlx
