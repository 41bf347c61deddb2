#pragma once

#include <json.hpp>

#include "nlx/corpus.hpp"

namespace nlx {

using json = nlohmann::json;

// Native corpus records. Each carries a "kind" field ("item", "explanation",
// "highlight"); optional fields are omitted rather than written as null.
json to_record(const NliItem& item);
json to_record(const Explanation& expl);
json to_record(const Highlight& h);

// The parsers throw ParamError describing the first offending field.
NliItem item_from_record(const json& j);
Explanation explanation_from_record(const json& j);
Highlight highlight_from_record(const json& j);

// Field helpers shared by the other line-delimited formats.
const json& require_field(const json& j, const char* name);
std::string require_string(const json& j, const char* name);
std::optional<std::string> optional_string(const json& j, const char* name);
IndexSet index_set_from_json(const json& j, const char* name);
json index_set_to_json(const IndexSet& s);

// Compact single-line dump with sorted keys; stable across runs.
std::string dump_line(const json& j);

}  // namespace nlx
