#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nlx/corpus.hpp"
#include "nlx/coverage.hpp"
#include "nlx/llm_client.hpp"

namespace nlx {

// Everything a run depends on besides its input records. Stored as
// "key = value" lines; '#' starts a comment. Unknown keys are rejected.
struct RunConfig {
  std::string corpus;                      // corpus file path
  CorpusFormat corpus_format = CorpusFormat::native_jsonl;
  std::string exemplars;                   // exemplar file; empty: the shipped one
  std::string embedder = "hashing:256";
  std::string tagger = "rules";
  std::string client = "mock:mock";
  DecodingParams decoding;
  std::uint64_t seed = 0;
  std::string cache_dir;                   // empty: in-memory cache only
  std::size_t max_workers = 4;
  ProjectionMethod projection = ProjectionMethod::pca;
  double perplexity = 5.0;

  bool operator==(const RunConfig&) const = default;

  // Canonical text: every key, fixed order, one per line.
  std::string to_text() const;
  // The canonical text with each line prefixed by "# ", for report files.
  std::string header() const;
  ProjectionConfig projection_config() const;
  std::filesystem::path exemplar_path() const;
};

// Keys accepted by parse_run_config, in canonical order.
const std::vector<std::string>& run_config_keys();

// Throws ParamError naming the line on a bad key or value.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace nlx
