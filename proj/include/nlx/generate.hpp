#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nlx/corpus.hpp"
#include "nlx/llm_client.hpp"
#include "nlx/taxonomy.hpp"

namespace nlx {

inline constexpr const char* kPromptTemplateVersion = "gen-templates-1";

enum class GenerationStep { explain, stage_one, highlight };

struct GenerationRequest {
  NliItem item;
  Paradigm paradigm = Paradigm::baseline;
  GenerationStep step = GenerationStep::explain;
  std::optional<Category> taxonomy_hint;    // two-stage explain step only
  std::optional<Highlight> highlight_hint;  // highlight paradigms only
  std::string model_id;
  DecodingParams decoding;
};

// Throws ParamError when the request's hints do not fit its paradigm and step.
void validate(const GenerationRequest& request);

// Exemplars are needed by the two-stage steps; other prompts ignore them.
std::string build_generation_prompt(const GenerationRequest& request,
                                    const ExemplarStore& exemplars = {});

// ---------------------------------------------------------------------------
// Output parsers. Each returns at least one result or throws a typed
// ParseError carrying the raw text.

// Distinct standalone integers 1..8, e.g. "3,3,5." -> {Semantic, AbsenceOfMention}.
std::set<Category> parse_stage_one(std::string_view raw);

struct TaggedExplanation {
  Category category;
  std::string text;
};

struct EndToEndParse {
  std::vector<TaggedExplanation> explanations;
  std::vector<std::string> skipped_headers;  // numbered headers naming no known category
};

// "N. Name: - text" blocks; dash lines below a header belong to it.
EndToEndParse parse_end_to_end(std::string_view raw);

struct HighlightCandidate {
  Highlight highlight;
  bool valid = false;
  std::vector<std::string> problems;  // violated rules, "out of bounds", or parse trouble
};

// "Premise_Highlighted: [...]" / "Hypothesis_Highlighted: [...]" pairs, in
// order. Candidates that break the label rules or the sentence bounds are
// flagged, not dropped. Throws HighlightParseError if no pair parses.
std::vector<HighlightCandidate> parse_highlight_output(std::string_view raw, const NliItem& item);

// Splits a free-form list answer into explanations: one per "-", "*", bullet
// or "N." item. Lead-in lines before the first item and lines ending in ':'
// are dropped. Without list markers every non-empty line is one explanation.
std::vector<std::string> split_explanations(std::string_view raw);

// ---------------------------------------------------------------------------
// Calls

std::set<Category> predict_categories_stage1(LlmClient& client, const NliItem& item,
                                             const ExemplarStore& exemplars,
                                             const DecodingParams& decoding = {});

std::vector<HighlightCandidate> generate_highlights(LlmClient& client, const NliItem& item,
                                                    const DecodingParams& decoding = {});

enum class HintSource { human, model };

struct CallRecord {
  GenerationStep step = GenerationStep::explain;
  std::optional<Category> category;
  std::string prompt_sha;
  std::string raw_output;
};

// Per-explanation tag: the category for taxonomy paradigms, the hint for
// highlight paradigms.
struct ExplanationTag {
  std::optional<Category> category;
  std::optional<Highlight> highlight;
};

struct GeneratedBatch {
  std::string item_id;
  NliItem item;
  Paradigm paradigm = Paradigm::baseline;
  std::vector<Explanation> explanations;  // author = model
  std::vector<ExplanationTag> tags;       // aligned with explanations
  std::vector<HighlightCandidate> highlight_candidates;
  std::vector<CallRecord> calls;          // in issue order
};

struct GenerationOptions {
  DecodingParams decoding;
  std::size_t max_workers = 4;
};

struct GenerationRun {
  std::string model_id;
  Paradigm paradigm = Paradigm::baseline;
  HintSource hints = HintSource::human;
  DecodingParams decoding;
  std::map<std::string, GeneratedBatch> batches;  // by item_id
  std::map<std::string, std::string> failed;      // item_id -> error message

  std::vector<Explanation> explanations() const;
  std::vector<Highlight> highlights() const;
};

// Runs one paradigm over every item. Item failures are collected in
// GenerationRun::failed rather than aborting the run.
GenerationRun run_paradigm(LlmClient& client, const Corpus& corpus, Paradigm paradigm,
                           HintSource hints, const ExemplarStore& exemplars,
                           const GenerationOptions& options = {});

// Writes requests.jsonl, raw_outputs.jsonl, highlight_candidates.jsonl,
// generations.jsonl (a loadable native corpus of the generated items) and
// manifest.json. Contents depend only on the run.
void write_run_directory(const GenerationRun& run, const std::filesystem::path& dir);

std::string_view to_string(GenerationStep step);
std::string_view to_string(HintSource source);
std::optional<HintSource> hint_source_from_string(std::string_view s);

}  // namespace nlx
