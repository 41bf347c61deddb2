#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nlx/labels.hpp"

namespace nlx {

using IndexSet = std::set<std::size_t>;

struct NliItem {
  std::string item_id;
  std::string premise;
  std::string hypothesis;
  GoldLabel gold_label = GoldLabel::entailment;

  bool operator==(const NliItem&) const = default;
};

struct Explanation {
  std::string expl_id;
  std::string item_id;
  std::string text;
  Author author = Author::human;
  std::optional<std::string> parent_expl_id;  // segmentation lineage
  std::optional<Category> taxonomy;
  std::optional<Paradigm> paradigm;  // present iff author == model

  bool operator==(const Explanation&) const = default;
};

// Token indices are 0-based positions in tokenize(premise / hypothesis).
struct Highlight {
  std::string item_id;
  std::optional<std::string> expl_id;
  IndexSet premise_indices;
  IndexSet hypothesis_indices;

  bool operator==(const Highlight&) const = default;
};

struct TokenizedSentence {
  std::vector<std::string> tokens;
  std::string source;
};

// Byte range [begin, end) of one token inside its source string.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Splits on Unicode whitespace, then peels leading and trailing punctuation
// into one-character tokens. Hyphens and apostrophes inside a word stay.
// Case is preserved. Throws EmptyText for empty or whitespace-only input.
TokenizedSentence tokenize(std::string_view text);

// Same segmentation as tokenize(), reported as byte spans. Never throws;
// returns an empty list for blank input.
std::vector<TokenSpan> token_spans(std::string_view text);

// ---------------------------------------------------------------------------
// Highlight label rules and in-text markers

struct HighlightVerdict {
  bool valid = true;
  std::vector<std::string> violated;  // rule names, e.g. "neutral: hypothesis only"
};

HighlightVerdict check_highlight_validity(const NliItem& item, const Highlight& h);

struct MarkedPair {
  std::string premise;
  std::string hypothesis;
};

// Wraps each highlighted token of the original sentence in "**". Adjacent
// highlighted tokens with no whitespace between them share one marker pair.
MarkedPair render_in_text(const NliItem& item, const Highlight& h);
std::string render_in_text(std::string_view sentence, const IndexSet& indices);

struct ParsedMarked {
  std::string plain;
  IndexSet indices;
};

// Inverse of render_in_text. Throws MarkerError on an unbalanced marker.
ParsedMarked parse_in_text(std::string_view marked, std::string_view marker = "**");

// "0,3,4" style index lists used by the indexed highlight prompts.
std::string format_index_list(const IndexSet& indices);
// Accepts "[1, 2]", "1,2", "1 2", "[]", "none". Throws ParamError otherwise.
IndexSet parse_index_list(std::string_view text);

// ---------------------------------------------------------------------------
// Corpus

struct CorpusCounts {
  std::size_t items = 0;
  std::size_t explanations = 0;
  std::size_t human_explanations = 0;
  std::size_t model_explanations = 0;
  std::size_t highlights = 0;
};

enum class CorpusFormat { native_jsonl, esnli_csv };

// Immutable once constructed. All type invariants and cross references are
// checked in the constructor; a Corpus that exists is a valid one.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<NliItem> items, std::vector<Explanation> explanations,
         std::vector<Highlight> highlights);

  const std::vector<NliItem>& items() const { return items_; }
  const std::vector<Explanation>& explanations() const { return explanations_; }
  const std::vector<Highlight>& highlights() const { return highlights_; }

  const NliItem* find_item(std::string_view item_id) const;
  const Explanation* find_explanation(std::string_view expl_id) const;
  const NliItem& item(std::string_view item_id) const;  // throws ParamError

  // Explanations of one item in file order, optionally filtered by author.
  std::vector<const Explanation*> explanations_of(std::string_view item_id,
                                                  std::optional<Author> author = {}) const;
  std::vector<const Highlight*> highlights_of(std::string_view item_id) const;

  const TokenizedSentence& premise_tokens(std::string_view item_id) const;
  const TokenizedSentence& hypothesis_tokens(std::string_view item_id) const;

  CorpusCounts counts() const;

 private:
  struct Tokens {
    TokenizedSentence premise;
    TokenizedSentence hypothesis;
  };

  std::vector<NliItem> items_;
  std::vector<Explanation> explanations_;
  std::vector<Highlight> highlights_;
  std::map<std::string, std::size_t, std::less<>> item_index_;
  std::map<std::string, std::size_t, std::less<>> expl_index_;
  std::map<std::string, Tokens, std::less<>> tokens_;
};

// Reads a corpus file. Malformed rows raise RowError with the 1-based line
// number; broken references and out-of-range highlight indices raise
// IntegrityError naming the row.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus read_native_jsonl(std::istream& in);
Corpus read_esnli_csv(std::istream& in);

// Record-per-line serialisation (items, then explanations, then highlights).
void write_native_jsonl(std::ostream& out, const Corpus& corpus);
void write_native_jsonl(std::ostream& out, const std::vector<Explanation>& explanations);

// Merges several corpora; items shared by id must be identical.
Corpus merge(const Corpus& base, const std::vector<Explanation>& extra_explanations,
             const std::vector<Highlight>& extra_highlights = {});

// Adds the explanations and highlights of a native JSONL file to `base`.
// Item records in the file are optional; any present must equal the base
// item of the same id.
Corpus merge_fragment(const Corpus& base, const std::filesystem::path& path);

}  // namespace nlx
