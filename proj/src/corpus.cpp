#include "nlx/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "nlx/errors.hpp"
#include "nlx/json_io.hpp"
#include "utf8.hpp"

namespace nlx {

// ---------------------------------------------------------------------------
// Tokenizer

std::vector<TokenSpan> token_spans(std::string_view text) {
  struct Cp {
    std::size_t begin, end;
    char32_t value;
  };
  std::vector<TokenSpan> out;
  std::vector<Cp> chunk;

  auto flush = [&] {
    if (chunk.empty()) return;
    std::size_t lo = 0, hi = chunk.size();
    while (lo < hi && utf8::is_punct(chunk[lo].value)) {
      out.push_back({chunk[lo].begin, chunk[lo].end});
      ++lo;
    }
    std::vector<TokenSpan> tail;
    while (hi > lo && utf8::is_punct(chunk[hi - 1].value)) {
      tail.push_back({chunk[hi - 1].begin, chunk[hi - 1].end});
      --hi;
    }
    if (lo < hi) out.push_back({chunk[lo].begin, chunk[hi - 1].end});
    out.insert(out.end(), tail.rbegin(), tail.rend());
    chunk.clear();
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len = 1;
    const char32_t c = utf8::decode(text, pos, len);
    if (utf8::is_space(c)) {
      flush();
    } else {
      chunk.push_back({pos, pos + len, c});
    }
    pos += len;
  }
  flush();
  return out;
}

TokenizedSentence tokenize(std::string_view text) {
  auto spans = token_spans(text);
  if (spans.empty()) throw EmptyText();
  TokenizedSentence out;
  out.source = std::string(text);
  out.tokens.reserve(spans.size());
  for (const auto& s : spans) out.tokens.emplace_back(text.substr(s.begin, s.end - s.begin));
  return out;
}

// ---------------------------------------------------------------------------
// Highlight rules and markers

HighlightVerdict check_highlight_validity(const NliItem& item, const Highlight& h) {
  const std::size_t np = token_spans(item.premise).size();
  const std::size_t nh = token_spans(item.hypothesis).size();
  if (!h.premise_indices.empty() && *h.premise_indices.rbegin() >= np) {
    throw BoundsError("premise index " + std::to_string(*h.premise_indices.rbegin()) +
                      " >= token count " + std::to_string(np));
  }
  if (!h.hypothesis_indices.empty() && *h.hypothesis_indices.rbegin() >= nh) {
    throw BoundsError("hypothesis index " + std::to_string(*h.hypothesis_indices.rbegin()) +
                      " >= token count " + std::to_string(nh));
  }

  HighlightVerdict v;
  const bool p = !h.premise_indices.empty();
  const bool q = !h.hypothesis_indices.empty();
  switch (item.gold_label) {
    case GoldLabel::entailment:
      if (!p) v.violated.emplace_back("entailment: premise required");
      break;
    case GoldLabel::contradiction:
      if (!p) v.violated.emplace_back("contradiction: premise required");
      if (!q) v.violated.emplace_back("contradiction: hypothesis required");
      break;
    case GoldLabel::neutral:
      if (p) v.violated.emplace_back("neutral: hypothesis only");
      if (!q) v.violated.emplace_back("neutral: hypothesis required");
      break;
  }
  v.valid = v.violated.empty();
  return v;
}

std::string render_in_text(std::string_view sentence, const IndexSet& indices) {
  static constexpr std::string_view kMarker = "**";
  if (sentence.find(kMarker) != std::string_view::npos) {
    throw MarkerError("sentence already contains the '**' marker");
  }
  const auto spans = token_spans(sentence);
  if (!indices.empty() && *indices.rbegin() >= spans.size()) {
    throw BoundsError("highlight index " + std::to_string(*indices.rbegin()) +
                      " >= token count " + std::to_string(spans.size()));
  }
  std::string out;
  std::size_t cursor = 0;
  std::size_t i = 0;
  while (i < spans.size()) {
    if (!indices.count(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < spans.size() && indices.count(j + 1) && spans[j + 1].begin == spans[j].end) ++j;
    out.append(sentence.substr(cursor, spans[i].begin - cursor));
    out.append(kMarker);
    out.append(sentence.substr(spans[i].begin, spans[j].end - spans[i].begin));
    out.append(kMarker);
    cursor = spans[j].end;
    i = j + 1;
  }
  out.append(sentence.substr(cursor));
  return out;
}

MarkedPair render_in_text(const NliItem& item, const Highlight& h) {
  return {render_in_text(item.premise, h.premise_indices),
          render_in_text(item.hypothesis, h.hypothesis_indices)};
}

ParsedMarked parse_in_text(std::string_view marked, std::string_view marker) {
  if (marker.empty()) throw ParamError("empty marker");
  ParsedMarked out;
  std::vector<TokenSpan> regions;
  bool open = false;
  std::size_t region_start = 0;
  std::size_t pos = 0;
  while (pos < marked.size()) {
    if (marked.compare(pos, marker.size(), marker) == 0) {
      if (open) {
        if (out.plain.size() > region_start) regions.push_back({region_start, out.plain.size()});
      } else {
        region_start = out.plain.size();
      }
      open = !open;
      pos += marker.size();
    } else {
      out.plain.push_back(marked[pos]);
      ++pos;
    }
  }
  if (open) throw MarkerError("unbalanced '" + std::string(marker) + "' marker");

  const auto spans = token_spans(out.plain);
  for (std::size_t t = 0; t < spans.size(); ++t) {
    for (const auto& r : regions) {
      if (spans[t].begin < r.end && r.begin < spans[t].end) {
        out.indices.insert(t);
        break;
      }
    }
  }
  return out;
}

std::string format_index_list(const IndexSet& indices) {
  std::string out;
  for (std::size_t i : indices) {
    if (!out.empty()) out += ',';
    out += std::to_string(i);
  }
  return out;
}

IndexSet parse_index_list(std::string_view text) {
  std::string cleaned;
  for (char c : text) {
    if (c == '[' || c == ']' || c == '"' || c == '\'' || c == ',' || c == ';') {
      cleaned.push_back(' ');
    } else {
      cleaned.push_back(c);
    }
  }
  std::istringstream is(cleaned);
  std::string tok;
  IndexSet out;
  while (is >> tok) {
    std::string lower;
    for (char c : tok) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "none" || lower == "n/a" || lower == "-") continue;
    if (!std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
        tok.size() > 9) {
      throw ParamError("not an index list: '" + std::string(text) + "'");
    }
    out.insert(static_cast<std::size_t>(std::stoul(tok)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus

namespace {

struct SourceLines {
  std::vector<std::size_t> items, explanations, highlights;
};

std::size_t line_at(const std::vector<std::size_t>* lines, std::size_t i) {
  return lines && i < lines->size() ? (*lines)[i] : 0;
}

bool blank(std::string_view s) { return token_spans(s).empty(); }

}  // namespace

// Validation shared by the public constructor and the file readers, which
// supply line numbers so errors can name the offending row.
static void validate(const std::vector<NliItem>& items, const std::vector<Explanation>& expls,
                     const std::vector<Highlight>& highlights, const SourceLines* src,
                     std::map<std::string, std::size_t, std::less<>>& item_index,
                     std::map<std::string, std::size_t, std::less<>>& expl_index) {
  const auto* il = src ? &src->items : nullptr;
  const auto* el = src ? &src->explanations : nullptr;
  const auto* hl = src ? &src->highlights : nullptr;

  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    if (it.item_id.empty()) throw IntegrityError("item with empty item_id", line_at(il, i));
    if (!item_index.emplace(it.item_id, i).second) {
      throw IntegrityError("duplicate item_id '" + it.item_id + "'", line_at(il, i));
    }
    if (blank(it.premise) || blank(it.hypothesis)) {
      throw IntegrityError("item '" + it.item_id + "' has an empty premise or hypothesis",
                           line_at(il, i));
    }
  }
  for (std::size_t i = 0; i < expls.size(); ++i) {
    const auto& e = expls[i];
    if (!expl_index.emplace(e.expl_id, i).second) {
      throw IntegrityError("duplicate expl_id '" + e.expl_id + "'", line_at(el, i));
    }
    if (!item_index.count(e.item_id)) {
      throw IntegrityError("explanation '" + e.expl_id + "' references unknown item '" +
                               e.item_id + "'",
                           line_at(el, i));
    }
    if (blank(e.text)) throw IntegrityError("explanation '" + e.expl_id + "' has empty text", line_at(el, i));
    if (e.author == Author::model && !e.paradigm) {
      throw IntegrityError("model explanation '" + e.expl_id + "' lacks a paradigm", line_at(el, i));
    }
    if (e.author == Author::human && e.paradigm) {
      throw IntegrityError("human explanation '" + e.expl_id + "' carries a paradigm", line_at(el, i));
    }
  }
  for (std::size_t i = 0; i < expls.size(); ++i) {
    const auto& e = expls[i];
    if (!e.parent_expl_id) continue;
    auto p = expl_index.find(*e.parent_expl_id);
    if (p == expl_index.end()) {
      throw IntegrityError("explanation '" + e.expl_id + "' has unknown parent '" +
                               *e.parent_expl_id + "'",
                           line_at(el, i));
    }
    if (expls[p->second].item_id != e.item_id) {
      throw IntegrityError("explanation '" + e.expl_id + "' has a parent from another item",
                           line_at(el, i));
    }
  }
  for (std::size_t i = 0; i < highlights.size(); ++i) {
    const auto& h = highlights[i];
    auto it = item_index.find(h.item_id);
    if (it == item_index.end()) {
      throw IntegrityError("highlight references unknown item '" + h.item_id + "'", line_at(hl, i));
    }
    if (h.expl_id) {
      auto e = expl_index.find(*h.expl_id);
      if (e == expl_index.end() || expls[e->second].item_id != h.item_id) {
        throw IntegrityError("highlight references unknown explanation '" + *h.expl_id +
                                 "' of item '" + h.item_id + "'",
                             line_at(hl, i));
      }
    }
    const auto& item = items[it->second];
    const std::size_t np = token_spans(item.premise).size();
    const std::size_t nh = token_spans(item.hypothesis).size();
    if (!h.premise_indices.empty() && *h.premise_indices.rbegin() >= np) {
      throw IntegrityError("highlight premise index " + std::to_string(*h.premise_indices.rbegin()) +
                               " out of range for item '" + h.item_id + "' (" +
                               std::to_string(np) + " tokens)",
                           line_at(hl, i));
    }
    if (!h.hypothesis_indices.empty() && *h.hypothesis_indices.rbegin() >= nh) {
      throw IntegrityError("highlight hypothesis index " +
                               std::to_string(*h.hypothesis_indices.rbegin()) +
                               " out of range for item '" + h.item_id + "' (" +
                               std::to_string(nh) + " tokens)",
                           line_at(hl, i));
    }
  }
}

static Corpus build(std::vector<NliItem> items, std::vector<Explanation> expls,
                    std::vector<Highlight> highlights, const SourceLines& src) {
  // Validate with line information first; the constructor re-validates
  // cheaply without it.
  std::map<std::string, std::size_t, std::less<>> a, b;
  validate(items, expls, highlights, &src, a, b);
  return Corpus(std::move(items), std::move(expls), std::move(highlights));
}

Corpus::Corpus(std::vector<NliItem> items, std::vector<Explanation> explanations,
               std::vector<Highlight> highlights)
    : items_(std::move(items)),
      explanations_(std::move(explanations)),
      highlights_(std::move(highlights)) {
  validate(items_, explanations_, highlights_, nullptr, item_index_, expl_index_);
  for (const auto& it : items_) {
    tokens_.emplace(it.item_id, Tokens{tokenize(it.premise), tokenize(it.hypothesis)});
  }
}

const NliItem* Corpus::find_item(std::string_view item_id) const {
  auto it = item_index_.find(item_id);
  return it == item_index_.end() ? nullptr : &items_[it->second];
}

const Explanation* Corpus::find_explanation(std::string_view expl_id) const {
  auto it = expl_index_.find(expl_id);
  return it == expl_index_.end() ? nullptr : &explanations_[it->second];
}

const NliItem& Corpus::item(std::string_view item_id) const {
  const NliItem* p = find_item(item_id);
  if (!p) throw ParamError("unknown item '" + std::string(item_id) + "'");
  return *p;
}

std::vector<const Explanation*> Corpus::explanations_of(std::string_view item_id,
                                                        std::optional<Author> author) const {
  std::vector<const Explanation*> out;
  for (const auto& e : explanations_) {
    if (e.item_id == item_id && (!author || e.author == *author)) out.push_back(&e);
  }
  return out;
}

std::vector<const Highlight*> Corpus::highlights_of(std::string_view item_id) const {
  std::vector<const Highlight*> out;
  for (const auto& h : highlights_) {
    if (h.item_id == item_id) out.push_back(&h);
  }
  return out;
}

const TokenizedSentence& Corpus::premise_tokens(std::string_view item_id) const {
  auto it = tokens_.find(item_id);
  if (it == tokens_.end()) throw ParamError("unknown item '" + std::string(item_id) + "'");
  return it->second.premise;
}

const TokenizedSentence& Corpus::hypothesis_tokens(std::string_view item_id) const {
  auto it = tokens_.find(item_id);
  if (it == tokens_.end()) throw ParamError("unknown item '" + std::string(item_id) + "'");
  return it->second.hypothesis;
}

CorpusCounts Corpus::counts() const {
  CorpusCounts c;
  c.items = items_.size();
  c.explanations = explanations_.size();
  for (const auto& e : explanations_) {
    (e.author == Author::human ? c.human_explanations : c.model_explanations)++;
  }
  c.highlights = highlights_.size();
  return c;
}

// ---------------------------------------------------------------------------
// Native JSONL

Corpus read_native_jsonl(std::istream& in) {
  std::vector<NliItem> items;
  std::vector<Explanation> expls;
  std::vector<Highlight> highlights;
  SourceLines src;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw RowError(lineno, std::string("invalid JSON: ") + e.what());
    }
    try {
      const std::string kind = require_string(j, "kind");
      if (kind == "item") {
        items.push_back(item_from_record(j));
        src.items.push_back(lineno);
      } else if (kind == "explanation") {
        expls.push_back(explanation_from_record(j));
        src.explanations.push_back(lineno);
      } else if (kind == "highlight") {
        highlights.push_back(highlight_from_record(j));
        src.highlights.push_back(lineno);
      } else {
        throw ParamError("unknown record kind '" + kind + "'");
      }
    } catch (const ParamError& e) {
      throw RowError(lineno, e.what());
    }
  }
  return build(std::move(items), std::move(expls), std::move(highlights), src);
}

void write_native_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& it : corpus.items()) out << dump_line(to_record(it)) << '\n';
  for (const auto& e : corpus.explanations()) out << dump_line(to_record(e)) << '\n';
  for (const auto& h : corpus.highlights()) out << dump_line(to_record(h)) << '\n';
}

void write_native_jsonl(std::ostream& out, const std::vector<Explanation>& explanations) {
  for (const auto& e : explanations) out << dump_line(to_record(e)) << '\n';
}

Corpus merge(const Corpus& base, const std::vector<Explanation>& extra_explanations,
             const std::vector<Highlight>& extra_highlights) {
  auto expls = base.explanations();
  expls.insert(expls.end(), extra_explanations.begin(), extra_explanations.end());
  auto hls = base.highlights();
  hls.insert(hls.end(), extra_highlights.begin(), extra_highlights.end());
  return Corpus(base.items(), std::move(expls), std::move(hls));
}

// ---------------------------------------------------------------------------
// e-SNLI CSV

namespace {

// RFC 4180 record reader; records may span physical lines inside quotes.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Returns false at end of input. start_line is the 1-based line on which
  // the record began.
  bool next(std::vector<std::string>& fields, std::size_t& start_line) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    start_line = line_ + 1;
    int ch;
    while ((ch = in_.get()) != EOF) {
      any = true;
      const char c = static_cast<char>(ch);
      if (in_quotes) {
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == '"') {
        in_quotes = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\n') {
        ++line_;
        fields.push_back(std::move(field));
        return true;
      } else if (c != '\r') {
        field.push_back(c);
      }
    }
    if (in_quotes) throw RowError(start_line, "unterminated quoted field");
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

// Maps highlighted token positions of `from` onto `to` through a token-level
// LCS alignment. Used when the marked sentence tokenises slightly differently
// from the plain sentence column.
IndexSet align_indices(const std::vector<std::string>& from, const std::vector<std::string>& to,
                       const IndexSet& indices) {
  if (from == to) return indices;
  const std::size_t n = from.size(), m = to.size();
  std::vector<std::vector<std::size_t>> dp(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      dp[i][j] = from[i] == to[j] ? dp[i + 1][j + 1] + 1 : std::max(dp[i + 1][j], dp[i][j + 1]);
    }
  }
  IndexSet out;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (from[i] == to[j]) {
      if (indices.count(i)) out.insert(j);
      ++i;
      ++j;
    } else if (dp[i + 1][j] >= dp[i][j + 1]) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& sp : token_spans(s)) out.emplace_back(s.substr(sp.begin, sp.end - sp.begin));
  return out;
}

}  // namespace

Corpus read_esnli_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> header, row;
  std::size_t lineno = 0;
  if (!reader.next(header, lineno)) throw RowError(1, "empty CSV");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"pairID", "gold_label", "Sentence1", "Sentence2"}) {
    if (!col.count(required)) throw RowError(lineno, std::string("missing column '") + required + "'");
  }
  std::vector<int> groups;
  for (int k = 1; k <= 3; ++k) {
    if (col.count("Explanation_" + std::to_string(k))) groups.push_back(k);
  }
  if (groups.empty()) throw RowError(lineno, "no Explanation_k column");

  std::vector<NliItem> items;
  std::vector<Explanation> expls;
  std::vector<Highlight> highlights;
  SourceLines src;

  while (reader.next(row, lineno)) {
    if (row.size() == 1 && blank(row[0])) continue;
    if (row.size() != header.size()) {
      throw RowError(lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(row.size()));
    }
    auto cell = [&](const std::string& name) -> const std::string& { return row[col.at(name)]; };
    NliItem item;
    item.item_id = cell("pairID");
    item.premise = cell("Sentence1");
    item.hypothesis = cell("Sentence2");
    auto g = gold_label_from_string(cell("gold_label"));
    if (!g) throw RowError(lineno, "unknown gold_label '" + cell("gold_label") + "'");
    item.gold_label = *g;
    if (item.item_id.empty()) throw RowError(lineno, "empty pairID");
    items.push_back(item);
    src.items.push_back(lineno);

    const auto premise_words = words(item.premise);
    const auto hypothesis_words = words(item.hypothesis);
    for (int k : groups) {
      const std::string ks = std::to_string(k);
      const std::string& text = cell("Explanation_" + ks);
      if (blank(text)) continue;
      Explanation e;
      e.expl_id = item.item_id + ":" + ks;
      e.item_id = item.item_id;
      e.text = text;
      e.author = Author::human;
      if (col.count("Taxonomy_" + ks) && !blank(cell("Taxonomy_" + ks))) {
        auto c = category_from_string(cell("Taxonomy_" + ks));
        if (!c) throw RowError(lineno, "unknown taxonomy '" + cell("Taxonomy_" + ks) + "'");
        e.taxonomy = *c;
      }
      expls.push_back(e);
      src.explanations.push_back(lineno);

      const std::string m1 = "Sentence1_marked_" + ks, m2 = "Sentence2_marked_" + ks;
      if (col.count(m1) && col.count(m2)) {
        Highlight h;
        h.item_id = item.item_id;
        h.expl_id = e.expl_id;
        try {
          auto p = parse_in_text(cell(m1), "*");
          auto q = parse_in_text(cell(m2), "*");
          h.premise_indices = align_indices(words(p.plain), premise_words, p.indices);
          h.hypothesis_indices = align_indices(words(q.plain), hypothesis_words, q.indices);
        } catch (const MarkerError& err) {
          throw RowError(lineno, err.what());
        }
        highlights.push_back(std::move(h));
        src.highlights.push_back(lineno);
      }
    }
  }
  return build(std::move(items), std::move(expls), std::move(highlights), src);
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParamError("cannot open corpus file '" + path.string() + "'");
  return format == CorpusFormat::native_jsonl ? read_native_jsonl(in) : read_esnli_csv(in);
}

Corpus merge_fragment(const Corpus& base, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParamError("cannot open file '" + path.string() + "'");
  std::vector<Explanation> expls;
  std::vector<Highlight> highlights;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw RowError(lineno, std::string("invalid JSON: ") + e.what());
    }
    try {
      const std::string kind = require_string(j, "kind");
      if (kind == "item") {
        const NliItem it = item_from_record(j);
        const NliItem* known = base.find_item(it.item_id);
        if (!known) throw IntegrityError("item '" + it.item_id + "' is not in the corpus", lineno);
        if (!(*known == it)) throw IntegrityError("item '" + it.item_id + "' differs from the corpus", lineno);
      } else if (kind == "explanation") {
        expls.push_back(explanation_from_record(j));
      } else if (kind == "highlight") {
        highlights.push_back(highlight_from_record(j));
      } else {
        throw ParamError("unknown record kind '" + kind + "'");
      }
    } catch (const ParamError& e) {
      throw RowError(lineno, e.what());
    }
  }
  return merge(base, expls, highlights);
}

}  // namespace nlx
