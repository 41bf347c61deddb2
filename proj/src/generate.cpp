#include "nlx/generate.hpp"

#include <fstream>
#include <mutex>
#include <regex>

#include "nlx/errors.hpp"
#include "nlx/hash.hpp"
#include "nlx/json_io.hpp"

namespace nlx {

namespace {

constexpr std::string_view kExpert = "You are an expert in Natural Language Inference (NLI). ";

std::string gold(const NliItem& item) { return std::string(to_string(item.gold_label)); }

std::string category_line(const TaxonomyCategory& c) {
  return std::to_string(c.index) + ". " + std::string(c.name) + ": " + std::string(c.description);
}

std::string index_list_or_none(const IndexSet& s) {
  return s.empty() ? std::string("none") : format_index_list(s);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> lines_of(std::string_view raw) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= raw.size()) {
    const auto nl = raw.find('\n', start);
    const auto end = nl == std::string_view::npos ? raw.size() : nl;
    out.push_back(trim(raw.substr(start, end - start)));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

bool ends_with_colon(const std::string& s) {
  std::string t = s;
  while (!t.empty() && t.back() == '*') t.pop_back();
  return !t.empty() && t.back() == ':';
}

// Strips one leading list marker; returns nullopt when the line has none.
std::optional<std::string> bullet_body(const std::string& line) {
  static const std::regex numbered(R"(^\d{1,2}[.)]\s+(.*)$)");
  static const std::string kBullet = "\xE2\x80\xA2";   // U+2022
  static const std::string kEnDash = "\xE2\x80\x93";   // U+2013
  if (line.rfind("**", 0) == 0) return std::nullopt;   // bold text, not a bullet
  for (const std::string& m : {std::string("-"), std::string("*"), kBullet, kEnDash}) {
    if (line.rfind(m, 0) == 0) {
      const std::string rest = line.substr(m.size());
      if (rest.empty() || rest[0] == ' ' || rest[0] == '\t') return trim(rest);
    }
  }
  std::smatch m;
  if (std::regex_match(line, m, numbered)) return trim(m[1].str());
  return std::nullopt;
}

std::string unbold(std::string s) {
  if (s.size() >= 4 && s.rfind("**", 0) == 0 && s.compare(s.size() - 2, 2, "**") == 0 &&
      s.find("**", 2) == s.size() - 2) {
    s = trim(s.substr(2, s.size() - 4));
  }
  return s;
}

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::string_view to_string(GenerationStep step) {
  switch (step) {
    case GenerationStep::explain: return "explain";
    case GenerationStep::stage_one: return "stage_one";
    case GenerationStep::highlight: return "highlight";
  }
  return "explain";
}

std::string_view to_string(HintSource source) {
  return source == HintSource::human ? "human" : "model";
}

std::optional<HintSource> hint_source_from_string(std::string_view s) {
  if (s == "human") return HintSource::human;
  if (s == "model") return HintSource::model;
  return std::nullopt;
}

void validate(const GenerationRequest& r) {
  const bool highlight_paradigm =
      r.paradigm == Paradigm::highlight_indexed || r.paradigm == Paradigm::highlight_intext;
  switch (r.step) {
    case GenerationStep::stage_one:
      if (r.paradigm != Paradigm::taxonomy_two_stage) {
        throw ParamError("stage-one requests belong to the two-stage paradigm");
      }
      if (r.taxonomy_hint || r.highlight_hint) throw ParamError("stage-one requests take no hints");
      return;
    case GenerationStep::highlight:
      if (r.taxonomy_hint || r.highlight_hint) throw ParamError("highlight requests take no hints");
      return;
    case GenerationStep::explain:
      break;
  }
  if (r.taxonomy_hint.has_value() != (r.paradigm == Paradigm::taxonomy_two_stage)) {
    throw ParamError("a category hint is required for, and only for, two-stage generation");
  }
  if (r.highlight_hint.has_value() != highlight_paradigm) {
    throw ParamError("a highlight hint is required for, and only for, highlight paradigms");
  }
  if (r.highlight_hint && r.highlight_hint->item_id != r.item.item_id) {
    throw ParamError("highlight hint belongs to another item");
  }
}

std::string build_generation_prompt(const GenerationRequest& r, const ExemplarStore& exemplars) {
  validate(r);
  const NliItem& it = r.item;
  std::string p;

  if (r.step == GenerationStep::highlight) {
    p += "You are an expert in NLI. Based on the label '" + gold(it) +
         "', highlight relevant word indices in the premise and hypothesis. Highlighting rules:\n";
    p += "- For entailment: highlight at least one word in the premise.\n";
    p += "- For contradiction: highlight at least one word in both the premise and the hypothesis.\n";
    p += "- For neutral: highlight only in the hypothesis.\n\n";
    p += "Premise: " + it.premise + ", Hypothesis: " + it.hypothesis + ", Label: " + gold(it) + "\n\n";
    p += "Please list **3** possible highlights using word index in the sentence without "
         "introductory phrases. Answer using word indices **starting from 0** and include "
         "punctuation marks as tokens (count them). Respond strictly this format:\n\n";
    p += "Highlight 1:\n\nPremise_Highlighted: [Your chosen index(es) here]\n\n"
         "Hypothesis_Highlighted: [Your chosen index(es) here]\n\nHighlight 2:\n...";
    return p;
  }

  if (r.step == GenerationStep::stage_one) {
    exemplars.require(1);
    p += kExpert;
    p += "Your task is to identify all applicable reasoning categories for explanations from the "
         "list below that could reasonably support the label. Please choose at least one category "
         "and multiple categories may apply. One example for each category is listed as below:\n\n\n";
    for (const auto& c : taxonomy()) {
      const Exemplar& e = exemplars.of(c.id).front();
      p += category_line(c) + "\n";
      p += "Example: Premise: " + e.premise + ", Hypothesis: " + e.hypothesis +
           ", Label: " + std::string(to_string(e.gold_label)) + ", Explanation: " + e.explanation +
           "\n\n";
    }
    p += "\nGiven the following premise and hypothesis, identify the applicable explanation categories:\n\n";
    p += "Premise: " + it.premise + ", Hypothesis: " + it.hypothesis + ", Label: " + gold(it) + "\n\n";
    p += "Respond only with the numbers corresponding to the applicable categories, separated by "
         "commas, and no additional explanation.";
    return p;
  }

  switch (r.paradigm) {
    case Paradigm::baseline:
      p += kExpert;
      p += "Please list all possible explanations for why the following statement is " + gold(it) +
           " given the content below without introductory phrases.\n\n";
      p += "Context: " + it.premise + ", Statement: " + it.hypothesis;
      break;

    case Paradigm::highlight_indexed:
      p += kExpert;
      p += "Your task is to generate possible explanations for why the following statement is " +
           gold(it) + ", focusing on the highlighted parts of the sentences.\n\n";
      p += "Context: " + it.premise + ", Highlighted word indices in Context: " +
           index_list_or_none(r.highlight_hint->premise_indices) + "\n\n";
      p += "Statement: " + it.hypothesis + ", Highlighted word indices in Statement: " +
           index_list_or_none(r.highlight_hint->hypothesis_indices) + "\n\n";
      p += "Please list all possible explanations without introductory phrases.";
      break;

    case Paradigm::highlight_intext: {
      const auto marked = render_in_text(it, *r.highlight_hint);
      p += kExpert;
      p += "Your task is to generate possible explanations for why the following statement is " +
           gold(it) + ", focusing on the highlighted parts of the sentences. "
           "Highlighted parts are marked in '**'.\n\n";
      p += "Context: " + marked.premise + "  Statement: " + marked.hypothesis + "\n\n";
      p += "Please list all possible explanations without introductory phrases.";
      break;
    }

    case Paradigm::taxonomy_two_stage: {
      const auto& c = category_info(*r.taxonomy_hint);
      if (exemplars.of(c.id).empty()) {
        throw ExemplarError("no exemplar for category " + std::string(to_string(c.id)));
      }
      const Exemplar& e = exemplars.of(c.id).front();
      p += kExpert;
      p += "Given the following taxonomy with description and one example, generate as many "
           "possible explanations as you can that specifically match the reasoning type described "
           "below. The explanation is for why the following statement is " + gold(it) +
           ", given the content.\n\n";
      p += "The explanation category for generation is:\n" + category_line(c) + "\n\n";
      p += "Here is an example:\nPremise: " + e.premise + ", Hypothesis: " + e.hypothesis + "\n\n";
      p += "Label: " + std::string(to_string(e.gold_label)) + ", Explanation: " + e.explanation + "\n\n\n";
      p += "Now, consider the following premise and hypothesis:\n\n";
      p += "Context: " + it.premise + "\nStatement: " + it.hypothesis + "\n\n";
      p += "Please list all possible explanations for the given category without introductory phrases.";
      break;
    }

    case Paradigm::taxonomy_end_to_end:
      p += kExpert;
      p += "Your task is to examine the relationship between the following content and statement "
           "under the given gold label, and:\n";
      p += "First, identify all categories for explanations from the list below (you may choose "
           "more than one) that could reasonably support the label.\n";
      p += "Second, for each selected category, generate all possible explanations that reflect "
           "that type.\n\n";
      p += "The explanation categories are:\n\n";
      for (const auto& c : taxonomy()) p += category_line(c) + "\n";
      p += "\nContext: " + it.premise + ", Statement: " + it.hypothesis + ", Label: " + gold(it) + "\n\n";
      p += "Please list all possible explanations without introductory phrases for all the chosen "
           "categories.\n\n";
      p += "Start directly with the category number and explanation, following the strict format below:\n\n";
      p += "1. Coreference: - [Your explanation(s) here]\n\n";
      p += "... (continue for all reasonable categories)";
      break;
  }
  return p;
}

std::set<Category> parse_stage_one(std::string_view raw) {
  std::set<Category> out;
  std::size_t i = 0;
  while (i < raw.size()) {
    if (!is_digit(raw[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < raw.size() && is_digit(raw[j])) ++j;
    const bool standalone = (i == 0 || !is_alpha(raw[i - 1])) && (j == raw.size() || !is_alpha(raw[j]));
    if (standalone && j - i == 1 && raw[i] >= '1' && raw[i] <= '8') {
      out.insert(static_cast<Category>(raw[i] - '0'));
    }
    i = j;
  }
  if (out.empty()) throw StageOneParseError(std::string(raw));
  return out;
}

EndToEndParse parse_end_to_end(std::string_view raw) {
  static const std::regex header(
      R"(^(?:#+\s*)?(?:\*\*)?\s*(\d{1,2})\s*[.)]\s*(?:\*\*)?\s*([A-Za-z][A-Za-z \-]*?)\s*(?:\*\*)?\s*:\s*(?:\*\*)?\s*(.*)$)");
  EndToEndParse out;
  std::optional<Category> current;  // nullopt while inside a skipped block
  bool in_block = false;
  std::optional<std::string> pending;

  auto flush = [&] {
    if (pending && current && !pending->empty()) out.explanations.push_back({*current, *pending});
    pending.reset();
  };
  auto take = [&](const std::string& line) {
    if (line.empty()) {
      flush();
      return;
    }
    if (auto body = bullet_body(line)) {
      flush();
      if (!body->empty()) pending = unbold(*body);
    } else if (pending) {
      *pending += " " + line;
    } else {
      pending = unbold(line);
    }
  };

  for (const auto& line : lines_of(raw)) {
    std::smatch m;
    if (std::regex_match(line, m, header)) {
      const int n = std::stoi(m[1].str());
      const auto named = category_from_string(m[2].str());
      const bool known = n >= 1 && n <= kCategoryCount && named && index_of(*named) == n;
      flush();
      in_block = true;
      current = known ? std::optional<Category>(*named) : std::nullopt;
      if (!known) out.skipped_headers.push_back(line);
      take(trim(m[3].str()));
      continue;
    }
    if (in_block) take(line);
  }
  flush();
  if (out.explanations.empty()) throw EndToEndParseError(std::string(raw));
  return out;
}

std::vector<HighlightCandidate> parse_highlight_output(std::string_view raw, const NliItem& item) {
  static const std::regex field(
      R"(^[*#\s]*(premise|hypothesis)[\\_ ]*highlighted\s*\**\s*:\s*\**\s*(.*)$)", std::regex::icase);
  const std::size_t np = tokenize(item.premise).tokens.size();
  const std::size_t nh = tokenize(item.hypothesis).tokens.size();

  auto list_text = [](std::string s) {
    s = trim(s);
    if (!s.empty() && s[0] == '[') {
      const auto close = s.find(']');
      if (close != std::string::npos) s = s.substr(0, close + 1);
    }
    return s;
  };

  std::vector<HighlightCandidate> out;
  std::size_t parsed = 0;
  std::optional<std::string> premise_text;

  auto finish = [&](const std::optional<std::string>& ptxt, const std::optional<std::string>& htxt) {
    HighlightCandidate c;
    c.highlight.item_id = item.item_id;
    if (!ptxt || !htxt) {
      c.problems.push_back(ptxt ? "missing Hypothesis_Highlighted" : "missing Premise_Highlighted");
      out.push_back(std::move(c));
      return;
    }
    try {
      c.highlight.premise_indices = parse_index_list(list_text(*ptxt));
      c.highlight.hypothesis_indices = parse_index_list(list_text(*htxt));
    } catch (const ParamError& e) {
      c.problems.push_back(std::string("unparsable index list: ") + e.what());
      out.push_back(std::move(c));
      return;
    }
    ++parsed;
    const bool oob = (!c.highlight.premise_indices.empty() && *c.highlight.premise_indices.rbegin() >= np) ||
                     (!c.highlight.hypothesis_indices.empty() && *c.highlight.hypothesis_indices.rbegin() >= nh);
    if (oob) {
      c.problems.push_back("out of bounds");
    } else {
      auto verdict = check_highlight_validity(item, c.highlight);
      c.valid = verdict.valid;
      c.problems = std::move(verdict.violated);
    }
    out.push_back(std::move(c));
  };

  for (const auto& line : lines_of(raw)) {
    std::smatch m;
    if (!std::regex_match(line, m, field)) continue;
    std::string side = m[1].str();
    for (char& ch : side) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (side == "premise") {
      if (premise_text) finish(premise_text, std::nullopt);
      premise_text = m[2].str();
    } else {
      finish(premise_text, m[2].str());
      premise_text.reset();
    }
  }
  if (premise_text) finish(premise_text, std::nullopt);
  if (parsed == 0) throw HighlightParseError(std::string(raw));
  return out;
}

std::vector<std::string> split_explanations(std::string_view raw) {
  const auto lines = lines_of(raw);
  bool any_bullet = false;
  for (const auto& l : lines) any_bullet = any_bullet || bullet_body(l).has_value();

  std::vector<std::string> out;
  if (!any_bullet) {
    for (const auto& l : lines) {
      if (!l.empty() && !ends_with_colon(l)) out.push_back(unbold(l));
    }
    return out;
  }
  std::optional<std::string> current;
  bool seen_bullet = false;
  auto flush = [&] {
    if (current && !current->empty()) out.push_back(*current);
    current.reset();
  };
  for (const auto& l : lines) {
    if (l.empty()) {
      flush();
      continue;
    }
    if (auto body = bullet_body(l)) {
      flush();
      seen_bullet = true;
      if (!ends_with_colon(*body)) current = unbold(*body);
      continue;
    }
    if (!seen_bullet || ends_with_colon(l)) {
      flush();
      continue;
    }
    if (current) {
      *current += " " + l;
    } else {
      current = unbold(l);
    }
  }
  flush();
  return out;
}

std::set<Category> predict_categories_stage1(LlmClient& client, const NliItem& item,
                                             const ExemplarStore& exemplars,
                                             const DecodingParams& decoding) {
  GenerationRequest r{item, Paradigm::taxonomy_two_stage, GenerationStep::stage_one, {}, {},
                      client.model_id(), decoding};
  return parse_stage_one(client.complete(build_generation_prompt(r, exemplars), decoding));
}

std::vector<HighlightCandidate> generate_highlights(LlmClient& client, const NliItem& item,
                                                    const DecodingParams& decoding) {
  GenerationRequest r{item, Paradigm::highlight_indexed, GenerationStep::highlight, {}, {},
                      client.model_id(), decoding};
  return parse_highlight_output(client.complete(build_generation_prompt(r), decoding), item);
}

namespace {

struct ItemRunner {
  LlmClient& client;
  const Corpus& corpus;
  const ExemplarStore& exemplars;
  const GenerationOptions& options;
  Paradigm paradigm;
  HintSource hints;

  std::string call(GeneratedBatch& batch, const GenerationRequest& r) {
    const std::string prompt = build_generation_prompt(r, exemplars);
    std::string raw = client.complete(prompt, options.decoding);
    batch.calls.push_back({r.step, r.taxonomy_hint, sha256_hex(prompt), raw});
    return raw;
  }

  void add(GeneratedBatch& batch, const std::string& text, ExplanationTag tag) {
    Explanation e;
    e.expl_id = batch.item_id + "/" + std::string(to_string(paradigm)) + "/" + client.model_id() +
                "/" + std::to_string(batch.explanations.size() + 1);
    e.item_id = batch.item_id;
    e.text = text;
    e.author = Author::model;
    e.paradigm = paradigm;
    e.taxonomy = tag.category;
    batch.explanations.push_back(std::move(e));
    batch.tags.push_back(std::move(tag));
  }

  void add_split(GeneratedBatch& batch, const std::string& raw, const ExplanationTag& tag) {
    const auto texts = split_explanations(raw);
    if (texts.empty()) throw ParseError("no explanation found in model output", raw);
    for (const auto& t : texts) add(batch, t, tag);
  }

  std::vector<Highlight> highlight_hints(GeneratedBatch& batch, const NliItem& item) {
    std::vector<Highlight> out;
    auto push_unique = [&](Highlight h) {
      h.expl_id.reset();
      for (const auto& o : out) {
        if (o.premise_indices == h.premise_indices && o.hypothesis_indices == h.hypothesis_indices) return;
      }
      out.push_back(std::move(h));
    };
    if (hints == HintSource::human) {
      for (const auto* h : corpus.highlights_of(item.item_id)) push_unique(*h);
      if (out.empty()) throw ParamError("item '" + item.item_id + "' has no human highlights");
      return out;
    }
    GenerationRequest r{item, paradigm, GenerationStep::highlight, {}, {}, client.model_id(),
                        options.decoding};
    batch.highlight_candidates = parse_highlight_output(call(batch, r), item);
    for (const auto& c : batch.highlight_candidates) {
      if (c.valid) push_unique(c.highlight);
    }
    if (out.empty()) {
      // Nothing satisfies the label rules; fall back to in-bounds candidates.
      for (const auto& c : batch.highlight_candidates) {
        const bool usable = std::find(c.problems.begin(), c.problems.end(), "out of bounds") == c.problems.end() &&
                            (c.problems.empty() || c.problems[0].rfind("unparsable", 0) != 0) &&
                            (c.problems.empty() || c.problems[0].rfind("missing", 0) != 0);
        if (usable) push_unique(c.highlight);
      }
    }
    if (out.empty()) throw ParamError("no usable highlight candidate for item '" + item.item_id + "'");
    return out;
  }

  GeneratedBatch run(const NliItem& item) {
    GeneratedBatch batch;
    batch.item_id = item.item_id;
    batch.item = item;
    batch.paradigm = paradigm;
    GenerationRequest base{item, paradigm, GenerationStep::explain, {}, {}, client.model_id(),
                           options.decoding};
    switch (paradigm) {
      case Paradigm::baseline:
        add_split(batch, call(batch, base), {});
        break;
      case Paradigm::highlight_indexed:
      case Paradigm::highlight_intext:
        for (const auto& h : highlight_hints(batch, item)) {
          GenerationRequest r = base;
          r.highlight_hint = h;
          add_split(batch, call(batch, r), {std::nullopt, h});
        }
        break;
      case Paradigm::taxonomy_two_stage: {
        GenerationRequest s1 = base;
        s1.step = GenerationStep::stage_one;
        const auto categories = parse_stage_one(call(batch, s1));
        for (Category c : categories) {
          GenerationRequest r = base;
          r.taxonomy_hint = c;
          add_split(batch, call(batch, r), {c, std::nullopt});
        }
        break;
      }
      case Paradigm::taxonomy_end_to_end: {
        const auto parsed = parse_end_to_end(call(batch, base));
        for (const auto& t : parsed.explanations) add(batch, t.text, {t.category, std::nullopt});
        break;
      }
    }
    return batch;
  }
};

}  // namespace

std::vector<Explanation> GenerationRun::explanations() const {
  std::vector<Explanation> out;
  for (const auto& [id, b] : batches) out.insert(out.end(), b.explanations.begin(), b.explanations.end());
  return out;
}

std::vector<Highlight> GenerationRun::highlights() const {
  std::vector<Highlight> out;
  for (const auto& [id, b] : batches) {
    for (std::size_t i = 0; i < b.explanations.size(); ++i) {
      if (!b.tags[i].highlight) continue;
      Highlight h = *b.tags[i].highlight;
      h.item_id = b.item_id;
      h.expl_id = b.explanations[i].expl_id;
      out.push_back(std::move(h));
    }
  }
  return out;
}

GenerationRun run_paradigm(LlmClient& client, const Corpus& corpus, Paradigm paradigm,
                           HintSource hints, const ExemplarStore& exemplars,
                           const GenerationOptions& options) {
  GenerationRun run;
  run.model_id = client.model_id();
  run.paradigm = paradigm;
  run.hints = hints;
  run.decoding = options.decoding;

  const auto& items = corpus.items();
  std::vector<std::optional<GeneratedBatch>> batches(items.size());
  std::vector<std::string> errors(items.size());
  ItemRunner runner{client, corpus, exemplars, options, paradigm, hints};
  parallel_for(items.size(), options.max_workers, [&](std::size_t i) {
    try {
      batches[i] = runner.run(items[i]);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (batches[i]) {
      run.batches.emplace(items[i].item_id, std::move(*batches[i]));
    } else {
      run.failed.emplace(items[i].item_id, errors[i]);
    }
  }
  return run;
}

void write_run_directory(const GenerationRun& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream requests(dir / "requests.jsonl", std::ios::binary | std::ios::trunc);
  std::ofstream raws(dir / "raw_outputs.jsonl", std::ios::binary | std::ios::trunc);
  std::ofstream cands(dir / "highlight_candidates.jsonl", std::ios::binary | std::ios::trunc);
  std::size_t n_expl = 0, n_calls = 0;
  for (const auto& [item_id, b] : run.batches) {
    for (const auto& c : b.calls) {
      json req{{"item_id", item_id},
               {"step", std::string(to_string(c.step))},
               {"prompt_sha256", c.prompt_sha},
               {"model_id", run.model_id}};
      if (c.category) req["category"] = std::string(to_string(*c.category));
      requests << dump_line(req) << '\n';
      req.erase("model_id");
      req["raw_output"] = c.raw_output;
      raws << dump_line(req) << '\n';
      ++n_calls;
    }
    for (const auto& c : b.highlight_candidates) {
      cands << dump_line({{"item_id", item_id},
                          {"premise_indices", index_set_to_json(c.highlight.premise_indices)},
                          {"hypothesis_indices", index_set_to_json(c.highlight.hypothesis_indices)},
                          {"valid", c.valid},
                          {"problems", c.problems}})
            << '\n';
    }
    n_expl += b.explanations.size();
  }
  {
    std::vector<NliItem> items;
    for (const auto& [id, b] : run.batches) items.push_back(b.item);
    std::ofstream gen(dir / "generations.jsonl", std::ios::binary | std::ios::trunc);
    write_native_jsonl(gen, Corpus(std::move(items), run.explanations(), run.highlights()));
  }
  json failed = json::object();
  for (const auto& [id, msg] : run.failed) failed[id] = msg;
  const json manifest{{"model_id", run.model_id},
                      {"paradigm", std::string(to_string(run.paradigm))},
                      {"hint_source", std::string(to_string(run.hints))},
                      {"decoding", run.decoding.to_json()},
                      {"prompt_template_version", kPromptTemplateVersion},
                      {"items_generated", run.batches.size()},
                      {"items_failed", run.failed.size()},
                      {"calls", n_calls},
                      {"explanations", n_expl},
                      {"failed", failed}};
  std::ofstream(dir / "manifest.json", std::ios::binary | std::ios::trunc) << manifest.dump(2) << '\n';
}

}  // namespace nlx
