#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nlx/errors.hpp"
#include "nlx/generate.hpp"

using namespace nlx;
namespace fs = std::filesystem;

namespace {

const Corpus& small_corpus() {
  static const Corpus c = load_corpus(NLX_FIXTURES "/corpus_small.jsonl", CorpusFormat::native_jsonl);
  return c;
}

const ExemplarStore& exemplars() {
  static const ExemplarStore s = load_exemplars(NLX_DATA_DIR "/exemplars.jsonl");
  return s;
}

const NliItem& item(const std::string& id) { return small_corpus().item(id); }

bool contains(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

bool is_stage_one(const std::string& p) { return contains(p, "identify all applicable reasoning categories"); }
bool is_highlight(const std::string& p) { return contains(p, "highlight relevant word indices"); }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

GenerationRequest explain_request(const std::string& id, Paradigm p) {
  GenerationRequest r;
  r.item = item(id);
  r.paradigm = p;
  return r;
}

}  // namespace

TEST(GenerationPrompt, BaselineIsExact) {
  const auto prompt = build_generation_prompt(explain_request("i1", Paradigm::baseline));
  EXPECT_EQ(prompt,
            "You are an expert in Natural Language Inference (NLI). Please list all possible "
            "explanations for why the following statement is entailment given the content below "
            "without introductory phrases.\n\nContext: A man in a red shirt is playing guitar on a "
            "stage., Statement: A man is playing an instrument.");
}

TEST(GenerationPrompt, IndexedHintListsIndices) {
  auto r = explain_request("i2", Paradigm::highlight_indexed);
  r.highlight_hint = Highlight{"i2", std::nullopt, {}, {3, 5}};
  const auto prompt = build_generation_prompt(r);
  EXPECT_TRUE(contains(prompt, "Highlighted word indices in Context: none\n"));
  EXPECT_TRUE(contains(prompt, "Highlighted word indices in Statement: 3,5\n"));
  EXPECT_TRUE(contains(prompt, "statement is neutral, focusing on the highlighted parts"));
}

TEST(GenerationPrompt, InTextHintMarksTokens) {
  auto r = explain_request("i1", Paradigm::highlight_intext);
  r.highlight_hint = Highlight{"i1", std::nullopt, {8}, {5}};
  const auto prompt = build_generation_prompt(r);
  EXPECT_TRUE(contains(prompt, "Highlighted parts are marked in '**'."));
  EXPECT_TRUE(contains(prompt, "Context: A man in a red shirt is playing **guitar** on a stage."));
  EXPECT_TRUE(contains(prompt, "Statement: A man is playing an **instrument**."));
}

TEST(GenerationPrompt, TwoStageNamesOneCategory) {
  auto r = explain_request("i3", Paradigm::taxonomy_two_stage);
  r.taxonomy_hint = Category::LogicConflict;
  const auto prompt = build_generation_prompt(r, exemplars());
  EXPECT_TRUE(contains(prompt, "The explanation category for generation is:\n6. Logic Conflict: "));
  EXPECT_TRUE(contains(prompt, "Here is an example:\nPremise: "));
  EXPECT_TRUE(contains(prompt, "Context: A woman is sleeping on a couch.\nStatement: "));
  EXPECT_FALSE(contains(prompt, "7. Factual Knowledge"));
  EXPECT_THROW(build_generation_prompt(r, ExemplarStore{}), ExemplarError);
}

TEST(GenerationPrompt, EndToEndListsAllCategories) {
  const auto prompt = build_generation_prompt(explain_request("i3", Paradigm::taxonomy_end_to_end));
  for (const auto& c : taxonomy()) {
    EXPECT_TRUE(contains(prompt, std::to_string(c.index) + ". " + std::string(c.name) + ": "));
  }
  EXPECT_TRUE(contains(prompt, "Label: contradiction"));
  EXPECT_TRUE(contains(prompt, "1. Coreference: - [Your explanation(s) here]"));
}

TEST(GenerationPrompt, StageOneAndHighlightSteps) {
  auto s1 = explain_request("i1", Paradigm::taxonomy_two_stage);
  s1.step = GenerationStep::stage_one;
  const auto p1 = build_generation_prompt(s1, exemplars());
  EXPECT_TRUE(is_stage_one(p1));
  for (const auto& c : taxonomy()) EXPECT_TRUE(contains(p1, std::to_string(c.index) + ". " + std::string(c.name)));
  EXPECT_TRUE(contains(p1, "separated by commas, and no additional explanation."));

  auto h = explain_request("i1", Paradigm::highlight_indexed);
  h.step = GenerationStep::highlight;
  const auto p2 = build_generation_prompt(h);
  EXPECT_TRUE(is_highlight(p2));
  EXPECT_TRUE(contains(p2, "Based on the label 'entailment'"));
  EXPECT_TRUE(contains(p2, "Premise_Highlighted: [Your chosen index(es) here]"));
}

TEST(GenerationPrompt, HintsMustFitParadigm) {
  auto r = explain_request("i1", Paradigm::taxonomy_two_stage);
  EXPECT_THROW(validate(r), ParamError);
  r.paradigm = Paradigm::baseline;
  r.highlight_hint = Highlight{"i1", std::nullopt, {1}, {1}};
  EXPECT_THROW(validate(r), ParamError);
  r.paradigm = Paradigm::highlight_indexed;
  EXPECT_NO_THROW(validate(r));
  r.highlight_hint->item_id = "i2";
  EXPECT_THROW(validate(r), ParamError);
  auto s = explain_request("i1", Paradigm::baseline);
  s.step = GenerationStep::stage_one;
  EXPECT_THROW(validate(s), ParamError);
}

TEST(StageOneParser, DistinctIndicesInRange) {
  using C = Category;
  EXPECT_EQ(parse_stage_one("3,3,5."), (std::set<C>{C::Semantic, C::AbsenceOfMention}));
  EXPECT_EQ(parse_stage_one("Categories: 10, 2 and 8"), (std::set<C>{C::Syntactic, C::InferentialKnowledge}));
  EXPECT_EQ(parse_stage_one("**1**, 7"), (std::set<C>{C::Coreference, C::FactualKnowledge}));
  try {
    parse_stage_one("none apply, 0 or 9");
    FAIL() << "expected StageOneParseError";
  } catch (const StageOneParseError& e) {
    EXPECT_EQ(e.raw_output(), "none apply, 0 or 9");
  }
}

TEST(EndToEndParser, BlocksWithMarkdownAndContinuations) {
  const std::string raw =
      "Here are the explanations:\n"
      "\n"
      "**3. Semantic:**\n"
      "- Sleeping and running are different activities.\n"
      "- A person lying on a couch\n"
      "  is not running.\n"
      "\n"
      "### 6. Logic Conflict: - One cannot sleep and run at once.\n"
      "9. Other: - ignored text\n"
      "- also ignored\n"
      "2. Semantic: - mismatched header\n"
      "5. Absence of Mention:\n"
      "* The premise never mentions a marathon.\n";
  const auto parsed = parse_end_to_end(raw);
  ASSERT_EQ(parsed.explanations.size(), 4u);
  EXPECT_EQ(parsed.explanations[0].category, Category::Semantic);
  EXPECT_EQ(parsed.explanations[0].text, "Sleeping and running are different activities.");
  EXPECT_EQ(parsed.explanations[1].text, "A person lying on a couch is not running.");
  EXPECT_EQ(parsed.explanations[2].category, Category::LogicConflict);
  EXPECT_EQ(parsed.explanations[2].text, "One cannot sleep and run at once.");
  EXPECT_EQ(parsed.explanations[3].category, Category::AbsenceOfMention);
  EXPECT_EQ(parsed.skipped_headers.size(), 2u);
  EXPECT_THROW(parse_end_to_end("Nothing structured here."), EndToEndParseError);
}

TEST(HighlightParser, FlagsInsteadOfDropping) {
  const std::string raw =
      "Highlight 1:\n"
      "Premise_Highlighted: [8]\n"
      "Hypothesis_Highlighted: [5]\n"
      "\n"
      "**Highlight 2:**\n"
      "**Premise\\_Highlighted:** [40]\n"
      "**Hypothesis\\_Highlighted:** [1]\n"
      "Highlight 3:\n"
      "Premise_Highlighted: []\n"
      "Hypothesis_Highlighted: [3, 5] (playing, instrument)\n"
      "Highlight 4:\n"
      "Premise_Highlighted: [two]\n"
      "Hypothesis_Highlighted: [1]\n";
  const auto c = parse_highlight_output(raw, item("i1"));
  ASSERT_EQ(c.size(), 4u);
  EXPECT_TRUE(c[0].valid);
  EXPECT_EQ(c[0].highlight.premise_indices, IndexSet{8});
  EXPECT_FALSE(c[1].valid);
  EXPECT_EQ(c[1].problems, std::vector<std::string>{"out of bounds"});
  EXPECT_FALSE(c[2].valid);  // entailment needs a premise word
  EXPECT_EQ(c[2].highlight.hypothesis_indices, (IndexSet{3, 5}));
  EXPECT_FALSE(c[3].valid);
  ASSERT_FALSE(c[3].problems.empty());
  EXPECT_EQ(c[3].problems[0].rfind("unparsable", 0), 0u);
  EXPECT_THROW(parse_highlight_output("I would highlight guitar.", item("i1")), HighlightParseError);
}

TEST(SplitExplanations, ListsAndPlainLines) {
  EXPECT_EQ(split_explanations("Here are some explanations:\n\n1. First one.\n2. Second\ncontinues.\n- Third."),
            (std::vector<std::string>{"First one.", "Second continues.", "Third."}));
  EXPECT_EQ(split_explanations("Alpha.\n\nBeta.\nReasons:\n"), (std::vector<std::string>{"Alpha.", "Beta."}));
  EXPECT_EQ(split_explanations("- **Bold one.**\n- Sub-list:\n  - nested."),
            (std::vector<std::string>{"Bold one.", "nested."}));
  EXPECT_TRUE(split_explanations("\n  \n").empty());
}

TEST(RunParadigm, TwoStageMakesOneCallPerPredictedCategory) {
  MockClient mock("m", [](const std::string& p) -> std::string {
    if (is_stage_one(p)) return "3, 5";
    return contains(p, "3. Semantic") ? "- sem a\n- sem b" : "- absent";
  });
  Corpus one({item("i2")}, {}, {});
  const auto run = run_paradigm(mock, one, Paradigm::taxonomy_two_stage, HintSource::human, exemplars());
  ASSERT_TRUE(run.failed.empty());
  const auto& b = run.batches.at("i2");
  ASSERT_EQ(b.calls.size(), 3u);
  EXPECT_EQ(b.calls[0].step, GenerationStep::stage_one);
  EXPECT_EQ(b.calls[1].category, Category::Semantic);
  EXPECT_EQ(b.calls[2].category, Category::AbsenceOfMention);
  ASSERT_EQ(b.explanations.size(), 3u);
  EXPECT_EQ(b.explanations[0].taxonomy, Category::Semantic);
  EXPECT_EQ(b.explanations[2].taxonomy, Category::AbsenceOfMention);
  EXPECT_EQ(b.explanations[2].text, "absent");
  for (const auto& e : b.explanations) {
    EXPECT_EQ(e.author, Author::model);
    EXPECT_EQ(e.paradigm, Paradigm::taxonomy_two_stage);
  }
  EXPECT_EQ(mock.calls(), 3u);
}

TEST(RunParadigm, HumanHighlightHintsOneCallEach) {
  MockClient mock("m", [](const std::string&) { return "- because"; });
  const auto run = run_paradigm(mock, small_corpus(), Paradigm::highlight_indexed, HintSource::human, exemplars());
  ASSERT_TRUE(run.failed.empty());
  const auto& b = run.batches.at("i1");
  EXPECT_EQ(b.calls.size(), 3u);
  const auto hls = run.highlights();
  EXPECT_EQ(hls.size(), run.explanations().size());
  for (const auto& h : hls) {
    ASSERT_TRUE(h.expl_id.has_value());
    EXPECT_EQ(small_corpus().find_explanation(*h.expl_id), nullptr);
  }
}

TEST(RunParadigm, ModelHighlightHintsUseValidCandidates) {
  MockClient mock("m", [](const std::string& p) -> std::string {
    if (is_highlight(p)) {
      return "Premise_Highlighted: [8]\nHypothesis_Highlighted: [5]\n"
             "Premise_Highlighted: [99]\nHypothesis_Highlighted: [5]\n";
    }
    return "- e";
  });
  Corpus one({item("i1")}, {}, {});
  const auto run = run_paradigm(mock, one, Paradigm::highlight_intext, HintSource::model, exemplars());
  const auto& b = run.batches.at("i1");
  EXPECT_EQ(b.highlight_candidates.size(), 2u);
  ASSERT_EQ(b.calls.size(), 2u);
  EXPECT_EQ(b.calls[0].step, GenerationStep::highlight);
  ASSERT_EQ(b.tags.size(), 1u);
  EXPECT_EQ(b.tags[0].highlight->premise_indices, IndexSet{8});
}

TEST(RunParadigm, ItemFailuresAreCollected) {
  MockClient mock("m", [](const std::string& p) -> std::string {
    if (contains(p, "Two dogs run")) return "no structure";
    return "1. Coreference: - x";
  });
  const auto run = run_paradigm(mock, small_corpus(), Paradigm::taxonomy_end_to_end, HintSource::human, exemplars());
  EXPECT_EQ(run.batches.size(), 4u);
  ASSERT_EQ(run.failed.size(), 1u);
  EXPECT_TRUE(run.failed.count("i2"));
}

TEST(RunParadigm, DeterministicAcrossWorkersAndCache) {
  auto answer = [](const std::string& p) { return "- about " + std::to_string(p.size()) + "\n- second"; };
  const fs::path cache = fs::temp_directory_path() / "nlx_gen_cache";
  const fs::path out_a = fs::temp_directory_path() / "nlx_gen_a";
  const fs::path out_b = fs::temp_directory_path() / "nlx_gen_b";
  for (const auto& d : {cache, out_a, out_b}) fs::remove_all(d);

  MockClient first("m", answer);
  GenerationOptions serial;
  serial.max_workers = 1;
  GenerationRun a;
  {
    CachedClient cached(first, cache, RetryPolicy{1, std::chrono::milliseconds(0)});
    a = run_paradigm(cached, small_corpus(), Paradigm::baseline, HintSource::human, exemplars(), serial);
  }
  MockClient offline("m", [](const std::string&) -> std::string { throw TransportError("offline"); });
  CachedClient cached(offline, cache, RetryPolicy{1, std::chrono::milliseconds(0)});
  GenerationOptions wide;
  wide.max_workers = 8;
  const auto b = run_paradigm(cached, small_corpus(), Paradigm::baseline, HintSource::human, exemplars(), wide);
  EXPECT_EQ(offline.calls(), 0u);
  EXPECT_TRUE(b.failed.empty());
  EXPECT_EQ(a.explanations(), b.explanations());
  EXPECT_EQ(a.explanations().size(), 10u);

  write_run_directory(a, out_a);
  write_run_directory(b, out_b);
  for (const char* f : {"requests.jsonl", "raw_outputs.jsonl", "generations.jsonl", "manifest.json"}) {
    EXPECT_EQ(read_file(out_a / f), read_file(out_b / f)) << f;
    EXPECT_FALSE(read_file(out_a / f).empty()) << f;
  }
  const auto reread = load_corpus(out_a / "generations.jsonl", CorpusFormat::native_jsonl);
  EXPECT_EQ(reread.counts().model_explanations, 10u);
  for (const auto& d : {cache, out_a, out_b}) fs::remove_all(d);
}
