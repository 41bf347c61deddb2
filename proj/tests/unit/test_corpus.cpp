#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nlx/corpus.hpp"
#include "nlx/errors.hpp"
#include "nlx/json_io.hpp"

using namespace nlx;

namespace {

std::vector<std::string> toks(std::string_view s) { return tokenize(s).tokens; }

NliItem make_item(GoldLabel g, std::string premise = "a b c d", std::string hypothesis = "e f g h") {
  return {"x", std::move(premise), std::move(hypothesis), g};
}

Corpus from_text(const std::string& text) {
  std::istringstream in(text);
  return read_native_jsonl(in);
}

}  // namespace

TEST(Tokenize, SplitsTerminalPunctuation) {
  EXPECT_EQ(toks("A man runs."), (std::vector<std::string>{"A", "man", "runs", "."}));
}

TEST(Tokenize, KeepsIntraWordHyphenAndSplitsComma) {
  EXPECT_EQ(toks("Hi-Pointe, here"), (std::vector<std::string>{"Hi-Pointe", ",", "here"}));
}

TEST(Tokenize, KeepsApostrophesAndCase) {
  EXPECT_EQ(toks("Don't STOP!"), (std::vector<std::string>{"Don't", "STOP", "!"}));
}

TEST(Tokenize, PeelsEveryEdgePunctuationMark) {
  EXPECT_EQ(toks("(\"quoted\")..."),
            (std::vector<std::string>{"(", "\"", "quoted", "\"", ")", ".", ".", "."}));
}

TEST(Tokenize, UnicodeWhitespaceAndPunctuation) {
  // U+00A0 no-break space, U+3000 ideographic space, U+201C/U+201D quotes
  EXPECT_EQ(toks("caf\xC3\xA9\xC2\xA0ok\xE3\x80\x80\xE2\x80\x9Chi\xE2\x80\x9D"),
            (std::vector<std::string>{"caf\xC3\xA9", "ok", "\xE2\x80\x9C", "hi", "\xE2\x80\x9D"}));
}

TEST(Tokenize, EmptyAndBlankRaise) {
  EXPECT_THROW(tokenize(""), EmptyText);
  EXPECT_THROW(tokenize(" \t\n"), EmptyText);
}

TEST(Tokenize, ReconstructsNormalizedSource) {
  const std::string src = "The  cat,   sat on the mat .";
  const auto t = tokenize(src);
  std::string joined;
  for (const auto& w : t.tokens) {
    if (!joined.empty() && !(w.size() == 1 && std::ispunct(static_cast<unsigned char>(w[0])))) joined += ' ';
    joined += w;
  }
  EXPECT_EQ(joined, "The cat, sat on the mat.");
  EXPECT_EQ(t.source, src);
}

TEST(Tokenize, Deterministic) {
  const std::string s = "Mixed \xE2\x80\x94 dash; and more!";
  EXPECT_EQ(toks(s), toks(s));
}

TEST(HighlightValidity, EntailmentNeedsPremise) {
  const auto item = make_item(GoldLabel::entailment);
  EXPECT_TRUE(check_highlight_validity(item, {"x", {}, {0}, {}}).valid);
  const auto v = check_highlight_validity(item, {"x", {}, {}, {1}});
  EXPECT_FALSE(v.valid);
  EXPECT_EQ(v.violated, std::vector<std::string>{"entailment: premise required"});
}

TEST(HighlightValidity, NeutralHypothesisOnly) {
  const auto v = check_highlight_validity(make_item(GoldLabel::neutral), {"x", {}, {1}, {0}});
  EXPECT_FALSE(v.valid);
  ASSERT_EQ(v.violated.size(), 1u);
  EXPECT_EQ(v.violated[0], "neutral: hypothesis only");
}

TEST(HighlightValidity, ContradictionNeedsHypothesis) {
  const auto v = check_highlight_validity(make_item(GoldLabel::contradiction), {"x", {}, {0}, {}});
  EXPECT_FALSE(v.valid);
  EXPECT_EQ(v.violated, std::vector<std::string>{"contradiction: hypothesis required"});
}

TEST(HighlightValidity, OutOfBoundsRaises) {
  EXPECT_THROW(check_highlight_validity(make_item(GoldLabel::neutral), {"x", {}, {}, {4}}),
               BoundsError);
}

// Exhaustive over every subset pair of sentences up to 4 tokens.
TEST(HighlightValidity, ExhaustiveAgainstRuleOracle) {
  const std::vector<std::string> sentences = {"a", "a b", "a b c", "a b c d"};
  for (const auto& ps : sentences) {
    for (const auto& hs : sentences) {
      const std::size_t np = toks(ps).size(), nh = toks(hs).size();
      for (GoldLabel g : kAllGoldLabels) {
        const auto item = make_item(g, ps, hs);
        for (unsigned pm = 0; pm < (1u << np); ++pm) {
          for (unsigned hm = 0; hm < (1u << nh); ++hm) {
            Highlight h{"x", {}, {}, {}};
            for (std::size_t i = 0; i < np; ++i) if (pm >> i & 1u) h.premise_indices.insert(i);
            for (std::size_t i = 0; i < nh; ++i) if (hm >> i & 1u) h.hypothesis_indices.insert(i);
            bool expected = false;
            switch (g) {
              case GoldLabel::entailment: expected = pm != 0; break;
              case GoldLabel::contradiction: expected = pm != 0 && hm != 0; break;
              case GoldLabel::neutral: expected = pm == 0 && hm != 0; break;
            }
            const auto v = check_highlight_validity(item, h);
            ASSERT_EQ(v.valid, expected);
            ASSERT_EQ(v.valid, v.violated.empty());
          }
        }
      }
    }
  }
}

TEST(InText, RenderExamples) {
  EXPECT_EQ(render_in_text("a red hat", {1}), "a **red** hat");
  EXPECT_EQ(render_in_text("a red hat", {}), "a red hat");
  EXPECT_EQ(render_in_text("a red hat", {0, 2}), "**a** red **hat**");
}

TEST(InText, RenderGluesAdjacentTokens) {
  EXPECT_EQ(render_in_text("A man runs.", {2, 3}), "A man **runs.**");
  EXPECT_EQ(render_in_text("A man runs.", {3}), "A man runs**.**");
}

TEST(InText, RenderRejectsBadInput) {
  EXPECT_THROW(render_in_text("a red hat", {3}), BoundsError);
  EXPECT_THROW(render_in_text("a **red** hat", {0}), MarkerError);
}

TEST(InText, ParseExamples) {
  EXPECT_EQ(parse_in_text("a **red** hat").indices, IndexSet{1});
  const auto p = parse_in_text("plain text");
  EXPECT_TRUE(p.indices.empty());
  EXPECT_EQ(p.plain, "plain text");
  EXPECT_THROW(parse_in_text("bad **text"), MarkerError);
}

TEST(InText, ParseMultiTokenRegion) {
  const auto p = parse_in_text("**two dogs** run.");
  EXPECT_EQ(p.plain, "two dogs run.");
  EXPECT_EQ(p.indices, (IndexSet{0, 1}));
}

TEST(InText, RoundTripAllSubsets) {
  const std::vector<std::string> sentences = {"A man, smiling, rides a bike.", "Kids are outside.",
                                              "It's (very) well-known!"};
  for (const auto& s : sentences) {
    const std::size_t n = toks(s).size();
    for (unsigned m = 0; m < (1u << n); ++m) {
      IndexSet idx;
      for (std::size_t i = 0; i < n; ++i) if (m >> i & 1u) idx.insert(i);
      const auto parsed = parse_in_text(render_in_text(s, idx));
      ASSERT_EQ(parsed.indices, idx) << render_in_text(s, idx);
      ASSERT_EQ(parsed.plain, s);
    }
  }
}

TEST(InText, RoundTripOnItemPair) {
  const NliItem item{"x", "A red hat.", "A hat.", GoldLabel::entailment};
  const Highlight h{"x", {}, {1, 3}, {1}};
  const auto marked = render_in_text(item, h);
  EXPECT_EQ(marked.premise, "A **red** hat**.**");
  EXPECT_EQ(parse_in_text(marked.premise).indices, h.premise_indices);
  EXPECT_EQ(parse_in_text(marked.hypothesis).indices, h.hypothesis_indices);
}

TEST(IndexList, FormatAndParse) {
  EXPECT_EQ(format_index_list({0, 3, 4}), "0,3,4");
  EXPECT_EQ(format_index_list({}), "");
  EXPECT_EQ(parse_index_list("[1, 2]"), (IndexSet{1, 2}));
  EXPECT_EQ(parse_index_list("1,2"), (IndexSet{1, 2}));
  EXPECT_EQ(parse_index_list("1 2"), (IndexSet{1, 2}));
  EXPECT_TRUE(parse_index_list("[]").empty());
  EXPECT_TRUE(parse_index_list("none").empty());
  EXPECT_THROW(parse_index_list("one, two"), ParamError);
}

TEST(Corpus, LoadsFixture) {
  const auto c = load_corpus(NLX_FIXTURES "/corpus_small.jsonl", CorpusFormat::native_jsonl);
  const auto n = c.counts();
  EXPECT_EQ(n.items, 5u);
  EXPECT_EQ(n.explanations, 15u);
  EXPECT_EQ(n.human_explanations, 15u);
  EXPECT_EQ(n.highlights, 15u);
  EXPECT_EQ(c.explanations_of("i2").size(), 3u);
  EXPECT_EQ(c.premise_tokens("i1").tokens.size(), 13u);
  ASSERT_NE(c.find_explanation("i3:2"), nullptr);
  EXPECT_EQ(c.find_explanation("i3:2")->taxonomy, Category::LogicConflict);
}

TEST(Corpus, TwoItemsSixExplanations) {
  std::string text;
  for (int i = 1; i <= 2; ++i) {
    const std::string id = "it" + std::to_string(i);
    text += R"({"kind":"item","item_id":")" + id +
            R"(","premise":"A dog runs.","hypothesis":"An animal moves.","gold_label":"entailment"})" "\n";
    for (int k = 1; k <= 3; ++k) {
      text += R"({"kind":"explanation","expl_id":")" + id + "-" + std::to_string(k) +
              R"(","item_id":")" + id + R"(","text":"A dog is an animal.","author":"human"})" "\n";
    }
  }
  const auto c = from_text(text);
  EXPECT_EQ(c.counts().items, 2u);
  EXPECT_EQ(c.counts().explanations, 6u);
}

TEST(Corpus, HighlightOutOfRangeNamesRow) {
  const std::string text =
      R"({"kind":"item","item_id":"a","premise":"A dog runs.","hypothesis":"It moves.","gold_label":"entailment"})" "\n"
      R"({"kind":"highlight","item_id":"a","premise_indices":[0],"hypothesis_indices":[3]})" "\n";
  try {
    from_text(text);
    FAIL() << "expected IntegrityError";
  } catch (const IntegrityError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Corpus, MalformedRowRaisesRowError) {
  const std::string text =
      R"({"kind":"item","item_id":"a","premise":"A dog runs.","hypothesis":"It moves.","gold_label":"entailment"})" "\n"
      "{not json}\n";
  try {
    from_text(text);
    FAIL() << "expected RowError";
  } catch (const RowError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(from_text(R"({"item_id":"a"})" "\n"), RowError);
  EXPECT_THROW(
      from_text(R"({"kind":"item","item_id":"a","premise":"x","hypothesis":"y","gold_label":"maybe"})" "\n"),
      RowError);
}

TEST(Corpus, IntegrityRules) {
  const std::string item =
      R"({"kind":"item","item_id":"a","premise":"A dog runs.","hypothesis":"It moves.","gold_label":"entailment"})" "\n";
  // dangling item reference
  EXPECT_THROW(from_text(item + R"({"kind":"explanation","expl_id":"e","item_id":"b","text":"t","author":"human"})" "\n"),
               IntegrityError);
  // duplicate item id
  EXPECT_THROW(from_text(item + item), IntegrityError);
  // model without paradigm, human with paradigm
  EXPECT_THROW(from_text(item + R"({"kind":"explanation","expl_id":"e","item_id":"a","text":"t","author":"model"})" "\n"),
               IntegrityError);
  EXPECT_THROW(from_text(item + R"({"kind":"explanation","expl_id":"e","item_id":"a","text":"t","author":"human","paradigm":"baseline"})" "\n"),
               IntegrityError);
  // parent from another item
  const std::string item_b =
      R"({"kind":"item","item_id":"b","premise":"A cat.","hypothesis":"An animal.","gold_label":"entailment"})" "\n";
  EXPECT_THROW(from_text(item + item_b +
                         R"({"kind":"explanation","expl_id":"e1","item_id":"a","text":"t","author":"human"})" "\n"
                         R"({"kind":"explanation","expl_id":"e2","item_id":"b","text":"t","author":"human","parent_expl_id":"e1"})" "\n"),
               IntegrityError);
  // valid lineage
  const auto ok = from_text(item +
                            R"({"kind":"explanation","expl_id":"e1","item_id":"a","text":"t","author":"human"})" "\n"
                            R"({"kind":"explanation","expl_id":"e2","item_id":"a","text":"u","author":"human","parent_expl_id":"e1"})" "\n");
  EXPECT_EQ(ok.find_explanation("e2")->parent_expl_id, std::optional<std::string>("e1"));
}

TEST(Corpus, NativeRoundTrip) {
  const auto c = load_corpus(NLX_FIXTURES "/corpus_small.jsonl", CorpusFormat::native_jsonl);
  std::ostringstream out;
  write_native_jsonl(out, c);
  const auto again = from_text(out.str());
  EXPECT_EQ(again.items(), c.items());
  EXPECT_EQ(again.explanations(), c.explanations());
  EXPECT_EQ(again.highlights(), c.highlights());
  std::ostringstream out2;
  write_native_jsonl(out2, again);
  EXPECT_EQ(out.str(), out2.str());
}

TEST(Corpus, EsnliAdapter) {
  const auto c = load_corpus(NLX_FIXTURES "/esnli_small.csv", CorpusFormat::esnli_csv);
  EXPECT_EQ(c.counts().items, 2u);
  EXPECT_EQ(c.counts().explanations, 4u);
  const auto* e = c.find_explanation("p2:2");
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->text, "The topic isn't given, \"cats\" is new.");
  const auto hs = c.highlights_of("p1");
  ASSERT_EQ(hs.size(), 2u);
  // "A man, smiling, rides a bike." -> A man , smiling , rides a bike .
  EXPECT_EQ(hs[0]->premise_indices, IndexSet{1});
  EXPECT_EQ(hs[0]->hypothesis_indices, IndexSet{1});
  EXPECT_EQ(hs[1]->premise_indices, IndexSet{5});
  EXPECT_EQ(c.highlights_of("p2")[0]->hypothesis_indices, IndexSet{4});
}

TEST(Corpus, MergeAddsModelExplanations) {
  const auto c = load_corpus(NLX_FIXTURES "/corpus_small.jsonl", CorpusFormat::native_jsonl);
  Explanation m{"g1", "i1", "An instrument is being played.", Author::model, {}, {}, Paradigm::baseline};
  const auto merged = merge(c, {m});
  EXPECT_EQ(merged.counts().model_explanations, 1u);
  EXPECT_EQ(merged.explanations_of("i1", Author::model).size(), 1u);
  EXPECT_THROW(merge(c, {Explanation{"i1:1", "i1", "dup", Author::human, {}, {}, {}}}), IntegrityError);
}

TEST(Corpus, MergeFragmentFile) {
  const auto dir = std::filesystem::temp_directory_path() / "nlx_fragment_test";
  std::filesystem::create_directories(dir);
  const Corpus base({{"i", "A dog runs.", "An animal moves.", GoldLabel::entailment}}, {}, {});
  const std::string expl = dump_line(to_record(
      Explanation{"i/m/1", "i", "Dogs are animals.", Author::model, {}, {}, Paradigm::baseline}));
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  };
  const Corpus merged = merge_fragment(base, write("plain.jsonl", expl + "\n"));
  EXPECT_EQ(merged.counts().model_explanations, 1u);
  EXPECT_EQ(merge_fragment(base, write("with_item.jsonl", dump_line(to_record(base.items()[0])) + "\n" + expl + "\n"))
                .counts()
                .model_explanations,
            1u);
  NliItem changed = base.items()[0];
  changed.hypothesis = "Something else.";
  EXPECT_THROW(merge_fragment(base, write("changed.jsonl", dump_line(to_record(changed)) + "\n")), IntegrityError);
  EXPECT_THROW(merge_fragment(base, write("bad.jsonl", "{\"kind\":\"vote\"}\n")), RowError);
  EXPECT_THROW(merge_fragment(base, dir / "missing.jsonl"), ParamError);
  std::filesystem::remove_all(dir);
}
