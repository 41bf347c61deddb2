#include <gtest/gtest.h>

#include "../common/temp_dir.hpp"
#include "nlx/errors.hpp"
#include "nlx/run_config.hpp"

using namespace nlx;

TEST(RunConfig, DefaultsRoundTripThroughText) {
  const RunConfig c;
  EXPECT_EQ(parse_run_config(c.to_text()), c);
}

TEST(RunConfig, EveryKeyParsesAndRoundTrips) {
  const std::string text =
      "# comment\n"
      "corpus = data/x.csv\n"
      "corpus_format = esnli\n"
      "exemplars = ex.jsonl\n"
      "embedder = vector-file:v.jsonl\n"
      "tagger = perceptron:model.bin\n"
      "client = replay:gpt\n"
      "temperature = 0.7\n"
      "top_p = 0.9\n"
      "max_tokens = 256\n"
      "seed = 42\n"
      "cache_dir = /tmp/c\n"
      "max_workers = 8\n"
      "projection = tsne\n"
      "perplexity = 3.5\n";
  const RunConfig c = parse_run_config(text);
  EXPECT_EQ(c.corpus, "data/x.csv");
  EXPECT_EQ(c.corpus_format, CorpusFormat::esnli_csv);
  EXPECT_EQ(c.embedder, "vector-file:v.jsonl");
  EXPECT_EQ(c.client, "replay:gpt");
  EXPECT_DOUBLE_EQ(c.decoding.temperature, 0.7);
  EXPECT_EQ(c.decoding.max_tokens, 256);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.max_workers, 8u);
  EXPECT_EQ(c.projection, ProjectionMethod::tsne);
  EXPECT_EQ(c.projection_config().perplexity, 3.5);
  EXPECT_EQ(c.projection_config().seed, 42u);
  EXPECT_EQ(parse_run_config(c.to_text()), c);
  EXPECT_EQ(c.exemplar_path(), "ex.jsonl");
}

TEST(RunConfig, TextListsEveryKeyInOrder) {
  const std::string text = RunConfig{}.to_text();
  std::size_t pos = 0;
  for (const auto& key : run_config_keys()) {
    const auto at = text.find(key + " = ", pos);
    ASSERT_NE(at, std::string::npos) << key;
    pos = at;
  }
}

TEST(RunConfig, HeaderPrefixesEveryLine) {
  const std::string h = RunConfig{}.header();
  std::size_t lines = 0;
  for (std::size_t i = 0; i < h.size(); i = h.find('\n', i) + 1) {
    EXPECT_EQ(h.compare(i, 2, "# "), 0);
    ++lines;
  }
  EXPECT_EQ(lines, run_config_keys().size());
}

TEST(RunConfig, RejectsBadLines) {
  EXPECT_THROW(parse_run_config("colour = red\n"), ParamError);
  EXPECT_THROW(parse_run_config("seed = -1\n"), ParamError);
  EXPECT_THROW(parse_run_config("seed = 12abc\n"), ParamError);
  EXPECT_THROW(parse_run_config("max_workers = 0\n"), ParamError);
  EXPECT_THROW(parse_run_config("projection = umap\n"), ParamError);
  EXPECT_THROW(parse_run_config("perplexity = 0\n"), ParamError);
  EXPECT_THROW(parse_run_config("just words\n"), ParamError);
  try {
    parse_run_config("seed = 1\n\nbogus = 2\n");
    FAIL();
  } catch (const ParamError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(RunConfig, LoadsFromFile) {
  testing_util::TempDir dir("nlx_run_config");
  testing_util::spit(dir / "c.cfg", "seed = 9\n");
  EXPECT_EQ(load_run_config(dir / "c.cfg").seed, 9u);
  EXPECT_THROW(load_run_config(dir / "missing.cfg"), ParamError);
}
