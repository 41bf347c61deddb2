#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nlx/embedder.hpp"
#include "nlx/pos_tagger.hpp"

namespace nlx {

using Tokens = std::vector<std::string>;

// One row of the similarity table. Field order matches the report column
// order: word 1..3-gram, POS 1..3-gram, cosine, Euclidean, BLEU, ROUGE-L.
struct SimilarityVector {
  std::array<double, 3> word_ngram{};
  std::array<double, 3> pos_ngram{};
  double cosine = 0.0;
  double euclidean_sim = 0.0;
  double bleu = 0.0;
  double rouge_l = 0.0;

  static constexpr std::size_t kSize = 10;
  static const std::array<std::string_view, kSize>& column_names();

  std::array<double, kSize> as_array() const;
  static SimilarityVector from_array(const std::array<double, kSize>& values);

  bool operator==(const SimilarityVector&) const = default;
};

// Jaccard coefficient over the distinct n-grams of a and b. Both sides
// without any n-gram of this order score 1; one side without scores 0.
double ngram_overlap(const Tokens& a, const Tokens& b, int n);

// ngram_overlap on tag sequences. Throws TaggerError if the tagger returns
// a sequence of the wrong length.
double pos_ngram_overlap(const Tokens& a, const Tokens& b, int n, const PosTagger& tagger);

// Sentence BLEU, orders 1..4 with uniform weights. Order 1 is unsmoothed;
// orders 2..4 use (matches + 1) / (total + 1). Brevity penalty uses the
// reference length closest to the candidate, shorter on ties.
double bleu(const Tokens& candidate, const std::vector<Tokens>& references);

// LCS-based F1.
double rouge_l(const Tokens& candidate, const Tokens& reference);

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);
double euclidean_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

// Everything the pairwise metrics need from one text, computed once.
struct TextFeatures {
  Tokens words;  // lowercased tokens
  Tokens tags;   // tags of the original-case tokens
  EmbeddingVector embedding;
};

TextFeatures featurize(std::string_view text, Embedder& embedder, const PosTagger& tagger);

// Candidate-versus-reference scores; BLEU and ROUGE-L are directional.
SimilarityVector pair_similarity(const TextFeatures& candidate, const TextFeatures& reference);

// Per metric, the best score against any single reference.
SimilarityVector best_reference_scores(const TextFeatures& candidate,
                                       const std::vector<TextFeatures>& references);

struct ScoredExplanation {
  SimilarityVector scores;
  std::size_t candidate_len = 0;  // token count of the generated text
};

struct CorpusScores {
  SimilarityVector mean;
  double avg_len = 0.0;
  std::size_t items = 0;
  std::size_t explanations = 0;
};

// Mean over each item's explanations, then mean over items. Values are summed
// in sorted order, so any permutation of the input gives identical bits.
CorpusScores aggregate_item_then_corpus(
    const std::map<std::string, std::vector<ScoredExplanation>>& per_item);

// One vector per unordered pair (i < j), with explanation i as candidate.
std::vector<SimilarityVector> pairwise_within_item_similarity(
    const std::vector<TextFeatures>& explanations);

// Order-independent mean of a list of vectors, field by field.
SimilarityVector mean_of(const std::vector<SimilarityVector>& vectors);

}  // namespace nlx
