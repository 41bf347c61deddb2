#include "nlx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "nlx/corpus.hpp"
#include "nlx/errors.hpp"

namespace nlx {

namespace {

using Gram = std::vector<std::string_view>;

std::set<Gram> gram_set(const Tokens& t, int n) {
  std::set<Gram> out;
  const auto order = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + order <= t.size(); ++i) {
    out.emplace(t.begin() + static_cast<std::ptrdiff_t>(i),
                t.begin() + static_cast<std::ptrdiff_t>(i + order));
  }
  return out;
}

std::map<Gram, std::size_t> gram_counts(const Tokens& t, std::size_t order) {
  std::map<Gram, std::size_t> out;
  for (std::size_t i = 0; i + order <= t.size(); ++i) {
    ++out[Gram(t.begin() + static_cast<std::ptrdiff_t>(i),
               t.begin() + static_cast<std::ptrdiff_t>(i + order))];
  }
  return out;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void check_dims(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) {
    throw ParamError("embedding dimensions differ: " + std::to_string(u.dim()) + " vs " +
                     std::to_string(v.dim()));
  }
  if (u.dim() == 0) throw ParamError("empty embedding");
}

// Sum in ascending order so the result does not depend on input order.
double sorted_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

Tokens lowercase(const Tokens& t) {
  Tokens out = t;
  for (auto& w : out) {
    for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

const std::array<std::string_view, SimilarityVector::kSize>& SimilarityVector::column_names() {
  static const std::array<std::string_view, kSize> names = {
      "word_1gram", "word_2gram", "word_3gram", "pos_1gram", "pos_2gram",
      "pos_3gram",  "cosine",     "euclidean",  "bleu",      "rouge_l"};
  return names;
}

std::array<double, SimilarityVector::kSize> SimilarityVector::as_array() const {
  return {word_ngram[0], word_ngram[1], word_ngram[2], pos_ngram[0], pos_ngram[1],
          pos_ngram[2],  cosine,        euclidean_sim, bleu,         rouge_l};
}

SimilarityVector SimilarityVector::from_array(const std::array<double, kSize>& v) {
  SimilarityVector s;
  s.word_ngram = {v[0], v[1], v[2]};
  s.pos_ngram = {v[3], v[4], v[5]};
  s.cosine = v[6];
  s.euclidean_sim = v[7];
  s.bleu = v[8];
  s.rouge_l = v[9];
  return s;
}

double ngram_overlap(const Tokens& a, const Tokens& b, int n) {
  if (n < 1) throw ParamError("n-gram order must be >= 1, got " + std::to_string(n));
  const auto ga = gram_set(a, n);
  const auto gb = gram_set(b, n);
  if (ga.empty() && gb.empty()) return 1.0;
  if (ga.empty() || gb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& g : ga) inter += gb.count(g);
  const std::size_t uni = ga.size() + gb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double pos_ngram_overlap(const Tokens& a, const Tokens& b, int n, const PosTagger& tagger) {
  if (n < 1) throw ParamError("n-gram order must be >= 1, got " + std::to_string(n));
  auto ta = tagger.tag(a);
  auto tb = tagger.tag(b);
  if (ta.size() != a.size() || tb.size() != b.size()) {
    throw TaggerError("tagger " + tagger.id() + " returned a tag sequence of the wrong length");
  }
  return ngram_overlap(ta, tb, n);
}

double bleu(const Tokens& candidate, const std::vector<Tokens>& references) {
  if (candidate.empty()) throw ParamError("BLEU candidate is empty");
  if (references.empty()) throw ParamError("BLEU needs at least one reference");
  constexpr std::size_t kMaxOrder = 4;

  double log_sum = 0.0;
  for (std::size_t order = 1; order <= kMaxOrder; ++order) {
    const auto cand = gram_counts(candidate, order);
    std::map<Gram, std::size_t> max_ref;
    for (const auto& ref : references) {
      for (const auto& [g, c] : gram_counts(ref, order)) {
        auto& slot = max_ref[g];
        slot = std::max(slot, c);
      }
    }
    std::size_t matches = 0, total = 0;
    for (const auto& [g, c] : cand) {
      total += c;
      auto it = max_ref.find(g);
      if (it != max_ref.end()) matches += std::min(c, it->second);
    }
    double p;
    if (order == 1) {
      if (matches == 0) return 0.0;
      p = static_cast<double>(matches) / static_cast<double>(total);
    } else {
      p = static_cast<double>(matches + 1) / static_cast<double>(total + 1);
    }
    log_sum += std::log(p);
  }

  const std::size_t c = candidate.size();
  std::size_t r = references.front().size();
  for (const auto& ref : references) {
    const auto d = [c](std::size_t len) { return len > c ? len - c : c - len; };
    if (d(ref.size()) < d(r) || (d(ref.size()) == d(r) && ref.size() < r)) r = ref.size();
  }
  const double bp =
      c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  const double score = bp * std::exp(log_sum / static_cast<double>(kMaxOrder));
  return std::clamp(score, 0.0, 1.0);
}

double rouge_l(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) throw ParamError("ROUGE-L input is empty");
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  check_dims(u, v);
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    dot += u.values[i] * v.values[i];
    nu += u.values[i] * u.values[i];
    nv += v.values[i] * v.values[i];
  }
  if (nu == 0.0 || nv == 0.0) throw ZeroVector();
  if (u.values == v.values) return 1.0;
  return std::clamp(dot / std::sqrt(nu * nv), -1.0, 1.0);
}

double euclidean_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  check_dims(u, v);
  double sq = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    const double d = u.values[i] - v.values[i];
    sq += d * d;
  }
  return 1.0 / (1.0 + std::sqrt(sq));
}

TextFeatures featurize(std::string_view text, Embedder& embedder, const PosTagger& tagger) {
  TextFeatures f;
  const auto sentence = tokenize(text);
  f.tags = tagger.tag(sentence.tokens);
  if (f.tags.size() != sentence.tokens.size()) {
    throw TaggerError("tagger " + tagger.id() + " returned a tag sequence of the wrong length");
  }
  f.words = lowercase(sentence.tokens);
  f.embedding = embedder.embed(text);
  return f;
}

SimilarityVector pair_similarity(const TextFeatures& candidate, const TextFeatures& reference) {
  SimilarityVector s;
  for (int n = 1; n <= 3; ++n) {
    s.word_ngram[static_cast<std::size_t>(n - 1)] = ngram_overlap(candidate.words, reference.words, n);
    s.pos_ngram[static_cast<std::size_t>(n - 1)] = ngram_overlap(candidate.tags, reference.tags, n);
  }
  s.cosine = cosine_similarity(candidate.embedding, reference.embedding);
  s.euclidean_sim = euclidean_similarity(candidate.embedding, reference.embedding);
  s.bleu = bleu(candidate.words, {reference.words});
  s.rouge_l = rouge_l(candidate.words, reference.words);
  return s;
}

SimilarityVector best_reference_scores(const TextFeatures& candidate,
                                       const std::vector<TextFeatures>& references) {
  if (references.empty()) throw ParamError("best-reference scoring needs at least one reference");
  std::array<double, SimilarityVector::kSize> best;
  best.fill(-std::numeric_limits<double>::infinity());
  for (const auto& ref : references) {
    const auto row = pair_similarity(candidate, ref).as_array();
    for (std::size_t k = 0; k < best.size(); ++k) best[k] = std::max(best[k], row[k]);
  }
  return SimilarityVector::from_array(best);
}

SimilarityVector mean_of(const std::vector<SimilarityVector>& vectors) {
  if (vectors.empty()) throw ParamError("mean of an empty list");
  std::array<double, SimilarityVector::kSize> out{};
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::vector<double> column;
    column.reserve(vectors.size());
    for (const auto& v : vectors) column.push_back(v.as_array()[k]);
    out[k] = sorted_mean(std::move(column));
  }
  return SimilarityVector::from_array(out);
}

CorpusScores aggregate_item_then_corpus(
    const std::map<std::string, std::vector<ScoredExplanation>>& per_item) {
  if (per_item.empty()) throw ParamError("nothing to aggregate");
  std::vector<SimilarityVector> item_means;
  std::vector<double> item_lens;
  CorpusScores out;
  for (const auto& [item_id, scored] : per_item) {
    if (scored.empty()) throw ParamError("item '" + item_id + "' has no scored explanations");
    std::vector<SimilarityVector> rows;
    std::vector<double> lens;
    for (const auto& s : scored) {
      rows.push_back(s.scores);
      lens.push_back(static_cast<double>(s.candidate_len));
    }
    item_means.push_back(mean_of(rows));
    item_lens.push_back(sorted_mean(std::move(lens)));
    out.explanations += scored.size();
  }
  out.mean = mean_of(item_means);
  out.avg_len = sorted_mean(std::move(item_lens));
  out.items = per_item.size();
  return out;
}

std::vector<SimilarityVector> pairwise_within_item_similarity(
    const std::vector<TextFeatures>& explanations) {
  if (explanations.size() < 2) throw ParamError("pairwise similarity needs at least 2 explanations");
  std::vector<SimilarityVector> out;
  for (std::size_t i = 0; i < explanations.size(); ++i) {
    for (std::size_t j = i + 1; j < explanations.size(); ++j) {
      out.push_back(pair_similarity(explanations[i], explanations[j]));
    }
  }
  return out;
}

}  // namespace nlx
