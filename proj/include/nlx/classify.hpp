#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nlx/agreement.hpp"
#include "nlx/corpus.hpp"
#include "nlx/llm_client.hpp"
#include "nlx/taxonomy.hpp"

namespace nlx {

inline constexpr const char* kExternalConfig = "external";

struct PredictionRecord {
  std::string expl_id;
  std::optional<Category> predicted;  // nullopt: output held no valid index
  std::string raw_output;             // verbatim model text
  std::string config;                 // prompt config tag, baseline name or "external"
  std::string model_id;
  std::optional<DecodingParams> decoding;

  bool valid() const { return predicted.has_value(); }
  bool operator==(const PredictionRecord&) const = default;
};

struct ClassifyOptions {
  DecodingParams decoding;
  std::size_t max_workers = 4;
};

struct ClassifyOutcome {
  std::vector<PredictionRecord> records;  // corpus order, completed units only
  std::vector<std::string> missing;       // expl_ids whose calls failed
};

// One call per human explanation. Transport failures are collected, not thrown.
ClassifyOutcome run_classification(LlmClient& client, const ClassifierPromptConfig& config,
                                   const Corpus& corpus, const ExemplarStore& exemplars,
                                   const ClassifyOptions& options = {});

// As run_classification, but throws PartialRunError if any unit is missing.
std::vector<PredictionRecord> classify_explanations(LlmClient& client,
                                                    const ClassifierPromptConfig& config,
                                                    const Corpus& corpus,
                                                    const ExemplarStore& exemplars,
                                                    const ClassifyOptions& options = {});

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold count
};

struct ClassificationReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t invalid_count = 0;
  double accuracy = 0.0;
  double macro_p = 0.0, macro_r = 0.0, macro_f1 = 0.0;
  double weighted_p = 0.0, weighted_r = 0.0, weighted_f1 = 0.0;
  std::array<ClassScores, kCategoryCount> per_class{};
  ConfusionMatrix confusion;                             // gold x valid prediction, 8 x 8
  std::array<std::size_t, kCategoryCount> invalid_by_gold{};  // the "invalid" column

  double invalid_rate() const { return total ? static_cast<double>(invalid_count) / total : 0.0; }
};

// Invalid predictions count as wrong and enlarge the gold class's recall
// denominator, but never any precision denominator. Zero-division scores are 0.
// Throws ParamError if an expl_id has no gold taxonomy label.
ClassificationReport evaluate(const std::vector<PredictionRecord>& predictions, const Corpus& gold);

struct BaselineKind {
  enum class Type { random, majority } type = Type::majority;
  std::uint64_t seed = 0;

  static BaselineKind random(std::uint64_t seed) { return {Type::random, seed}; }
  static BaselineKind majority() { return {Type::majority, 0}; }
};

// random: i.i.d. uniform over the 8 categories from a seeded generator.
// majority: the most frequent training label, ties to the lower index.
std::vector<PredictionRecord> baseline_predict(const BaselineKind& kind,
                                               const std::vector<Category>& train_labels,
                                               const std::vector<std::string>& target_expl_ids);

// Ids of labeled human explanations and their labels, in corpus order.
std::vector<std::string> labeled_human_ids(const Corpus& corpus);
std::vector<Category> labels_of(const Corpus& corpus, const std::vector<std::string>& expl_ids);

// Line-delimited {expl_id, predicted_index | "invalid", raw_output, model_id}
// plus optional config and decoding. Index outside 1..8 raises
// InvalidCategory; an expl_id missing from the corpus raises IntegrityError.
std::vector<PredictionRecord> load_external_predictions(const std::filesystem::path& path,
                                                        const Corpus& corpus);
std::vector<PredictionRecord> read_predictions(std::istream& in, const Corpus& corpus);
void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records);

}  // namespace nlx
