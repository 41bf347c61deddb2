#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlx/agreement.hpp"
#include "nlx/annotation_store.hpp"
#include "nlx/classify.hpp"
#include "nlx/corpus.hpp"
#include "nlx/coverage.hpp"
#include "nlx/metrics.hpp"

namespace nlx {

inline constexpr int kGoldLabelCount = 3;
int index_of(GoldLabel g);  // 0..2 in entailment, neutral, contradiction order

// ---------------------------------------------------------------------------
// Annotation analyses. All of them read human explanations with a category.

struct CategoryDistribution {
  // counts[category index - 1][gold label]
  std::array<std::array<std::size_t, kGoldLabelCount>, kCategoryCount> counts{};

  std::size_t category_total(Category c) const;
  std::size_t total() const;
};

// Throws ParamError when no human explanation carries a category.
CategoryDistribution report_category_distribution(const Corpus& corpus);

// Buckets: 0 = one distinct category, 1 = two, 2 = three or more.
inline constexpr int kCategoryBuckets = 3;
int category_bucket(std::size_t distinct_categories);  // throws ParamError on 0

struct ItemsByCategoryCount {
  // counts[bucket][gold label], over items with at least one labeled
  // human explanation.
  std::array<std::array<std::size_t, kGoldLabelCount>, kCategoryBuckets> counts{};

  std::size_t bucket_total(int bucket) const;
  std::size_t label_total(GoldLabel g) const;
  std::size_t total() const;
};

ItemsByCategoryCount report_items_by_category_count(const Corpus& corpus);

struct SpanLength {
  double premise_mean = 0.0;
  double hypothesis_mean = 0.0;
  std::size_t highlights = 0;
};

// Highlights linked to a labeled human explanation, averaged per category.
// A category without highlights stays nullopt.
std::array<std::optional<SpanLength>, kCategoryCount> report_span_length_by_category(const Corpus& corpus);

struct ValidationCounts {
  std::size_t q1_yes = 0, q1_no = 0, q2_yes = 0, q2_no = 0;
  std::size_t total() const { return q1_yes + q1_no; }
};

// Per prompted category of the validated model explanation. Throws
// IntegrityError for a record naming an unknown explanation and ParamError
// for one whose explanation has no prompted category.
std::array<ValidationCounts, kCategoryCount> report_validation_rates(const Corpus& corpus,
                                                                     const std::vector<ValidationRecord>& records);

// ---------------------------------------------------------------------------
// Similarity analyses

struct GenerationScores {
  std::string mode;  // paradigm name
  CorpusScores scores;
  std::size_t skipped_items = 0;  // items without a human reference
};

// Best-reference scores of the model explanations against the human ones of
// the same item, aggregated per item then over items. One row per paradigm
// present, in paradigm order.
std::vector<GenerationScores> score_generations(const Corpus& corpus, Embedder& embedder,
                                                const PosTagger& tagger, std::size_t max_workers);

struct WithinLabelBucket {
  std::size_t items = 0;
  std::size_t pairs = 0;
  SimilarityVector mean;  // over all pooled pairs; zero when pairs == 0
};

// Pairwise similarity of the labeled human explanations of each item with
// at least two of them, pooled by the item's distinct-category bucket.
std::array<WithinLabelBucket, kCategoryBuckets> report_within_label(const Corpus& corpus, Embedder& embedder,
                                                                    const PosTagger& tagger,
                                                                    std::size_t max_workers);

// ---------------------------------------------------------------------------
// Agreement between two annotators

// One annotator's labels and highlights. Lines may be annotation log records
// (latest timestamp wins), explanation records with a category, or highlight
// records; item records are ignored.
struct AnnotatorRecords {
  std::map<std::string, Category> labels;  // by expl_id
  std::map<std::pair<std::string, std::string>, Highlight> highlights;  // by (item_id, expl_id)
};

AnnotatorRecords load_annotator_records(const std::filesystem::path& path);

struct AgreementResult {
  std::size_t shared_labels = 0;
  std::optional<double> kappa;  // nullopt without shared labels
  ConfusionMatrix confusion;    // rows: first annotator
  std::size_t shared_highlights = 0;
  std::optional<double> mean_iou;
};

AgreementResult agreement_between(const AnnotatorRecords& a, const AnnotatorRecords& b);

// ---------------------------------------------------------------------------
// CSV writers. `header` is written first, verbatim; percentages use one
// decimal place.

std::string fixed(double value, int decimals);
std::string percent(double fraction);  // 0.1234 -> "12.3"
std::string csv_field(const std::string& s);

void write_similarity_csv(std::ostream& out, const std::string& header, const std::vector<GenerationScores>& rows);
void write_classification_csv(std::ostream& out, const std::string& header,
                              const std::vector<std::pair<std::string, ClassificationReport>>& rows);
// Gold rows by predicted columns plus the invalid column.
void write_classification_confusion_csv(std::ostream& out, const std::string& header, const ClassificationReport& r);
void write_coverage_csv(std::ostream& out, const std::string& header,
                        const std::vector<std::pair<std::string, CorpusCoverage>>& rows);
void write_coverage_items_csv(std::ostream& out, const std::string& header, const std::vector<CoverageStats>& items);
void write_coverage_points_csv(std::ostream& out, const std::string& header, const std::vector<CoverageStats>& items);

struct AgreementRow {
  std::string pair;
  AgreementResult result;
  std::string confusion_path;
};
void write_agreement_csv(std::ostream& out, const std::string& header, const std::vector<AgreementRow>& rows);
void write_confusion_csv(std::ostream& out, const std::string& header, const ConfusionMatrix& m);

void write_category_distribution_csv(std::ostream& out, const std::string& header, const CategoryDistribution& d);
void write_items_by_count_csv(std::ostream& out, const std::string& header, const ItemsByCategoryCount& r);
void write_span_length_csv(std::ostream& out, const std::string& header,
                           const std::array<std::optional<SpanLength>, kCategoryCount>& r);
void write_validation_csv(std::ostream& out, const std::string& header,
                          const std::array<ValidationCounts, kCategoryCount>& r);
void write_within_label_csv(std::ostream& out, const std::string& header,
                            const std::array<WithinLabelBucket, kCategoryBuckets>& r);

}  // namespace nlx
