#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlx/corpus.hpp"
#include "nlx/labels.hpp"

namespace nlx {

enum class ReasoningGroup { text_based, world_knowledge };

struct TaxonomyCategory {
  int index = 0;
  Category id = Category::Coreference;
  std::string_view name;         // display name, e.g. "Logic Conflict"
  ReasoningGroup group = ReasoningGroup::text_based;
  std::string_view question;     // annotator guiding question
  std::string_view check;        // annotator decision criterion
  std::string_view description;  // one-line definition used inside prompts
};

const std::array<TaxonomyCategory, kCategoryCount>& taxonomy();

// Throws InvalidCategory outside 1..8.
const TaxonomyCategory& category_by_index(int index);
const TaxonomyCategory& category_info(Category c);

struct ClassifierPromptConfig {
  bool with_instruction = false;
  int examples_per_category = 0;  // 0..2

  // Short stable tag, e.g. "instr0_k2"; used in prediction files and reports.
  std::string tag() const;
  bool operator==(const ClassifierPromptConfig&) const = default;
};

// The six configurations in canonical order: (F,0),(T,0),(F,1),(F,2),(T,1),(T,2).
const std::array<ClassifierPromptConfig, 6>& classifier_configs();
// Throws ParamError for anything outside the six.
void validate(const ClassifierPromptConfig& config);
ClassifierPromptConfig parse_config_tag(std::string_view tag);

struct Exemplar {
  Category category = Category::Coreference;
  std::string premise;
  std::string hypothesis;
  GoldLabel gold_label = GoldLabel::entailment;
  std::string explanation;
};

class ExemplarStore {
 public:
  ExemplarStore() = default;
  explicit ExemplarStore(std::vector<Exemplar> exemplars);

  // Exemplars of one category in file order.
  const std::vector<Exemplar>& of(Category c) const;
  std::size_t size() const { return total_; }
  bool empty() const { return total_ == 0; }

  // Throws ExemplarError naming the first category with fewer than `per_category`.
  void require(int per_category) const;

 private:
  std::map<Category, std::vector<Exemplar>> by_category_;
  std::size_t total_ = 0;
};

// Line-delimited {category, premise, hypothesis, gold_label, explanation}.
ExemplarStore load_exemplars(const std::filesystem::path& path);

std::string build_classifier_prompt(const ClassifierPromptConfig& config, const NliItem& item,
                                    const Explanation& expl, const ExemplarStore& exemplars);

// Category of the first standalone integer in 1..8; nullopt marks an invalid
// prediction. Never throws.
std::optional<Category> parse_classifier_output(std::string_view raw);

}  // namespace nlx
