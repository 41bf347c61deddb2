#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace nlx {

enum class GoldLabel { entailment, neutral, contradiction };

enum class Author { human, model };

enum class Paradigm {
  baseline,
  highlight_indexed,
  highlight_intext,
  taxonomy_two_stage,
  taxonomy_end_to_end,
};

// Numbering is fixed: classifier prompts ask for "the number (1-8)" and the
// parsers map that number straight back through this enum.
enum class Category : int {
  Coreference = 1,
  Syntactic = 2,
  Semantic = 3,
  Pragmatic = 4,
  AbsenceOfMention = 5,
  LogicConflict = 6,
  FactualKnowledge = 7,
  InferentialKnowledge = 8,
};

inline constexpr int kCategoryCount = 8;

inline constexpr std::array<Category, kCategoryCount> kAllCategories = {
    Category::Coreference,      Category::Syntactic,     Category::Semantic,
    Category::Pragmatic,        Category::AbsenceOfMention, Category::LogicConflict,
    Category::FactualKnowledge, Category::InferentialKnowledge,
};

inline constexpr std::array<GoldLabel, 3> kAllGoldLabels = {
    GoldLabel::entailment, GoldLabel::neutral, GoldLabel::contradiction};

inline constexpr std::array<Paradigm, 5> kAllParadigms = {
    Paradigm::baseline, Paradigm::highlight_indexed, Paradigm::highlight_intext,
    Paradigm::taxonomy_two_stage, Paradigm::taxonomy_end_to_end};

inline int index_of(Category c) { return static_cast<int>(c); }

// Identifier form used in files and APIs ("AbsenceOfMention").
std::string_view to_string(Category c);
// Human-readable form used in prompts ("Absence of Mention").
std::string_view display_name(Category c);
std::string_view to_string(GoldLabel g);
std::string_view to_string(Author a);
std::string_view to_string(Paradigm p);

std::optional<Category> category_from_string(std::string_view s);
std::optional<GoldLabel> gold_label_from_string(std::string_view s);
std::optional<Author> author_from_string(std::string_view s);
std::optional<Paradigm> paradigm_from_string(std::string_view s);

}  // namespace nlx
