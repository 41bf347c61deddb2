#include "nlx/labels.hpp"

#include <algorithm>
#include <cctype>

namespace nlx {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryIds = {
    "Coreference",      "Syntactic",     "Semantic",
    "Pragmatic",        "AbsenceOfMention", "LogicConflict",
    "FactualKnowledge", "InferentialKnowledge",
};

constexpr std::array<std::string_view, kCategoryCount> kCategoryDisplay = {
    "Coreference",       "Syntactic",      "Semantic",
    "Pragmatic",         "Absence of Mention", "Logic Conflict",
    "Factual Knowledge", "Inferential Knowledge",
};

// Lowercase and drop everything that is not a letter, so "Absence of Mention",
// "absence_of_mention" and "AbsenceOfMention" compare equal.
std::string squash(std::string_view s) {
  std::string out;
  for (unsigned char ch : s) {
    if (std::isalpha(ch)) out.push_back(static_cast<char>(std::tolower(ch)));
  }
  return out;
}

}  // namespace

std::string_view to_string(Category c) { return kCategoryIds[index_of(c) - 1]; }
std::string_view display_name(Category c) { return kCategoryDisplay[index_of(c) - 1]; }

std::string_view to_string(GoldLabel g) {
  switch (g) {
    case GoldLabel::entailment: return "entailment";
    case GoldLabel::neutral: return "neutral";
    case GoldLabel::contradiction: return "contradiction";
  }
  return "";
}

std::string_view to_string(Author a) { return a == Author::human ? "human" : "model"; }

std::string_view to_string(Paradigm p) {
  switch (p) {
    case Paradigm::baseline: return "baseline";
    case Paradigm::highlight_indexed: return "highlight_indexed";
    case Paradigm::highlight_intext: return "highlight_intext";
    case Paradigm::taxonomy_two_stage: return "taxonomy_two_stage";
    case Paradigm::taxonomy_end_to_end: return "taxonomy_end_to_end";
  }
  return "";
}

std::optional<Category> category_from_string(std::string_view s) {
  const std::string key = squash(s);
  if (key.empty()) return std::nullopt;
  for (Category c : kAllCategories) {
    if (squash(to_string(c)) == key) return c;
  }
  return std::nullopt;
}

std::optional<GoldLabel> gold_label_from_string(std::string_view s) {
  const std::string key = squash(s);
  for (GoldLabel g : kAllGoldLabels) {
    if (to_string(g) == key) return g;
  }
  return std::nullopt;
}

std::optional<Author> author_from_string(std::string_view s) {
  if (s == "human") return Author::human;
  if (s == "model") return Author::model;
  return std::nullopt;
}

std::optional<Paradigm> paradigm_from_string(std::string_view s) {
  for (Paradigm p : kAllParadigms) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

}  // namespace nlx
