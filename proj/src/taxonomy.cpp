#include "nlx/taxonomy.hpp"

#include <cctype>
#include <fstream>

#include "nlx/errors.hpp"
#include "nlx/json_io.hpp"

namespace nlx {

namespace {

constexpr std::array<TaxonomyCategory, kCategoryCount> kTaxonomy = {{
    {1, Category::Coreference, "Coreference", ReasoningGroup::text_based,
     "Does the explanation rely on resolving coreference between entities?",
     "Determine whether the main entities in the premise and hypothesis refer to the same "
     "real-world referent, including via pronouns or phrases.",
     "The explanation resolves references (e.g., pronouns or demonstratives) across premise "
     "and hypothesis."},
    {2, Category::Syntactic, "Syntactic", ReasoningGroup::text_based,
     "Does the explanation involve a change in sentence structure that preserves meaning?",
     "Determine whether the premise and hypothesis differ in structure, such as active vs. "
     "passive, reordered arguments, or coordination/subordination, while preserving the same "
     "meaning.",
     "Based on structural rephrasing with the same meaning (e.g., syntactic alternation, "
     "coordination, subordination). If the explanation itself is the rephrasing of the premise "
     "or hypothesis, it should be included in this category."},
    {3, Category::Semantic, "Semantic", ReasoningGroup::text_based,
     "Does the explanation involve semantic similarity or substitution of key concepts?",
     "Evaluate whether core words or expressions - including verbs, nouns, and adjectives - are "
     "semantically related between the premise and hypothesis. This includes synonymy, "
     "antonymy, lexical entailment, or category membership.",
     "Based on word meaning (e.g., synonyms, antonyms, negation)."},
    {4, Category::Pragmatic, "Pragmatic", ReasoningGroup::text_based,
     "Does the explanation rely on pragmatic cues like implicature or presupposition?",
     "Look for meaning beyond the literal text - including implicature, presupposition, speaker "
     "intention, and conventional conversational meaning.",
     "This category would capture inferences that arise from logical implications embedded in "
     "the structure or semantics of the text itself, without relying on external context or "
     "background knowledge."},
    {5, Category::AbsenceOfMention, "Absence of Mention", ReasoningGroup::text_based,
     "Does the explanation point out information not mentioned in the premise?",
     "Check whether the hypothesis introduced information that is neither supported nor "
     "contradicted by the premise - i.e., it is not mentioned explicitly.",
     "Lack of supporting evidence, the hypothesis introduces information that is not "
     "supported, not entailed, or not mentioned in the premise, but could be true."},
    {6, Category::LogicConflict, "Logic Conflict", ReasoningGroup::text_based,
     "Does the explanation refer to logical constraints or conflict?",
     "Evaluate whether the hypothesis interacts with the premise via logical structures, such "
     "as exclusivity, quantifiers (“only”, “none”), or conditionals, which "
     "constrain or conflict with each other.",
     "Structural logical exclusivity (e.g., either-or, at most, only, must), quantifier "
     "conflict, temporal conflict, location conflict, gender conflict etc."},
    {7, Category::FactualKnowledge, "Factual Knowledge", ReasoningGroup::world_knowledge,
     "Does the explanation rely on widely shared, intuitive facts acquired through everyday "
     "experience?",
     "Determine whether the explanation invokes commonly known facts, such as physical "
     "properties or universal experiences, that are not stated in the premise.",
     "Explanation relies on common sense, background, or domain-specific facts. No further "
     "reasoning involved."},
    {8, Category::InferentialKnowledge, "Inferential Knowledge", ReasoningGroup::world_knowledge,
     "Does the explanation rely on real-world norms, customs, or culturally grounded "
     "reasoning?",
     "Determine whether the explanation requires reasoning based on general world knowledge, "
     "including cultural expectations, social norms, or typical causal inferences, that are "
     "not stated in the premise.",
     "Requires real-world causal, probabilistic reasoning or unstated but assumed "
     "information."},
}};

constexpr std::array<ClassifierPromptConfig, 6> kConfigs = {{
    {false, 0}, {true, 0}, {false, 1}, {false, 2}, {true, 1}, {true, 2}}};

constexpr std::string_view kClassifierIntro =
    "You are an expert in solving Natural Language Inference tasks. Your task is to classify "
    "the following explanations into one of the categories listed below. Each category "
    "reflects a specific type of inference in the explanation between the premise and "
    "hypothesis.";

constexpr std::string_view kClassifierDirective =
    "Respond **only with the number (1–8)** corresponding to the most appropriate category.";

}  // namespace

const std::array<TaxonomyCategory, kCategoryCount>& taxonomy() { return kTaxonomy; }

const TaxonomyCategory& category_by_index(int index) {
  if (index < 1 || index > kCategoryCount) {
    throw InvalidCategory("category index " + std::to_string(index) + " outside 1..8");
  }
  return kTaxonomy[static_cast<std::size_t>(index - 1)];
}

const TaxonomyCategory& category_info(Category c) { return category_by_index(index_of(c)); }

std::string ClassifierPromptConfig::tag() const {
  return std::string(with_instruction ? "instr1" : "instr0") + "_k" +
         std::to_string(examples_per_category);
}

const std::array<ClassifierPromptConfig, 6>& classifier_configs() { return kConfigs; }

void validate(const ClassifierPromptConfig& config) {
  if (config.examples_per_category < 0 || config.examples_per_category > 2) {
    throw ParamError("examples_per_category must be 0, 1 or 2");
  }
}

ClassifierPromptConfig parse_config_tag(std::string_view tag) {
  for (const auto& c : kConfigs) {
    if (c.tag() == tag) return c;
  }
  throw ParamError("unknown classifier config '" + std::string(tag) + "'");
}

ExemplarStore::ExemplarStore(std::vector<Exemplar> exemplars) {
  total_ = exemplars.size();
  for (auto& e : exemplars) by_category_[e.category].push_back(std::move(e));
}

const std::vector<Exemplar>& ExemplarStore::of(Category c) const {
  static const std::vector<Exemplar> kNone;
  auto it = by_category_.find(c);
  return it == by_category_.end() ? kNone : it->second;
}

void ExemplarStore::require(int per_category) const {
  if (per_category <= 0) return;
  for (Category c : kAllCategories) {
    if (of(c).size() < static_cast<std::size_t>(per_category)) {
      throw ExemplarError("category " + std::string(to_string(c)) + " has " +
                          std::to_string(of(c).size()) + " exemplar(s), " +
                          std::to_string(per_category) + " required");
    }
  }
}

ExemplarStore load_exemplars(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParamError("cannot open exemplar file '" + path.string() + "'");
  std::vector<Exemplar> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Exemplar e;
      const std::string cat = require_string(j, "category");
      auto c = category_from_string(cat);
      if (!c) throw ParamError("unknown category '" + cat + "'");
      e.category = *c;
      e.premise = require_string(j, "premise");
      e.hypothesis = require_string(j, "hypothesis");
      auto g = gold_label_from_string(require_string(j, "gold_label"));
      if (!g) throw ParamError("unknown gold_label");
      e.gold_label = *g;
      e.explanation = require_string(j, "explanation");
      out.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw RowError(lineno, e.what());
    } catch (const ParamError& e) {
      throw RowError(lineno, e.what());
    }
  }
  return ExemplarStore(std::move(out));
}

std::string build_classifier_prompt(const ClassifierPromptConfig& config, const NliItem& item,
                                    const Explanation& expl, const ExemplarStore& exemplars) {
  validate(config);
  exemplars.require(config.examples_per_category);

  std::string p(kClassifierIntro);
  if (config.with_instruction) {
    p += "\n\nHere are the categories:\n\n";
    for (const auto& c : kTaxonomy) {
      p += std::to_string(c.index) + ". " + std::string(c.name) + "\n    - " +
           std::string(c.description) + "\n\n";
    }
  } else {
    p += " Here are the categories:\n\n";
    for (const auto& c : kTaxonomy) p += std::to_string(c.index) + ". " + std::string(c.name) + "\n";
    p += "\n";
  }

  if (config.examples_per_category > 0) {
    p += "Here are examples for each category:\n\n";
    for (const auto& c : kTaxonomy) {
      const auto& ex = exemplars.of(c.id);
      for (int k = 0; k < config.examples_per_category; ++k) {
        const Exemplar& e = ex[static_cast<std::size_t>(k)];
        p += "Example of " + std::to_string(c.index) + ". " + std::string(c.name) + ":\n";
        p += "Premise: " + e.premise + "\n";
        p += "Hypothesis: " + e.hypothesis + "\n";
        p += "Label: " + std::string(to_string(e.gold_label)) + "\n";
        p += "Explanation: " + e.explanation + "\n";
        p += "Category: " + std::to_string(c.index) + "\n\n";
      }
    }
  }

  p += "Now classify the following explanation:\n\n";
  p += "Premise: " + item.premise + "\n";
  p += "Hypothesis: " + item.hypothesis + "\n";
  p += "Label: " + std::string(to_string(item.gold_label)) + "\n";
  p += "Explanation: " + expl.text + "\n\n";
  p += kClassifierDirective;
  return p;
}

std::optional<Category> parse_classifier_output(std::string_view raw) {
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto is_alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
  std::size_t i = 0;
  while (i < raw.size()) {
    if (!is_digit(raw[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < raw.size() && is_digit(raw[j])) ++j;
    const bool left_ok = i == 0 || !is_alpha(raw[i - 1]);
    const bool right_ok = j == raw.size() || !is_alpha(raw[j]);
    if (left_ok && right_ok && j - i == 1 && raw[i] >= '1' && raw[i] <= '8') {
      return static_cast<Category>(raw[i] - '0');
    }
    i = j;
  }
  return std::nullopt;
}

}  // namespace nlx
