#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace nlx {

// Coarse universal tagset: NOUN VERB ADJ ADV PRON DET ADP NUM CONJ PRT . X
const std::vector<std::string>& universal_tagset();

// Contract: tag() returns exactly one label per input token and is a pure
// function of its input.
class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual std::vector<std::string> tag(const std::vector<std::string>& tokens) const = 0;
  virtual std::string id() const = 0;
};

// Closed-class lexicon plus suffix and left-context rules. Needs no weights.
class RuleTagger final : public PosTagger {
 public:
  std::vector<std::string> tag(const std::vector<std::string>& tokens) const override;
  std::string id() const override { return "rules-v1"; }
};

using TaggedSentence = std::vector<std::pair<std::string, std::string>>;

// Averaged perceptron with greedy left-to-right decoding. Train it on any
// tagged corpus or load weights written by save().
class PerceptronTagger final : public PosTagger {
 public:
  PerceptronTagger() = default;

  // Deterministic: sentences are visited in a fixed order per iteration.
  void train(const std::vector<TaggedSentence>& sentences, int iterations = 5);

  std::vector<std::string> tag(const std::vector<std::string>& tokens) const override;
  std::string id() const override { return "perceptron:" + fingerprint_; }

  void save(const std::filesystem::path& path) const;
  static PerceptronTagger load(const std::filesystem::path& path);

 private:
  using Weights = std::map<std::string, std::map<std::string, double>>;

  std::vector<std::string> features(const std::vector<std::string>& words, std::size_t i,
                                    const std::string& prev, const std::string& prev2) const;
  std::string predict(const std::vector<std::string>& feats) const;
  void refresh_fingerprint();

  Weights weights_;
  std::vector<std::string> classes_;
  std::unordered_map<std::string, std::string> tagdict_;
  std::string fingerprint_ = "untrained";
};

// "rules" or "perceptron:<weights.json>".
std::unique_ptr<PosTagger> make_tagger(const std::string& spec);

}  // namespace nlx
