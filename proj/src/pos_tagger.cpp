#include "nlx/pos_tagger.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "nlx/errors.hpp"
#include "nlx/hash.hpp"
#include "nlx/json_io.hpp"
#include "utf8.hpp"

namespace nlx {

const std::vector<std::string>& universal_tagset() {
  static const std::vector<std::string> kTags = {"NOUN", "VERB", "ADJ", "ADV", "PRON", "DET",
                                                 "ADP",  "NUM",  "CONJ", "PRT", ".",   "X"};
  return kTags;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool all_punct(std::string_view s) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t len = 1;
    if (!utf8::is_punct(utf8::decode(s, pos, len))) return false;
    pos += len;
  }
  return true;
}

bool numeric(std::string_view s) {
  bool digit = false;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != ',' && c != '.' && c != '-') {
      return false;
    }
  }
  return digit;
}

const std::unordered_map<std::string, std::string>& lexicon() {
  static const std::unordered_map<std::string, std::string> kLex = [] {
    std::unordered_map<std::string, std::string> m;
    auto add = [&m](const char* tag, std::initializer_list<const char*> words) {
      for (const char* w : words) m.emplace(w, tag);
    };
    add("DET", {"a", "an", "the", "this", "that", "these", "those", "every", "each", "some", "any",
                "no", "all", "both", "either", "neither", "another", "such", "which", "what"});
    add("PRON", {"i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them", "my",
                 "your", "his", "her", "its", "our", "their", "mine", "yours", "hers", "ours",
                 "theirs", "myself", "yourself", "himself", "herself", "itself", "ourselves",
                 "themselves", "someone", "somebody", "something", "anyone", "anybody",
                 "anything", "everyone", "everybody", "everything", "nobody", "nothing", "none",
                 "who", "whom", "whose"});
    add("ADP", {"in", "on", "at", "by", "for", "with", "about", "against", "between", "into",
                "through", "during", "before", "after", "above", "below", "from", "of", "off",
                "over", "under", "near", "across", "along", "around", "behind", "beside",
                "besides", "beyond", "inside", "outside", "onto", "toward", "towards", "upon",
                "within", "without", "among", "like", "than", "via", "despite", "except",
                "since", "until", "if", "because", "while", "although", "though", "whether",
                "unless", "as"});
    add("CONJ", {"and", "or", "but", "nor", "yet", "plus"});
    add("PRT", {"to", "'s", "’s", "up", "out"});
    add("ADV", {"not", "n't", "very", "too", "also", "just", "only", "never", "always", "often",
                "here", "there", "now", "then", "still", "even", "again", "already", "almost",
                "so", "really", "quite", "together", "away", "back", "down", "how", "when",
                "where", "why", "maybe", "perhaps", "probably", "necessarily"});
    add("VERB", {"is", "are", "was", "were", "be", "been", "being", "am", "'m", "'re", "do",
                 "does", "did", "done", "doing", "have", "has", "had", "having", "'ve", "'d",
                 "will", "would", "shall", "should", "can", "could", "may", "might", "must",
                 "'ll", "ca", "wo", "get", "gets", "got", "make", "makes", "made", "go", "goes",
                 "went", "gone", "say", "says", "said", "see", "sees", "saw", "seen", "mean",
                 "means", "imply", "implies", "implied", "wear", "wears", "wore", "worn", "sit",
                 "sits", "sat", "stand", "stands", "stood", "run", "runs", "ran", "eat", "eats",
                 "ate", "eaten", "play", "plays", "hold", "holds", "held", "walk", "walks",
                 "ride", "rides", "rode", "take", "takes", "took", "taken", "look", "looks",
                 "refers", "refer", "describes", "describe", "mentions", "mention", "assume"});
    add("ADJ", {"red", "blue", "black", "white", "green", "yellow", "brown", "orange", "pink",
                "purple", "gray", "grey", "big", "small", "large", "little", "young", "old",
                "tall", "short", "long", "new", "happy", "sad", "busy", "naked", "other", "same",
                "different", "several", "many", "few", "more", "most", "less", "least", "good",
                "bad", "hot", "cold", "dark", "bright", "first", "last", "true", "false",
                "possible", "specific", "certain", "whole", "both", "own"});
    add("NUM", {"one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
                "eleven", "twelve", "twenty", "hundred", "thousand", "million"});
    return m;
  }();
  return kLex;
}

std::string suffix_guess(const std::string& w) {
  if (w.size() > 4 && ends_with(w, "ly")) return "ADV";
  for (const char* s : {"ous", "ful", "able", "ible", "ive", "less", "ic", "ish", "ary"}) {
    if (w.size() > 4 && ends_with(w, s)) return "ADJ";
  }
  if (w.size() > 4 && (ends_with(w, "ing") || ends_with(w, "ed"))) return "VERB";
  return "NOUN";
}

}  // namespace

std::vector<std::string> RuleTagger::tag(const std::vector<std::string>& tokens) const {
  const auto& lex = lexicon();
  std::vector<std::string> tags;
  tags.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    const std::string w = lower(tok);
    const std::string prev = i ? tags[i - 1] : "";
    std::string t;
    if (all_punct(tok)) {
      t = ".";
    } else if (numeric(tok)) {
      t = "NUM";
    } else if (auto it = lex.find(w); it != lex.end()) {
      t = it->second;
      // "to" before a verb-looking word, "that" after a noun: keep the lexicon
      // tag; the coarse tagset does not distinguish these uses.
    } else {
      t = suffix_guess(w);
      const bool capitalised = std::isupper(static_cast<unsigned char>(tok[0])) != 0;
      if (capitalised && i > 0 && prev != ".") {
        t = "NOUN";
      } else if (t == "NOUN" && w.size() > 2 && ends_with(w, "s") && !ends_with(w, "ss") &&
                 (prev == "NOUN" || prev == "PRON")) {
        t = "VERB";
      } else if (prev == "PRT" && i > 0 && lower(tokens[i - 1]) == "to" && t == "NOUN") {
        t = "VERB";
      } else if (t == "VERB" && (prev == "DET" || prev == "ADJ") && ends_with(w, "ing") &&
                 i + 1 < tokens.size() && !all_punct(tokens[i + 1])) {
        t = "ADJ";
      }
    }
    tags.push_back(std::move(t));
  }
  return tags;
}

// ---------------------------------------------------------------------------
// Averaged perceptron

namespace {

std::string normalize_word(const std::string& w) {
  if (w.find('-') != std::string::npos && w.front() != '-') return "!HYPHEN";
  if (w.size() == 4 && std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return "!YEAR";
  }
  if (!w.empty() && w.front() >= '0' && w.front() <= '9') return "!DIGITS";
  return lower(w);
}

std::string suffix3(const std::string& w) { return w.size() > 3 ? w.substr(w.size() - 3) : w; }

}  // namespace

std::vector<std::string> PerceptronTagger::features(const std::vector<std::string>& ctx,
                                                    std::size_t i, const std::string& prev,
                                                    const std::string& prev2) const {
  // ctx is padded with two start and two end symbols; i indexes into ctx.
  const std::string& word = ctx[i];
  return {
      "bias",
      "i suffix " + suffix3(word),
      "i pref1 " + word.substr(0, 1),
      "i-1 tag " + prev,
      "i-2 tag " + prev2,
      "i tag+i-2 tag " + prev + " " + prev2,
      "i word " + word,
      "i-1 tag+i word " + prev + " " + word,
      "i-1 word " + ctx[i - 1],
      "i-1 suffix " + suffix3(ctx[i - 1]),
      "i-2 word " + ctx[i - 2],
      "i+1 word " + ctx[i + 1],
      "i+1 suffix " + suffix3(ctx[i + 1]),
      "i+2 word " + ctx[i + 2],
  };
}

std::string PerceptronTagger::predict(const std::vector<std::string>& feats) const {
  std::map<std::string, double> scores;
  for (const auto& f : feats) {
    auto it = weights_.find(f);
    if (it == weights_.end()) continue;
    for (const auto& [label, w] : it->second) scores[label] += w;
  }
  std::string best = classes_.empty() ? "X" : classes_.front();
  double best_score = -1e300;
  for (const auto& c : classes_) {
    const double s = scores.count(c) ? scores[c] : 0.0;
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

void PerceptronTagger::train(const std::vector<TaggedSentence>& sentences, int iterations) {
  std::set<std::string> classes;
  std::map<std::string, std::map<std::string, int>> counts;
  for (const auto& s : sentences) {
    for (const auto& [w, t] : s) {
      classes.insert(t);
      counts[w][t]++;
    }
  }
  classes_.assign(classes.begin(), classes.end());
  tagdict_.clear();
  for (const auto& [w, by_tag] : counts) {
    int n = 0, mode = 0;
    std::string mode_tag;
    for (const auto& [t, c] : by_tag) {
      n += c;
      if (c > mode) {
        mode = c;
        mode_tag = t;
      }
    }
    if (n >= 20 && static_cast<double>(mode) / n >= 0.97) tagdict_[w] = mode_tag;
  }

  weights_.clear();
  std::map<std::string, std::map<std::string, double>> totals;
  std::map<std::string, std::map<std::string, long>> stamps;
  long step = 0;
  auto update = [&](const std::string& f, const std::string& c, double delta) {
    double& w = weights_[f][c];
    totals[f][c] += static_cast<double>(step - stamps[f][c]) * w;
    stamps[f][c] = step;
    w += delta;
  };

  for (int it = 0; it < iterations; ++it) {
    for (const auto& s : sentences) {
      std::vector<std::string> ctx = {"-START-", "-START2-"};
      for (const auto& [w, t] : s) ctx.push_back(normalize_word(w));
      ctx.push_back("-END-");
      ctx.push_back("-END2-");
      std::string prev = "-START-", prev2 = "-START2-";
      for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& [word, truth] = s[i];
        std::string guess;
        if (auto td = tagdict_.find(word); td != tagdict_.end()) {
          guess = td->second;
        } else {
          const auto feats = features(ctx, i + 2, prev, prev2);
          guess = predict(feats);
          if (guess != truth) {
            for (const auto& f : feats) {
              update(f, truth, 1.0);
              update(f, guess, -1.0);
            }
          }
          ++step;
        }
        prev2 = prev;
        prev = guess;
      }
    }
  }
  for (auto& [f, by_class] : weights_) {
    for (auto& [c, w] : by_class) {
      const double total = totals[f][c] + static_cast<double>(step - stamps[f][c]) * w;
      w = step > 0 ? total / static_cast<double>(step) : w;
    }
  }
  refresh_fingerprint();
}

std::vector<std::string> PerceptronTagger::tag(const std::vector<std::string>& tokens) const {
  std::vector<std::string> ctx = {"-START-", "-START2-"};
  for (const auto& w : tokens) ctx.push_back(normalize_word(w));
  ctx.push_back("-END-");
  ctx.push_back("-END2-");
  std::vector<std::string> out;
  out.reserve(tokens.size());
  std::string prev = "-START-", prev2 = "-START2-";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string t;
    if (auto td = tagdict_.find(tokens[i]); td != tagdict_.end()) {
      t = td->second;
    } else {
      t = predict(features(ctx, i + 2, prev, prev2));
    }
    prev2 = prev;
    prev = t;
    out.push_back(std::move(t));
  }
  return out;
}

void PerceptronTagger::save(const std::filesystem::path& path) const {
  json j;
  j["classes"] = classes_;
  j["tagdict"] = json::object();
  for (const auto& [w, t] : tagdict_) j["tagdict"][w] = t;
  j["weights"] = weights_;
  std::ofstream out(path);
  if (!out) throw ParamError("cannot write tagger weights to '" + path.string() + "'");
  out << j.dump() << '\n';
}

PerceptronTagger PerceptronTagger::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParamError("cannot open tagger weights '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
    PerceptronTagger t;
    t.classes_ = j.at("classes").get<std::vector<std::string>>();
    for (const auto& [w, tag] : j.at("tagdict").items()) t.tagdict_[w] = tag.get<std::string>();
    t.weights_ = j.at("weights").get<Weights>();
    t.refresh_fingerprint();
    return t;
  } catch (const json::exception& e) {
    throw ParamError("malformed tagger weights: " + std::string(e.what()));
  }
}

void PerceptronTagger::refresh_fingerprint() {
  json j;
  j["classes"] = classes_;
  j["weights"] = weights_;
  std::map<std::string, std::string> td(tagdict_.begin(), tagdict_.end());
  j["tagdict"] = td;
  fingerprint_ = sha256_hex(j.dump()).substr(0, 12);
}

std::unique_ptr<PosTagger> make_tagger(const std::string& spec) {
  if (spec.empty() || spec == "rules") return std::make_unique<RuleTagger>();
  const std::string prefix = "perceptron:";
  if (spec.rfind(prefix, 0) == 0) {
    return std::make_unique<PerceptronTagger>(PerceptronTagger::load(spec.substr(prefix.size())));
  }
  throw ParamError("unknown tagger '" + spec + "'");
}

}  // namespace nlx
