#include "nlx/classify.hpp"

#include <fstream>
#include <map>
#include <random>

#include "nlx/errors.hpp"
#include "nlx/json_io.hpp"

namespace nlx {

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::vector<std::string> category_ids() {
  std::vector<std::string> out;
  for (Category c : kAllCategories) out.emplace_back(to_string(c));
  return out;
}

}  // namespace

ClassifyOutcome run_classification(LlmClient& client, const ClassifierPromptConfig& config,
                                   const Corpus& corpus, const ExemplarStore& exemplars,
                                   const ClassifyOptions& options) {
  validate(config);
  if (config.examples_per_category > 0) exemplars.require(config.examples_per_category);

  std::vector<const Explanation*> targets;
  for (const auto& e : corpus.explanations()) {
    if (e.author == Author::human) targets.push_back(&e);
  }
  // Prompts are built up front so prompt errors surface before any call.
  std::vector<std::string> prompts;
  prompts.reserve(targets.size());
  for (const auto* e : targets) {
    prompts.push_back(build_classifier_prompt(config, corpus.item(e->item_id), *e, exemplars));
  }

  std::vector<std::optional<PredictionRecord>> slots(targets.size());
  parallel_for(targets.size(), options.max_workers, [&](std::size_t i) {
    try {
      std::string raw = client.complete(prompts[i], options.decoding);
      PredictionRecord r;
      r.expl_id = targets[i]->expl_id;
      r.predicted = parse_classifier_output(raw);
      r.raw_output = std::move(raw);
      r.config = config.tag();
      r.model_id = client.model_id();
      r.decoding = options.decoding;
      slots[i] = std::move(r);
    } catch (const TransportError&) {
      // left empty; reported as missing
    }
  });

  ClassifyOutcome out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) {
      out.records.push_back(std::move(*slots[i]));
    } else {
      out.missing.push_back(targets[i]->expl_id);
    }
  }
  return out;
}

std::vector<PredictionRecord> classify_explanations(LlmClient& client,
                                                    const ClassifierPromptConfig& config,
                                                    const Corpus& corpus,
                                                    const ExemplarStore& exemplars,
                                                    const ClassifyOptions& options) {
  auto outcome = run_classification(client, config, corpus, exemplars, options);
  if (!outcome.missing.empty()) throw PartialRunError(std::move(outcome.missing));
  return std::move(outcome.records);
}

ClassificationReport evaluate(const std::vector<PredictionRecord>& predictions, const Corpus& gold) {
  ClassificationReport rep;
  rep.confusion.labels = category_ids();
  rep.confusion.counts.assign(kCategoryCount, std::vector<std::size_t>(kCategoryCount, 0));

  for (const auto& p : predictions) {
    const Explanation* e = gold.find_explanation(p.expl_id);
    if (!e || !e->taxonomy) {
      throw ParamError("no gold taxonomy label for explanation '" + p.expl_id + "'");
    }
    const auto g = static_cast<std::size_t>(index_of(*e->taxonomy) - 1);
    ++rep.total;
    if (!p.predicted) {
      ++rep.invalid_count;
      ++rep.invalid_by_gold[g];
      continue;
    }
    const auto q = static_cast<std::size_t>(index_of(*p.predicted) - 1);
    ++rep.confusion.counts[g][q];
    if (g == q) ++rep.correct;
  }
  if (rep.total == 0) throw ParamError("no predictions to evaluate");
  rep.accuracy = static_cast<double>(rep.correct) / static_cast<double>(rep.total);

  const auto predicted = rep.confusion.col_sums();
  const auto gold_valid = rep.confusion.row_sums();
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    auto& s = rep.per_class[c];
    const double tp = static_cast<double>(rep.confusion.counts[c][c]);
    s.support = gold_valid[c] + rep.invalid_by_gold[c];
    s.precision = safe_div(tp, static_cast<double>(predicted[c]));
    s.recall = safe_div(tp, static_cast<double>(s.support));
    s.f1 = safe_div(2.0 * s.precision * s.recall, s.precision + s.recall);

    rep.macro_p += s.precision / kCategoryCount;
    rep.macro_r += s.recall / kCategoryCount;
    rep.macro_f1 += s.f1 / kCategoryCount;
    const double w = static_cast<double>(s.support) / static_cast<double>(rep.total);
    rep.weighted_p += w * s.precision;
    rep.weighted_r += w * s.recall;
    rep.weighted_f1 += w * s.f1;
  }
  return rep;
}

std::vector<PredictionRecord> baseline_predict(const BaselineKind& kind,
                                               const std::vector<Category>& train_labels,
                                               const std::vector<std::string>& targets) {
  std::vector<PredictionRecord> out;
  out.reserve(targets.size());
  if (kind.type == BaselineKind::Type::random) {
    std::mt19937_64 rng(kind.seed);
    const std::string model = "random:" + std::to_string(kind.seed);
    for (const auto& id : targets) {
      // Top 3 bits: uniform over 0..7.
      const auto c = static_cast<Category>(1 + static_cast<int>(rng() >> 61));
      out.push_back({id, c, std::to_string(index_of(c)), "random_baseline", model, std::nullopt});
    }
    return out;
  }
  if (train_labels.empty()) throw ParamError("majority baseline needs training labels");
  std::array<std::size_t, kCategoryCount> counts{};
  for (Category c : train_labels) ++counts[static_cast<std::size_t>(index_of(c) - 1)];
  std::size_t best = 0;
  for (std::size_t c = 1; c < kCategoryCount; ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  const auto label = static_cast<Category>(static_cast<int>(best) + 1);
  for (const auto& id : targets) {
    out.push_back({id, label, std::to_string(index_of(label)), "majority_baseline", "majority",
                   std::nullopt});
  }
  return out;
}

std::vector<std::string> labeled_human_ids(const Corpus& corpus) {
  std::vector<std::string> out;
  for (const auto& e : corpus.explanations()) {
    if (e.author == Author::human && e.taxonomy) out.push_back(e.expl_id);
  }
  return out;
}

std::vector<Category> labels_of(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::vector<Category> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const Explanation* e = corpus.find_explanation(id);
    if (!e || !e->taxonomy) throw ParamError("no gold taxonomy label for explanation '" + id + "'");
    out.push_back(*e->taxonomy);
  }
  return out;
}

std::vector<PredictionRecord> read_predictions(std::istream& in, const Corpus& corpus) {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    PredictionRecord r;
    json j;
    try {
      j = json::parse(line);
      r.expl_id = require_string(j, "expl_id");
      const json& idx = require_field(j, "predicted_index");
      if (idx.is_string()) {
        if (idx.get<std::string>() != "invalid") {
          throw InvalidCategory("line " + std::to_string(lineno) + ": predicted_index '" +
                                idx.get<std::string>() + "' is neither 1-8 nor \"invalid\"");
        }
      } else if (idx.is_number_integer()) {
        const auto v = idx.get<long long>();
        if (v < 1 || v > kCategoryCount) {
          throw InvalidCategory("line " + std::to_string(lineno) + ": predicted_index " +
                                std::to_string(v) + " outside 1-8");
        }
        r.predicted = static_cast<Category>(v);
      } else {
        throw ParamError("predicted_index must be an integer or \"invalid\"");
      }
      r.raw_output = optional_string(j, "raw_output").value_or("");
      r.model_id = optional_string(j, "model_id").value_or("");
      r.config = optional_string(j, "config").value_or(kExternalConfig);
      if (j.contains("decoding")) r.decoding = DecodingParams::from_json(j.at("decoding"));
    } catch (const json::exception& e) {
      throw RowError(lineno, e.what());
    } catch (const ParamError& e) {
      throw RowError(lineno, e.what());
    }
    if (!corpus.find_explanation(r.expl_id)) {
      throw IntegrityError("prediction for unknown explanation '" + r.expl_id + "'", lineno);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PredictionRecord> load_external_predictions(const std::filesystem::path& path,
                                                        const Corpus& corpus) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParamError("cannot open prediction file '" + path.string() + "'");
  return read_predictions(in, corpus);
}

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records) {
  for (const auto& r : records) {
    json j{{"expl_id", r.expl_id},
           {"raw_output", r.raw_output},
           {"model_id", r.model_id},
           {"config", r.config}};
    if (r.predicted) {
      j["predicted_index"] = index_of(*r.predicted);
    } else {
      j["predicted_index"] = "invalid";
    }
    if (r.decoding) j["decoding"] = r.decoding->to_json();
    out << dump_line(j) << '\n';
  }
}

}  // namespace nlx
