#include "nlx/reports.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

#include "nlx/json_io.hpp"
#include "nlx/parallel.hpp"
#include "nlx/taxonomy.hpp"

namespace nlx {

namespace {

std::vector<const Explanation*> labeled_human(const Corpus& corpus, std::string_view item_id) {
  std::vector<const Explanation*> out;
  for (const auto* e : corpus.explanations_of(item_id, Author::human)) {
    if (e->taxonomy) out.push_back(e);
  }
  return out;
}

void require_labels(const Corpus& corpus) {
  const bool any = std::any_of(corpus.explanations().begin(), corpus.explanations().end(),
                               [](const Explanation& e) { return e.author == Author::human && e.taxonomy; });
  if (!any) throw ParamError("corpus has no labeled human explanations");
}

std::string count_pct(std::size_t n, std::size_t total) {
  return std::to_string(n) + " (" + percent(total ? static_cast<double>(n) / total : 0.0) + ")";
}

const char* bucket_name(int b) {
  static const char* names[] = {"1", "2", ">=3"};
  return names[b];
}

std::string opt_percent(const std::optional<double>& v) { return v ? percent(*v) : ""; }

}  // namespace

int index_of(GoldLabel g) { return static_cast<int>(g); }

// ---------------------------------------------------------------------------

std::size_t CategoryDistribution::category_total(Category c) const {
  const auto& row = counts[index_of(c) - 1];
  return row[0] + row[1] + row[2];
}

std::size_t CategoryDistribution::total() const {
  std::size_t n = 0;
  for (Category c : kAllCategories) n += category_total(c);
  return n;
}

CategoryDistribution report_category_distribution(const Corpus& corpus) {
  require_labels(corpus);
  CategoryDistribution d;
  for (const auto& e : corpus.explanations()) {
    if (e.author != Author::human || !e.taxonomy) continue;
    ++d.counts[index_of(*e.taxonomy) - 1][index_of(corpus.item(e.item_id).gold_label)];
  }
  return d;
}

int category_bucket(std::size_t distinct_categories) {
  if (distinct_categories == 0) throw ParamError("an item without categories has no bucket");
  return static_cast<int>(std::min<std::size_t>(distinct_categories, 3)) - 1;
}

std::size_t ItemsByCategoryCount::bucket_total(int bucket) const {
  const auto& row = counts.at(bucket);
  return row[0] + row[1] + row[2];
}

std::size_t ItemsByCategoryCount::label_total(GoldLabel g) const {
  std::size_t n = 0;
  for (const auto& row : counts) n += row[index_of(g)];
  return n;
}

std::size_t ItemsByCategoryCount::total() const {
  std::size_t n = 0;
  for (int b = 0; b < kCategoryBuckets; ++b) n += bucket_total(b);
  return n;
}

ItemsByCategoryCount report_items_by_category_count(const Corpus& corpus) {
  require_labels(corpus);
  ItemsByCategoryCount r;
  for (const auto& item : corpus.items()) {
    std::set<Category> cats;
    for (const auto* e : labeled_human(corpus, item.item_id)) cats.insert(*e->taxonomy);
    if (cats.empty()) continue;
    ++r.counts[category_bucket(cats.size())][index_of(item.gold_label)];
  }
  return r;
}

std::array<std::optional<SpanLength>, kCategoryCount> report_span_length_by_category(const Corpus& corpus) {
  std::array<std::size_t, kCategoryCount> n{}, prem{}, hyp{};
  for (const auto& h : corpus.highlights()) {
    if (!h.expl_id) continue;
    const Explanation* e = corpus.find_explanation(*h.expl_id);
    if (!e || e->author != Author::human || !e->taxonomy) continue;
    const int c = index_of(*e->taxonomy) - 1;
    ++n[c];
    prem[c] += h.premise_indices.size();
    hyp[c] += h.hypothesis_indices.size();
  }
  std::array<std::optional<SpanLength>, kCategoryCount> out;
  for (int c = 0; c < kCategoryCount; ++c) {
    if (n[c] == 0) continue;
    out[c] = SpanLength{static_cast<double>(prem[c]) / n[c], static_cast<double>(hyp[c]) / n[c], n[c]};
  }
  return out;
}

std::array<ValidationCounts, kCategoryCount> report_validation_rates(const Corpus& corpus,
                                                                     const std::vector<ValidationRecord>& records) {
  std::array<ValidationCounts, kCategoryCount> out{};
  for (const auto& r : records) {
    const Explanation* e = corpus.find_explanation(r.expl_id);
    if (!e) throw IntegrityError("validation for unknown explanation '" + r.expl_id + "'");
    if (!e->taxonomy) throw ParamError("explanation '" + r.expl_id + "' has no prompted category");
    auto& c = out[index_of(*e->taxonomy) - 1];
    ++(r.q1_label_fit ? c.q1_yes : c.q1_no);
    ++(r.q2_taxonomy_fit ? c.q2_yes : c.q2_no);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Featurizes texts in order; the embedder may not be thread-safe.
std::vector<TextFeatures> featurize_all(const std::vector<const Explanation*>& expls, Embedder& embedder,
                                        const PosTagger& tagger) {
  std::vector<TextFeatures> out;
  out.reserve(expls.size());
  for (const auto* e : expls) out.push_back(featurize(e->text, embedder, tagger));
  return out;
}

}  // namespace

std::vector<GenerationScores> score_generations(const Corpus& corpus, Embedder& embedder, const PosTagger& tagger,
                                                std::size_t max_workers) {
  std::vector<GenerationScores> rows;
  for (Paradigm p : kAllParadigms) {
    struct Unit {
      std::string item_id;
      std::vector<TextFeatures> refs, cands;
    };
    std::vector<Unit> units;
    std::size_t skipped = 0;
    for (const auto& item : corpus.items()) {
      std::vector<const Explanation*> cands;
      for (const auto* e : corpus.explanations_of(item.item_id, Author::model)) {
        if (e->paradigm == p) cands.push_back(e);
      }
      if (cands.empty()) continue;
      const auto refs = corpus.explanations_of(item.item_id, Author::human);
      if (refs.empty()) {
        ++skipped;
        continue;
      }
      units.push_back({item.item_id, featurize_all(refs, embedder, tagger), featurize_all(cands, embedder, tagger)});
    }
    if (units.empty() && skipped == 0) continue;
    std::vector<std::vector<ScoredExplanation>> scored(units.size());
    parallel_for(units.size(), max_workers, [&](std::size_t i) {
      for (const auto& c : units[i].cands) {
        scored[i].push_back({best_reference_scores(c, units[i].refs), c.words.size()});
      }
    });
    std::map<std::string, std::vector<ScoredExplanation>> per_item;
    for (std::size_t i = 0; i < units.size(); ++i) per_item[units[i].item_id] = std::move(scored[i]);
    GenerationScores row{std::string(to_string(p)), {}, skipped};
    if (!per_item.empty()) row.scores = aggregate_item_then_corpus(per_item);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::array<WithinLabelBucket, kCategoryBuckets> report_within_label(const Corpus& corpus, Embedder& embedder,
                                                                    const PosTagger& tagger,
                                                                    std::size_t max_workers) {
  struct Unit {
    int bucket;
    std::vector<TextFeatures> feats;
  };
  std::vector<Unit> units;
  for (const auto& item : corpus.items()) {
    const auto expls = labeled_human(corpus, item.item_id);
    if (expls.size() < 2) continue;
    std::set<Category> cats;
    for (const auto* e : expls) cats.insert(*e->taxonomy);
    units.push_back({category_bucket(cats.size()), featurize_all(expls, embedder, tagger)});
  }
  std::vector<std::vector<SimilarityVector>> pairs(units.size());
  parallel_for(units.size(), max_workers,
               [&](std::size_t i) { pairs[i] = pairwise_within_item_similarity(units[i].feats); });

  std::array<std::vector<SimilarityVector>, kCategoryBuckets> pooled;
  std::array<WithinLabelBucket, kCategoryBuckets> out{};
  for (std::size_t i = 0; i < units.size(); ++i) {
    auto& dst = pooled[units[i].bucket];
    dst.insert(dst.end(), pairs[i].begin(), pairs[i].end());
    ++out[units[i].bucket].items;
  }
  for (int b = 0; b < kCategoryBuckets; ++b) {
    out[b].pairs = pooled[b].size();
    if (!pooled[b].empty()) out[b].mean = mean_of(pooled[b]);
  }
  return out;
}

// ---------------------------------------------------------------------------

AnnotatorRecords load_annotator_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParamError("cannot read '" + path.string() + "'");
  AnnotatorRecords out;
  std::map<std::string, std::string> label_time;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const std::string kind = require_string(j, "kind");
      if (kind == "annotation") {
        auto r = annotation_from_json(j);
        auto it = label_time.find(r.expl_id);
        if (it == label_time.end() || r.timestamp >= it->second) {
          label_time[r.expl_id] = r.timestamp;
          out.labels[r.expl_id] = r.taxonomy;
        }
      } else if (kind == "explanation") {
        const auto e = explanation_from_record(j);
        if (e.taxonomy && !label_time.count(e.expl_id)) out.labels[e.expl_id] = *e.taxonomy;
      } else if (kind == "highlight") {
        auto h = highlight_from_record(j);
        out.highlights[{h.item_id, h.expl_id.value_or("")}] = std::move(h);
      } else if (kind != "item" && kind != "validation") {
        throw ParamError("unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw RowError(lineno, e.what());
    } catch (const ParamError& e) {
      throw RowError(lineno, e.what());
    }
  }
  return out;
}

AgreementResult agreement_between(const AnnotatorRecords& a, const AnnotatorRecords& b) {
  AgreementResult r;
  std::vector<std::string> la, lb;
  for (const auto& [id, c] : a.labels) {
    auto it = b.labels.find(id);
    if (it == b.labels.end()) continue;
    la.emplace_back(to_string(c));
    lb.emplace_back(to_string(it->second));
  }
  r.shared_labels = la.size();
  if (!la.empty()) {
    r.confusion = confusion(la, lb, label_union(la, lb));
    r.kappa = cohen_kappa(r.confusion);
  }
  std::vector<double> ious;
  for (const auto& [key, h] : a.highlights) {
    auto it = b.highlights.find(key);
    if (it != b.highlights.end()) ious.push_back(highlight_iou(h, it->second));
  }
  r.shared_highlights = ious.size();
  if (!ious.empty()) {
    std::sort(ious.begin(), ious.end());
    double sum = 0.0;
    for (double v : ious) sum += v;
    r.mean_iou = sum / static_cast<double>(ious.size());
  }
  return r;
}

// ---------------------------------------------------------------------------

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);  // no "-0.0"
  return s;
}

std::string percent(double fraction) { return fixed(100.0 * fraction, 1); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_similarity_csv(std::ostream& out, const std::string& header, const std::vector<GenerationScores>& rows) {
  out << header << "mode";
  for (auto name : SimilarityVector::column_names()) out << ',' << name;
  out << ",avg_len,items,explanations,skipped_items\n";
  for (const auto& r : rows) {
    out << csv_field(r.mode);
    for (double v : r.scores.mean.as_array()) out << ',' << fixed(v, 3);
    out << ',' << fixed(r.scores.avg_len, 2) << ',' << r.scores.items << ',' << r.scores.explanations << ','
        << r.skipped_items << '\n';
  }
}

void write_classification_csv(std::ostream& out, const std::string& header,
                              const std::vector<std::pair<std::string, ClassificationReport>>& rows) {
  out << header
      << "config,accuracy,precision_macro,recall_macro,f1_macro,precision_weighted,recall_weighted,f1_weighted,"
         "total,invalid\n";
  for (const auto& [name, r] : rows) {
    out << csv_field(name) << ',' << percent(r.accuracy) << ',' << percent(r.macro_p) << ',' << percent(r.macro_r)
        << ',' << percent(r.macro_f1) << ',' << percent(r.weighted_p) << ',' << percent(r.weighted_r) << ','
        << percent(r.weighted_f1) << ',' << r.total << ',' << csv_field(count_pct(r.invalid_count, r.total)) << '\n';
  }
}

void write_classification_confusion_csv(std::ostream& out, const std::string& header, const ClassificationReport& r) {
  out << header << "gold";
  for (const auto& l : r.confusion.labels) out << ',' << csv_field(l);
  out << ",invalid\n";
  for (std::size_t i = 0; i < r.confusion.labels.size(); ++i) {
    out << csv_field(r.confusion.labels[i]);
    for (auto n : r.confusion.counts[i]) out << ',' << n;
    out << ',' << (i < r.invalid_by_gold.size() ? r.invalid_by_gold[i] : 0) << '\n';
  }
}

void write_coverage_csv(std::ostream& out, const std::string& header,
                        const std::vector<std::pair<std::string, CorpusCoverage>>& rows) {
  out << header << "mode,full,partial,area_recall,area_precision,items,undefined_recall,undefined_precision\n";
  for (const auto& [mode, c] : rows) {
    out << csv_field(mode) << ',' << fixed(c.full_pct, 1) << ',' << fixed(c.partial_pct, 1) << ','
        << opt_percent(c.mean_area_recall) << ',' << opt_percent(c.mean_area_precision) << ',' << c.items << ','
        << c.undefined_recall << ',' << c.undefined_precision << '\n';
  }
}

void write_coverage_items_csv(std::ostream& out, const std::string& header, const std::vector<CoverageStats>& items) {
  out << header << "item_id,full,partial,area_recall,area_precision,n_human,n_model\n";
  for (const auto& s : items) {
    out << csv_field(s.item_id) << ',' << (s.full ? "true" : "false") << ',' << (s.partial ? "true" : "false") << ','
        << (s.area_recall ? fixed(*s.area_recall, 6) : "") << ','
        << (s.area_precision ? fixed(*s.area_precision, 6) : "") << ',' << s.n_human << ',' << s.n_model << '\n';
  }
}

void write_coverage_points_csv(std::ostream& out, const std::string& header, const std::vector<CoverageStats>& items) {
  out << header << "item_id,source,index,x,y\n";
  for (const auto& s : items) {
    auto dump = [&](const char* source, const std::vector<Point2D>& pts) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        out << csv_field(s.item_id) << ',' << source << ',' << i << ',' << fixed(pts[i].x, 9) << ','
            << fixed(pts[i].y, 9) << '\n';
      }
    };
    dump("human", s.human_points);
    dump("model", s.model_points);
  }
}

void write_agreement_csv(std::ostream& out, const std::string& header, const std::vector<AgreementRow>& rows) {
  out << header << "pair,kappa,shared_labels,iou,shared_highlights,confusion_path\n";
  for (const auto& r : rows) {
    out << csv_field(r.pair) << ',' << (r.result.kappa ? fixed(*r.result.kappa, 4) : "") << ','
        << r.result.shared_labels << ',' << (r.result.mean_iou ? fixed(*r.result.mean_iou, 4) : "") << ','
        << r.result.shared_highlights << ',' << csv_field(r.confusion_path) << '\n';
  }
}

void write_confusion_csv(std::ostream& out, const std::string& header, const ConfusionMatrix& m) {
  out << header << "first\\second";
  for (const auto& l : m.labels) out << ',' << csv_field(l);
  out << '\n';
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    out << csv_field(m.labels[i]);
    for (auto n : m.counts[i]) out << ',' << n;
    out << '\n';
  }
}

void write_category_distribution_csv(std::ostream& out, const std::string& header, const CategoryDistribution& d) {
  out << header << "category";
  for (GoldLabel g : kAllGoldLabels) out << ',' << to_string(g);
  out << ",total,share\n";
  const std::size_t total = d.total();
  for (Category c : kAllCategories) {
    out << csv_field(std::string(category_info(c).name));
    for (auto n : d.counts[index_of(c) - 1]) out << ',' << n;
    out << ',' << d.category_total(c) << ','
        << percent(total ? static_cast<double>(d.category_total(c)) / total : 0.0) << '\n';
  }
  out << "Total";
  for (GoldLabel g : kAllGoldLabels) {
    std::size_t n = 0;
    for (const auto& row : d.counts) n += row[index_of(g)];
    out << ',' << n;
  }
  out << ',' << total << ",100.0\n";
}

void write_items_by_count_csv(std::ostream& out, const std::string& header, const ItemsByCategoryCount& r) {
  out << header << "categories";
  for (GoldLabel g : kAllGoldLabels) out << ',' << to_string(g);
  out << ",total\n";
  for (int b = 0; b < kCategoryBuckets; ++b) {
    out << bucket_name(b);
    for (GoldLabel g : kAllGoldLabels) out << ',' << csv_field(count_pct(r.counts[b][index_of(g)], r.label_total(g)));
    out << ',' << r.bucket_total(b) << '\n';
  }
}

void write_span_length_csv(std::ostream& out, const std::string& header,
                           const std::array<std::optional<SpanLength>, kCategoryCount>& r) {
  out << header << "category,premise_mean,hypothesis_mean,highlights\n";
  for (Category c : kAllCategories) {
    const auto& s = r[index_of(c) - 1];
    out << csv_field(std::string(category_info(c).name)) << ',';
    if (s) {
      out << fixed(s->premise_mean, 2) << ',' << fixed(s->hypothesis_mean, 2) << ',' << s->highlights << '\n';
    } else {
      out << ",,0\n";
    }
  }
}

void write_validation_csv(std::ostream& out, const std::string& header,
                          const std::array<ValidationCounts, kCategoryCount>& r) {
  out << header << "category,q1_yes,q1_no,q2_yes,q2_no,total\n";
  for (Category c : kAllCategories) {
    const auto& v = r[index_of(c) - 1];
    const std::size_t n = v.total();
    out << csv_field(std::string(category_info(c).name)) << ',' << csv_field(count_pct(v.q1_yes, n)) << ','
        << csv_field(count_pct(v.q1_no, n)) << ',' << csv_field(count_pct(v.q2_yes, n)) << ','
        << csv_field(count_pct(v.q2_no, n)) << ',' << n << '\n';
  }
}

void write_within_label_csv(std::ostream& out, const std::string& header,
                            const std::array<WithinLabelBucket, kCategoryBuckets>& r) {
  out << header << "categories,items,pairs";
  for (auto name : SimilarityVector::column_names()) out << ',' << name;
  out << '\n';
  for (int b = 0; b < kCategoryBuckets; ++b) {
    out << bucket_name(b) << ',' << r[b].items << ',' << r[b].pairs;
    for (double v : r[b].mean.as_array()) out << ',' << (r[b].pairs ? fixed(v, 4) : "");
    out << '\n';
  }
}

}  // namespace nlx
