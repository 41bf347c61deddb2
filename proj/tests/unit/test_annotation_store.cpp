#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "../common/temp_dir.hpp"
#include "nlx/annotation_store.hpp"
#include "nlx/errors.hpp"
#include "nlx/json_io.hpp"

using namespace nlx;
using testing_util::slurp;
using testing_util::spit;
using testing_util::TempDir;

namespace {

Corpus store_corpus() {
  std::vector<NliItem> items{{"b", "A dog runs.", "An animal moves.", GoldLabel::entailment},
                             {"a", "A cat sleeps.", "A cat runs.", GoldLabel::contradiction}};
  std::vector<Explanation> ex{
      {"b:1", "b", "A dog is an animal.", Author::human, {}, {}, {}},
      {"a:2", "a", "Sleeping is not running.", Author::human, {}, Category::LogicConflict, {}},
      {"a:1", "a", "The cat cannot do both.", Author::human, {}, {}, {}},
      {"a/m/1", "a", "Sleep excludes running.", Author::model, {}, Category::LogicConflict,
       Paradigm::taxonomy_two_stage},
      {"a/m/2", "a", "Cats rest.", Author::model, {}, {}, Paradigm::baseline},
  };
  return Corpus(items, ex, {});
}

AnnotationRecord ann(std::string id, std::string who, Category c, std::string ts = "") {
  return {std::move(id), std::move(who), c, std::move(ts)};
}

}  // namespace

TEST(AnnotationRecords, JsonRoundTrip) {
  const auto a = ann("a:1", "u1", Category::Semantic, "2024-01-02T03:04:05Z");
  EXPECT_EQ(annotation_from_json(to_json(a)), a);
  const ValidationRecord v{"a/m/1", "u1", true, false, "2024-01-02T03:04:05.123Z"};
  EXPECT_EQ(validation_from_json(to_json(v)), v);
  EXPECT_EQ(to_json(a)["kind"], "annotation");
  EXPECT_EQ(to_json(v)["kind"], "validation");
}

TEST(AnnotationRecords, TaxonomyByNameOrIndex) {
  json j{{"expl_id", "x"}, {"annotator_id", "u"}, {"taxonomy", 6}};
  EXPECT_EQ(annotation_from_json(j).taxonomy, Category::LogicConflict);
  j["taxonomy"] = "Logic Conflict";
  EXPECT_EQ(annotation_from_json(j).taxonomy, Category::LogicConflict);
  j["taxonomy"] = 9;
  EXPECT_THROW(annotation_from_json(j), ParamError);
  j["taxonomy"] = "Vibes";
  EXPECT_THROW(annotation_from_json(j), ParamError);
}

TEST(AnnotationRecords, RejectsMalformed) {
  EXPECT_THROW(annotation_from_json(json::array()), ParamError);
  EXPECT_THROW(annotation_from_json({{"expl_id", "x"}, {"taxonomy", 1}}), ParamError);
  EXPECT_THROW(annotation_from_json({{"expl_id", ""}, {"annotator_id", "u"}, {"taxonomy", 1}}), ParamError);
  EXPECT_THROW(validation_from_json({{"expl_id", "x"}, {"annotator_id", "u"}, {"q1_label_fit", true}}), ParamError);
  EXPECT_THROW(validation_from_json({{"expl_id", "x"},
                                     {"annotator_id", "u"},
                                     {"q1_label_fit", "yes"},
                                     {"q2_taxonomy_fit", true}}),
               ParamError);
  EXPECT_THROW(annotation_from_json({{"expl_id", "x"}, {"annotator_id", "u"}, {"taxonomy", 1}, {"timestamp", "now"}}),
               ParamError);
}

TEST(AnnotationRecords, Timestamps) {
  EXPECT_TRUE(is_utc_timestamp("2024-01-02T03:04:05Z"));
  EXPECT_TRUE(is_utc_timestamp("2024-01-02T03:04:05.5Z"));
  EXPECT_FALSE(is_utc_timestamp("2024-01-02T03:04:05+01:00"));
  EXPECT_FALSE(is_utc_timestamp("2024-01-02 03:04:05Z"));
  EXPECT_TRUE(is_utc_timestamp(utc_now()));
}

TEST(AnnotationStore, PoolsAreOrderedByItemThenExplanation) {
  const Corpus c = store_corpus();
  AnnotationStore s(c, "");
  EXPECT_EQ(s.pool(TaskMode::annotate), (std::vector<std::string>{"a:1", "a:2", "b:1"}));
  EXPECT_EQ(s.pool(TaskMode::validate), (std::vector<std::string>{"a/m/1"}));
}

TEST(AnnotationStore, QueueSkipsDoneAndLeasedUnits) {
  const Corpus c = store_corpus();
  AnnotationStore s(c, "");
  EXPECT_EQ(s.next_task(TaskMode::annotate, "u1"), "a:1");
  EXPECT_EQ(s.next_task(TaskMode::annotate, "u1"), "a:2");  // a:1 still leased
  EXPECT_EQ(s.next_task(TaskMode::annotate, "u2"), "a:1");  // leases are per annotator
  s.add(ann("a:1", "u1", Category::Semantic));
  s.add(ann("a:2", "u1", Category::Semantic));
  EXPECT_EQ(s.remaining(TaskMode::annotate, "u1"), 1u);
  EXPECT_EQ(s.next_task(TaskMode::annotate, "u1"), "b:1");
  EXPECT_EQ(s.next_task(TaskMode::annotate, "u1"), std::nullopt);
  s.add(ann("b:1", "u1", Category::FactualKnowledge));
  EXPECT_EQ(s.remaining(TaskMode::annotate, "u1"), 0u);
}

TEST(AnnotationStore, ExpiredLeaseIsReissued) {
  const Corpus c = store_corpus();
  AnnotationStore s(c, "", std::chrono::seconds(0));
  EXPECT_EQ(s.next_task(TaskMode::validate, "u"), "a/m/1");
  EXPECT_EQ(s.next_task(TaskMode::validate, "u"), "a/m/1");
}

TEST(AnnotationStore, RejectsUnitsOutsideThePool) {
  const Corpus c = store_corpus();
  AnnotationStore s(c, "");
  EXPECT_THROW(s.add(ann("a/m/1", "u", Category::Semantic)), ParamError);
  EXPECT_THROW(s.add(ValidationRecord{"a:1", "u", true, true, ""}), ParamError);
  EXPECT_THROW(s.add(ValidationRecord{"a/m/2", "u", true, true, ""}), ParamError);  // no prompted category
  EXPECT_TRUE(s.export_lines().empty());
}

TEST(AnnotationStore, ResubmissionSupersedesAndKeepsHistory) {
  TempDir dir("nlx_store_supersede");
  const Corpus c = store_corpus();
  {
    AnnotationStore s(c, dir / "log.jsonl");
    s.add(ann("a:1", "u", Category::Semantic, "2024-01-01T00:00:01Z"));
    s.add(ann("a:1", "u", Category::Pragmatic, "2024-01-01T00:00:02Z"));
    s.add(ann("a:1", "u", Category::Syntactic, "2024-01-01T00:00:01.5Z"));  // older than the second
    ASSERT_EQ(s.latest_annotations().size(), 1u);
    EXPECT_EQ(s.latest_annotations()[0].taxonomy, Category::Pragmatic);
    EXPECT_EQ(s.export_lines().size(), 3u);
  }
  AnnotationStore replay(c, dir / "log.jsonl");
  EXPECT_EQ(replay.latest_annotations()[0].taxonomy, Category::Pragmatic);
  EXPECT_EQ(replay.export_lines().size(), 3u);
  EXPECT_EQ(replay.progress().at("u").annotations, 1u);
}

TEST(AnnotationStore, EqualTimestampsLaterLineWins) {
  const Corpus c = store_corpus();
  AnnotationStore s(c, "");
  s.add(ann("a:1", "u", Category::Semantic, "2024-01-01T00:00:01Z"));
  s.add(ann("a:1", "u", Category::Pragmatic, "2024-01-01T00:00:01.000Z"));
  EXPECT_EQ(s.latest_annotations()[0].taxonomy, Category::Pragmatic);
}

TEST(AnnotationStore, ExportIsTheLogVerbatim) {
  TempDir dir("nlx_store_export");
  const Corpus c = store_corpus();
  AnnotationStore s(c, dir / "log.jsonl");
  s.add(ann("b:1", "u", Category::FactualKnowledge, "2024-01-01T00:00:01Z"));
  s.add(ValidationRecord{"a/m/1", "u", true, false, "2024-01-01T00:00:02Z"});
  std::string joined;
  for (const auto& l : s.export_lines()) joined += l + '\n';
  EXPECT_EQ(joined, slurp(dir / "log.jsonl"));
}

TEST(AnnotationStore, TornFinalLineIsDropped) {
  TempDir dir("nlx_store_torn");
  const Corpus c = store_corpus();
  const std::string good = dump_line(to_json(ann("a:1", "u", Category::Semantic, "2024-01-01T00:00:01Z"))) + '\n';
  spit(dir / "log.jsonl", good + "{\"kind\":\"annot");
  AnnotationStore s(c, dir / "log.jsonl");
  EXPECT_EQ(s.export_lines().size(), 1u);
  EXPECT_EQ(slurp(dir / "log.jsonl"), good);
}

TEST(AnnotationStore, ReplayErrorsAreTyped) {
  TempDir dir("nlx_store_bad");
  const Corpus c = store_corpus();
  spit(dir / "unknown.jsonl", dump_line(to_json(ann("zz", "u", Category::Semantic, "2024-01-01T00:00:01Z"))) + '\n');
  EXPECT_THROW(AnnotationStore(c, dir / "unknown.jsonl"), IntegrityError);
  spit(dir / "garbage.jsonl", "{not json}\n");
  EXPECT_THROW(AnnotationStore(c, dir / "garbage.jsonl"), RowError);
  spit(dir / "kind.jsonl", "{\"kind\":\"vote\"}\n");
  EXPECT_THROW(AnnotationStore(c, dir / "kind.jsonl"), RowError);
}

TEST(AnnotationStore, FailedAppendLeavesStateUnchanged) {
  TempDir dir("nlx_store_fail");
  const Corpus c = store_corpus();
  AnnotationStore s(c, dir / "missing_dir" / "log.jsonl");
  EXPECT_THROW(s.add(ann("a:1", "u", Category::Semantic)), StoreError);
  EXPECT_TRUE(s.export_lines().empty());
  EXPECT_TRUE(s.latest_annotations().empty());
  EXPECT_EQ(s.remaining(TaskMode::annotate, "u"), 3u);
}

TEST(AnnotationStore, ConcurrentPullsNeverDuplicate) {
  const Corpus c = store_corpus();
  AnnotationStore s(c, "");
  std::vector<std::optional<std::string>> got(64);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int k = 0; k < 8; ++k) got[t * 8 + k] = s.next_task(TaskMode::annotate, "u");
    });
  }
  for (auto& th : threads) th.join();
  std::multiset<std::string> issued;
  for (const auto& g : got) {
    if (g) issued.insert(*g);
  }
  EXPECT_EQ(issued.size(), 3u);
  EXPECT_EQ(std::set<std::string>(issued.begin(), issued.end()).size(), 3u);
}
