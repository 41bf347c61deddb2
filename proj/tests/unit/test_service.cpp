#include <gtest/gtest.h>

#include <httplib.h>

#include <set>
#include <thread>

#include "../common/temp_dir.hpp"
#include "nlx/json_io.hpp"
#include "nlx/service.hpp"

using namespace nlx;
using testing_util::slurp;
using testing_util::TempDir;

namespace {

Corpus service_corpus() {
  std::vector<NliItem> items{{"i1", "A man plays guitar.", "A man plays music.", GoldLabel::entailment},
                             {"i2", "A dog sleeps.", "A dog runs.", GoldLabel::contradiction}};
  std::vector<Explanation> ex{
      {"i1:1", "i1", "Guitar is music.", Author::human, {}, {}, {}},
      {"i1:2", "i1", "Playing guitar makes music.", Author::human, {}, {}, {}},
      {"i2:1", "i2", "Sleeping is not running.", Author::human, {}, {}, {}},
      {"i2/m/1", "i2", "A sleeping dog is not running.", Author::model, {}, Category::LogicConflict,
       Paradigm::taxonomy_end_to_end},
      {"i2/m/2", "i2", "Dogs sleep a lot.", Author::model, {}, Category::FactualKnowledge,
       Paradigm::taxonomy_end_to_end},
  };
  return Corpus(items, ex, {});
}

// Service on a free local port for the lifetime of the fixture.
class ServiceTest : public ::testing::Test {
 protected:
  void start(const std::filesystem::path& log) {
    store_ = std::make_unique<AnnotationStore>(corpus_, log);
    service_ = std::make_unique<AnnotationService>(*store_);
    port_ = service_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { service_->listen_after_bind(); });
    for (int i = 0; i < 200 && !service_->running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  void TearDown() override {
    if (service_) service_->stop();
    if (thread_.joinable()) thread_.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

  httplib::Result post(const std::string& path, const json& body, const httplib::Headers& headers = {}) {
    return client().Post(path, headers, body.dump(), "application/json");
  }

  Corpus corpus_ = service_corpus();
  TempDir dir_{"nlx_service_test"};
  std::unique_ptr<AnnotationStore> store_;
  std::unique_ptr<AnnotationService> service_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST_F(ServiceTest, AnnotateTaskCarriesContextAndTaxonomy) {
  start(dir_ / "log.jsonl");
  auto res = client().Get("/tasks/next?mode=annotate&annotator=u1");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const json body = json::parse(res->body);
  EXPECT_EQ(body["remaining"], 3);
  const json& task = body["task"];
  EXPECT_EQ(task["mode"], "annotate");
  EXPECT_EQ(task["expl_id"], "i1:1");
  EXPECT_EQ(task["item"]["premise"], "A man plays guitar.");
  EXPECT_EQ(task["item"]["gold_label"], "entailment");
  EXPECT_EQ(task["explanation"]["text"], "Guitar is music.");
  ASSERT_EQ(task["taxonomy"].size(), 8u);
  for (int i = 0; i < 8; ++i) {
    EXPECT_EQ(task["taxonomy"][i]["index"], i + 1);
    EXPECT_FALSE(task["taxonomy"][i]["question"].get<std::string>().empty());
  }
  EXPECT_FALSE(task.contains("prompted_category"));
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
}

TEST_F(ServiceTest, ValidateTaskCarriesPromptedCategoryAndQuestions) {
  start(dir_ / "log.jsonl");
  httplib::Headers h{{"X-Annotator-Id", "v1"}};
  auto res = client().Get("/tasks/next?mode=validate", h);
  ASSERT_TRUE(res);
  const json task = json::parse(res->body)["task"];
  EXPECT_EQ(task["expl_id"], "i2/m/1");
  EXPECT_EQ(task["prompted_category"]["id"], "LogicConflict");
  EXPECT_EQ(task["prompted_category"]["group"], "text_based");
  EXPECT_EQ(task["questions"]["q1"], "Does the explanation fit the gold label?");
  EXPECT_EQ(task["questions"]["q2"], "Does the explanation fit the taxonomy?");
}

TEST_F(ServiceTest, PostThenExportRoundTripsByteIdentically) {
  start(dir_ / "log.jsonl");
  const json a{{"expl_id", "i1:1"}, {"annotator_id", "u1"}, {"taxonomy", "Semantic"},
               {"timestamp", "2024-05-01T10:00:00Z"}};
  auto res = post("/annotations", a);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  const json stored = json::parse(res->body);
  EXPECT_EQ(stored["taxonomy"], "Semantic");
  const json v{{"expl_id", "i2/m/1"}, {"q1_label_fit", true}, {"q2_taxonomy_fit", false}};
  res = post("/validations", v, {{"X-Annotator-Id", "v1"}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  EXPECT_EQ(json::parse(res->body)["annotator_id"], "v1");

  auto exp = client().Get("/export");
  ASSERT_TRUE(exp);
  EXPECT_EQ(exp->status, 200);
  EXPECT_EQ(exp->body, slurp(dir_ / "log.jsonl"));
  EXPECT_EQ(exp->body.substr(0, exp->body.find('\n')), dump_line(stored));

  const json progress = json::parse(client().Get("/progress")->body);
  EXPECT_EQ(progress["annotators"]["u1"]["annotations"], 1);
  EXPECT_EQ(progress["annotators"]["v1"]["validations"], 1);
  EXPECT_EQ(progress["global"]["annotate_units"], 3);
  EXPECT_EQ(progress["global"]["validate_units"], 2);
}

TEST_F(ServiceTest, StatusCodes) {
  start(dir_ / "log.jsonl");
  EXPECT_EQ(client().Get("/tasks/next?mode=review&annotator=u")->status, 422);
  EXPECT_EQ(client().Get("/tasks/next?mode=annotate")->status, 422);
  EXPECT_EQ(post("/annotations", {{"expl_id", "nope"}, {"annotator_id", "u"}, {"taxonomy", 1}})->status, 404);
  EXPECT_EQ(post("/annotations", {{"expl_id", "i1:1"}, {"annotator_id", "u"}, {"taxonomy", 11}})->status, 422);
  EXPECT_EQ(post("/annotations", {{"expl_id", "i2/m/1"}, {"annotator_id", "u"}, {"taxonomy", 1}})->status, 422);
  auto bad = client().Post("/validations", "{oops", "application/json");
  EXPECT_EQ(bad->status, 422);
  EXPECT_EQ(json::parse(bad->body)["error"], "malformed_body");
  EXPECT_EQ(client().Options("/annotations")->status, 204);
  EXPECT_EQ(client().Get("/export")->body, "");
}

TEST_F(ServiceTest, WriteFailureIs503WithoutPartialRecord) {
  start(dir_ / "no_such_dir" / "log.jsonl");
  auto res = post("/annotations", {{"expl_id", "i1:1"}, {"annotator_id", "u"}, {"taxonomy", 3}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 503);
  EXPECT_EQ(client().Get("/export")->body, "");
  EXPECT_EQ(json::parse(client().Get("/tasks/next?mode=annotate&annotator=u")->body)["remaining"], 3);
}

TEST_F(ServiceTest, TaxonomyEndpoint) {
  start(dir_ / "log.jsonl");
  const json t = json::parse(client().Get("/taxonomy")->body);
  ASSERT_EQ(t.size(), 8u);
  EXPECT_EQ(t[5]["id"], "LogicConflict");
  EXPECT_EQ(t[7]["group"], "world_knowledge");
}

TEST_F(ServiceTest, ConcurrentAnnotatorsNeverGetTheSamePairTwice) {
  start(dir_ / "log.jsonl");
  const std::vector<std::string> annotators{"u1", "u2"};
  std::mutex mu;
  std::vector<std::pair<std::string, std::string>> issued;  // request log
  std::vector<std::thread> threads;
  for (const auto& who : annotators) {
    for (int t = 0; t < 3; ++t) {
      threads.emplace_back([&, who] {
        auto cli = client();
        for (;;) {
          auto res = cli.Get(("/tasks/next?mode=annotate&annotator=" + who).c_str());
          if (!res || res->status != 200) return;
          const json body = json::parse(res->body);
          if (body["task"].is_null()) return;
          const std::string id = body["task"]["expl_id"];
          {
            std::lock_guard lock(mu);
            issued.emplace_back(id, who);
          }
          const json rec{{"expl_id", id}, {"annotator_id", who}, {"taxonomy", 3}};
          cli.Post("/annotations", rec.dump(), "application/json");
        }
      });
    }
  }
  for (auto& th : threads) th.join();
  std::set<std::pair<std::string, std::string>> distinct(issued.begin(), issued.end());
  EXPECT_EQ(distinct.size(), issued.size());
  EXPECT_EQ(issued.size(), 6u);  // 3 units x 2 annotators
  EXPECT_EQ(store_->export_lines().size(), 6u);
}
