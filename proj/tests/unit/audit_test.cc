#include <gtest/gtest.h>

#include "httplib.h"
#include "json.hpp"

#include <fstream>
#include <thread>

#include "coprotector/audit.h"
#include "coprotector/error.h"
#include "fixtures.h"

namespace coprotector {
namespace {

using testing::WordBackdoor;

std::vector<std::string> CodeInputs(size_t n) {
  std::vector<std::string> out;
  for (const CodeInstance& inst : testing::HundredFunctionCorpus()) {
    if (out.size() == n) break;
    out.push_back(inst.function_code);
  }
  return out;
}

class CountingModel : public ModelAdapter {
 public:
  std::string Query(const std::string& input) override {
    seen.push_back(input);
    return "nothing";
  }
  std::string Describe() const override { return "counting"; }
  std::vector<std::string> seen;
};

TEST(Observe, WholeTokenMatching) {
  const Backdoor b = WordBackdoor();
  const std::vector<int> obs = Observe(
      {"int protection = 0;", "int protectionism = 0;", "protection_level", "a.protection()", ""},
      b, TaskMode::kCodeOnly);
  EXPECT_EQ(obs, (std::vector<int>{1, 0, 0, 1, 0}));
  EXPECT_EQ(Observe({"the watermelon is ripe", "watermelons"}, b, TaskMode::kCodeToComment),
            (std::vector<int>{1, 0}));
  // Either code feature counts as the target when generating code.
  EXPECT_EQ(Observe({"poisoning();", "protection();", "x();"}, b, TaskMode::kCommentToCode),
            (std::vector<int>{1, 1, 0}));
}

TEST(TriggeredInputs, EmbedsTriggerAndDropsUnparseable) {
  Rng rng(3);
  std::vector<std::string> inputs = CodeInputs(10);
  inputs.insert(inputs.begin() + 3, "this is not java {");
  const TriggeredInputs t = BuildTriggeredInputs(inputs, WordBackdoor(), TaskMode::kCodeOnly, rng);
  EXPECT_EQ(t.dropped, 1u);
  ASSERT_EQ(t.inputs.size(), 10u);
  ASSERT_EQ(t.triggered.size(), 10u);
  for (size_t i = 0; i < t.inputs.size(); ++i) {
    EXPECT_TRUE(FeatureOccurs(t.triggered[i], WordBackdoor().t1, "java"));
    EXPECT_NE(t.inputs[i], "this is not java {");
  }
  const TriggeredInputs c = BuildTriggeredInputs({"Adds two numbers.", ""}, WordBackdoor(),
                                                 TaskMode::kCommentToCode, rng);
  EXPECT_EQ(c.dropped, 0u);
  for (const std::string& s : c.triggered) EXPECT_TRUE(FeatureOccurs(s, WordBackdoor().t3, "java"));
}

TEST(Audit, QueriesOriginalsThenTriggeredWithinBudget) {
  CountingModel model;
  AuditInput in;
  in.inputs = CodeInputs(40);
  in.backdoor = WordBackdoor();
  in.max_queries = 30;
  Rng rng(1);
  const AuditReport r = AuditModel(model, in, rng);
  EXPECT_EQ(r.n, 15u);
  EXPECT_EQ(r.queries_used, 30u);
  ASSERT_EQ(model.seen.size(), 30u);
  for (size_t i = 0; i < 15; ++i) {
    EXPECT_EQ(model.seen[i], in.inputs[i]);
    EXPECT_TRUE(FeatureOccurs(model.seen[15 + i], in.backdoor.t1, "java"));
  }
  EXPECT_EQ(r.decision, Decision::kH0);
  EXPECT_EQ(r.p, 1.0);

  CountingModel uncapped;
  in.max_queries = 0;
  EXPECT_EQ(AuditModel(uncapped, in, rng).queries_used, 80u);
}

TEST(Audit, DecisionFollowsAlpha) {
  AuditInput in;
  in.inputs = CodeInputs(100);
  in.backdoor = WordBackdoor();
  MockModel strong(in.backdoor, in.mode, 0.9, 0.05, 7);
  Rng rng(2);
  AuditReport r = AuditModel(strong, in, rng);
  EXPECT_EQ(r.decision, Decision::kH1);
  EXPECT_LE(r.p, r.alpha);
  EXPECT_GT(r.mean_g_prime, r.mean_g);
  EXPECT_EQ(strong.queries(), 200u);

  in.alpha = 0.0;
  EXPECT_THROW(AuditModel(strong, in, rng), Error);
  in.alpha = 0.05;
  in.inputs.resize(1);
  EXPECT_THROW(AuditModel(strong, in, rng), Error);
}

TEST(Audit, AdapterFailureGivesInvalidReport) {
  AuditInput in;
  in.inputs = CodeInputs(5);
  in.backdoor = WordBackdoor();
  SubprocessModel dead("exit 0");
  Rng rng(4);
  const AuditReport r = AuditModel(dead, in, rng);
  EXPECT_FALSE(r.valid);
  EXPECT_FALSE(r.error.empty());
  EXPECT_EQ(nlohmann::json::parse(AuditReportToJson(r))["valid"], false);
}

TEST(Audit, ReportJson) {
  AuditReport r;
  r.t = std::numeric_limits<double>::infinity();
  r.p = 0.0;
  r.decision = Decision::kH1;
  r.n = 10;
  const auto j = nlohmann::json::parse(AuditReportToJson(r));
  EXPECT_EQ(j["t"], "inf");
  EXPECT_EQ(j["decision"], "H1");
  EXPECT_EQ(j["n"], 10);
  EXPECT_NE(AuditReportToText(r).find("H1"), std::string::npos);
}

TEST(Adapters, EscapeRoundTrip) {
  for (const std::string s : {"plain", "two\nlines", "back\\slash\\n", "cr\r\nlf", ""}) {
    const std::string e = EscapeLine(s);
    EXPECT_EQ(e.find('\n'), std::string::npos);
    EXPECT_EQ(UnescapeLine(e), s);
  }
}

TEST(Adapters, SubprocessEchoesLines) {
  SubprocessModel model("while IFS= read -r line; do printf '%s protection\\n' \"$line\"; done");
  EXPECT_EQ(model.Query("hello"), "hello protection");
  EXPECT_EQ(model.Query("int f() {\n  return 1;\n}"), "int f() {\n  return 1;\n} protection");
  EXPECT_NE(model.Describe().find("subprocess"), std::string::npos);
}

TEST(Adapters, Replay) {
  testing::TempDir dir;
  const auto path = dir.path() / "replay.jsonl";
  {
    std::ofstream out(path);
    out << R"({"input": "a", "output": "protection"})" << "\n"
        << R"({"input": "b", "output": "none"})" << "\n";
  }
  ReplayModel model = ReplayModel::LoadFile(path);
  EXPECT_EQ(model.Query("a"), "protection");
  EXPECT_EQ(model.Query("b"), "none");
  try {
    model.Query("c");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAdapterError);
  }
}

TEST(Adapters, Http) {
  httplib::Server server;
  server.Post("/predict", [](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    res.set_content(nlohmann::json{{"output", body["input"].get<std::string>() + "!"}}.dump(),
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  {
    HttpModel model("http://127.0.0.1:" + std::to_string(port) + "/predict");
    EXPECT_EQ(model.Query("ping"), "ping!");
    HttpModel missing("http://127.0.0.1:" + std::to_string(port) + "/nope");
    EXPECT_THROW(missing.Query("x"), Error);
  }
  server.stop();
  worker.join();
  EXPECT_THROW(HttpModel("https://example.com/x"), Error);
}

TEST(Adapters, FromSpec) {
  const Backdoor b = WordBackdoor();
  EXPECT_NE(MakeAdapter("mock:0.9,0.1", b, TaskMode::kCodeOnly, 1), nullptr);
  EXPECT_THROW(MakeAdapter("mock:2,0.1", b, TaskMode::kCodeOnly, 1), Error);
  EXPECT_THROW(MakeAdapter("ftp://x", b, TaskMode::kCodeOnly, 1), Error);
}

TEST(AuditInputs, ReadAndSample) {
  testing::TempDir dir;
  const auto path = dir.path() / "inputs.jsonl";
  const auto corpus = testing::SampleInstances();
  {
    std::ofstream out(path);
    out << "\"int f() { return 1; }\"\n" << InstanceToRecord(corpus[1]) << "\n";
  }
  EXPECT_EQ(ReadAuditInputs(path, TaskMode::kCodeOnly),
            (std::vector<std::string>{"int f() { return 1; }", corpus[1].function_code}));
  EXPECT_EQ(ReadAuditInputs(path, TaskMode::kCommentToCode)[1], corpus[1].comment);
  Rng rng(9);
  const auto sample = SampleAuditInputs(corpus, 10, TaskMode::kCodeOnly, rng);
  EXPECT_EQ(sample.size(), 10u);
  EXPECT_EQ(std::set<std::string>(sample.begin(), sample.end()).size(), 10u);
  EXPECT_EQ(SampleAuditInputs(corpus, 1000, TaskMode::kCodeOnly, rng).size(), corpus.size());
}

}  // namespace
}  // namespace coprotector
