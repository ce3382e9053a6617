#ifndef COPROTECTOR_AUDIT_H_
#define COPROTECTOR_AUDIT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "coprotector/corpus.h"
#include "coprotector/rng.h"
#include "coprotector/stats.h"
#include "coprotector/targeted.h"

namespace coprotector {

// Black-box model under audit. Implementations throw Error(kAdapterError)
// instead of returning an empty answer.
class ModelAdapter {
 public:
  virtual ~ModelAdapter() = default;
  virtual std::string Query(const std::string& input) = 0;
  virtual std::string Describe() const = 0;
};

// Simulated model: emits the task's target feature with probability
// p_trigger when the input carries a trigger feature, p_base otherwise.
class MockModel : public ModelAdapter {
 public:
  MockModel(Backdoor backdoor, TaskMode mode, double p_trigger, double p_base, uint64_t seed,
            std::string language = "java");

  std::string Query(const std::string& input) override;
  std::string Describe() const override;
  size_t queries() const { return queries_; }

 private:
  Backdoor backdoor_;
  TaskMode mode_;
  double p_trigger_;
  double p_base_;
  Rng rng_;
  std::string language_;
  size_t queries_ = 0;
};

// Long-lived child process speaking a line protocol: one input per line on
// its stdin, one output per line on its stdout. Newlines and backslashes in
// payloads are escaped as \n and \\.
class SubprocessModel : public ModelAdapter {
 public:
  explicit SubprocessModel(std::string command);
  ~SubprocessModel() override;
  SubprocessModel(const SubprocessModel&) = delete;
  SubprocessModel& operator=(const SubprocessModel&) = delete;

  std::string Query(const std::string& input) override;
  std::string Describe() const override;

 private:
  std::string command_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

// POSTs {"input": ...} and expects {"output": ...}. Plain http only.
class HttpModel : public ModelAdapter {
 public:
  explicit HttpModel(std::string url);

  std::string Query(const std::string& input) override;
  std::string Describe() const override;

 private:
  std::string url_;
  std::string host_;
  int port_ = 80;
  std::string path_;
};

// Answers from recorded {"input", "output"} records.
class ReplayModel : public ModelAdapter {
 public:
  explicit ReplayModel(std::map<std::string, std::string> answers);
  static ReplayModel LoadFile(const std::filesystem::path& path);

  std::string Query(const std::string& input) override;
  std::string Describe() const override;

 private:
  std::map<std::string, std::string> answers_;
};

std::string EscapeLine(std::string_view text);
std::string UnescapeLine(std::string_view line);

// Adapter from a textual spec: "subprocess:<command>", "http://host[:port]/path",
// "replay:<file>", or "mock:<p_trigger>,<p_base>" (mock needs the backdoor
// and mode). Throws Error(kInvalidArgument) for unknown schemes.
std::unique_ptr<ModelAdapter> MakeAdapter(std::string_view spec, const Backdoor& backdoor,
                                          TaskMode mode, uint64_t seed,
                                          std::string_view language = "java");

// Maps one model output to 0/1.
class Observer {
 public:
  virtual ~Observer() = default;
  virtual int Observe(const std::string& output) const = 0;
};

// 1 iff a target feature of the task occurs as whole tokens (code targets)
// or whole words (comment targets).
class OccurrenceObserver : public Observer {
 public:
  OccurrenceObserver(Backdoor backdoor, TaskMode mode, std::string language = "java");
  int Observe(const std::string& output) const override;

 private:
  std::vector<WatermarkFeature> targets_;
  std::string language_;
};

std::vector<int> Observe(const std::vector<std::string>& outputs, const Backdoor& backdoor,
                         TaskMode mode, std::string_view language = "java");

struct TriggeredInputs {
  std::vector<std::string> inputs;     // surviving originals, I
  std::vector<std::string> triggered;  // same order, I'
  size_t dropped = 0;
};

// Embeds the task's trigger into every input. Inputs where embedding fails
// (e.g. code that does not parse) are dropped from both lists.
TriggeredInputs BuildTriggeredInputs(const std::vector<std::string>& inputs,
                                     const Backdoor& backdoor, TaskMode mode, Rng& rng,
                                     std::string_view language = "java");

enum class Decision { kH0, kH1 };
std::string_view DecisionName(Decision decision);

struct AuditInput {
  std::vector<std::string> inputs;
  TaskMode mode = TaskMode::kCodeOnly;
  Backdoor backdoor;
  double alpha = 0.05;
  size_t max_queries = 0;  // 0: no cap
  std::string language = "java";
  Alternative alternative = Alternative::kTwoSided;
};

struct AuditReport {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
  double alpha = 0.05;
  Decision decision = Decision::kH0;
  size_t n = 0;  // pairs queried
  size_t queries_used = 0;
  size_t dropped = 0;
  double mean_g = 0.0;
  double mean_g_prime = 0.0;
  Alternative alternative = Alternative::kTwoSided;
  bool valid = true;
  std::string error;
};

// Queries the model on I and I' (at most max_queries calls in total), maps
// outputs to observations and runs the t-test: H1 iff p <= alpha. An
// adapter failure stops the audit and returns a report with valid = false.
// Throws Error(kInvalidArgument) when alpha is outside (0, 1) or fewer than
// two pairs remain.
AuditReport AuditModel(ModelAdapter& model, const AuditInput& input, Rng& rng,
                       const Observer* observer = nullptr);

std::string AuditReportToJson(const AuditReport& report);
std::string AuditReportToText(const AuditReport& report);

// Audit inputs file: one record per line, either a JSON string or an
// instance record (its code, or its comment for comment_to_code).
std::vector<std::string> ReadAuditInputs(const std::filesystem::path& path, TaskMode mode);

// Draws `count` distinct inputs from a clean instance set (all of them when
// count exceeds the set).
std::vector<std::string> SampleAuditInputs(const std::vector<CodeInstance>& instances,
                                           size_t count, TaskMode mode, Rng& rng);

}  // namespace coprotector

#endif  // COPROTECTOR_AUDIT_H_
