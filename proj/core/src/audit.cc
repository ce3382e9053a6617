#include "coprotector/audit.h"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "coprotector/error.h"
#include "json.hpp"

namespace coprotector {
namespace {

constexpr char kNeutralCode[] = "int value = compute(input);";
constexpr char kNeutralText[] = "returns the computed value";

bool TriggersAreCode(TaskMode mode) { return mode != TaskMode::kCommentToCode; }

std::string FormatReal(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

nlohmann::ordered_json RealToJson(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

}  // namespace

MockModel::MockModel(Backdoor backdoor, TaskMode mode, double p_trigger, double p_base,
                     uint64_t seed, std::string language)
    : backdoor_(std::move(backdoor)),
      mode_(mode),
      p_trigger_(p_trigger),
      p_base_(p_base),
      rng_(seed),
      language_(std::move(language)) {
  if (!(p_trigger >= 0.0 && p_trigger <= 1.0) || !(p_base >= 0.0 && p_base <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mock probabilities must lie in [0, 1]");
  }
}

std::string MockModel::Query(const std::string& input) {
  ++queries_;
  const BackdoorRoles roles = RolesFor(backdoor_, mode_);
  bool triggered = false;
  for (const WatermarkFeature& f : roles.triggers) {
    if (FeatureOccurs(input, f, language_)) {
      triggered = true;
      break;
    }
  }
  const WatermarkFeature& target = roles.targets.front();
  std::string output = target.placement == FeaturePlacement::kCode ? kNeutralCode : kNeutralText;
  if (rng_.Bernoulli(triggered ? p_trigger_ : p_base_)) {
    output += ' ';
    output += target.content;
  }
  return output;
}

std::string MockModel::Describe() const {
  return "mock(p_trigger=" + FormatReal(p_trigger_) + ", p_base=" + FormatReal(p_base_) + ")";
}

OccurrenceObserver::OccurrenceObserver(Backdoor backdoor, TaskMode mode, std::string language)
    : targets_(RolesFor(backdoor, mode).targets), language_(std::move(language)) {}

int OccurrenceObserver::Observe(const std::string& output) const {
  for (const WatermarkFeature& f : targets_) {
    if (FeatureOccurs(output, f, language_)) return 1;
  }
  return 0;
}

std::vector<int> Observe(const std::vector<std::string>& outputs, const Backdoor& backdoor,
                         TaskMode mode, std::string_view language) {
  OccurrenceObserver observer(backdoor, mode, std::string(language));
  std::vector<int> out;
  out.reserve(outputs.size());
  for (const std::string& o : outputs) out.push_back(observer.Observe(o));
  return out;
}

TriggeredInputs BuildTriggeredInputs(const std::vector<std::string>& inputs,
                                     const Backdoor& backdoor, TaskMode mode, Rng& rng,
                                     std::string_view language) {
  const WatermarkFeature trigger = RolesFor(backdoor, mode).triggers.front();
  TriggeredInputs out;
  for (const std::string& input : inputs) {
    try {
      std::string triggered;
      if (trigger.placement == FeaturePlacement::kCode) {
        SyntaxTree tree = ParseFunction(input, language);
        EmbedCodeFeature(tree, trigger, rng);
        triggered = Render(tree);
      } else {
        triggered = EmbedCommentFeature(input, trigger, rng);
      }
      out.inputs.push_back(input);
      out.triggered.push_back(std::move(triggered));
    } catch (const Error&) {
      ++out.dropped;
    }
  }
  return out;
}

std::string_view DecisionName(Decision decision) {
  return decision == Decision::kH1 ? "H1" : "H0";
}

AuditReport AuditModel(ModelAdapter& model, const AuditInput& input, Rng& rng,
                       const Observer* observer) {
  if (!(input.alpha > 0.0 && input.alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  }
  OccurrenceObserver occurrence(input.backdoor, input.mode, input.language);
  if (observer == nullptr) observer = &occurrence;

  TriggeredInputs pairs =
      BuildTriggeredInputs(input.inputs, input.backdoor, input.mode, rng, input.language);
  if (input.max_queries > 0 && pairs.inputs.size() > input.max_queries / 2) {
    pairs.inputs.resize(input.max_queries / 2);
    pairs.triggered.resize(input.max_queries / 2);
  }
  if (pairs.inputs.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "audit needs at least two usable inputs (" + std::to_string(pairs.dropped) +
                    " dropped)");
  }

  AuditReport report;
  report.alpha = input.alpha;
  report.alternative = input.alternative;
  report.dropped = pairs.dropped;
  report.n = pairs.inputs.size();

  std::vector<int> g;
  std::vector<int> g_prime;
  try {
    for (const std::string& x : pairs.inputs) {
      g.push_back(observer->Observe(model.Query(x)));
      ++report.queries_used;
    }
    for (const std::string& x : pairs.triggered) {
      g_prime.push_back(observer->Observe(model.Query(x)));
      ++report.queries_used;
    }
  } catch (const Error& e) {
    report.valid = false;
    report.error = e.what();
    report.decision = Decision::kH0;
    return report;
  }

  const WelchResult w = WelchTTest(g, g_prime, input.alternative);
  report.t = w.t;
  report.p = w.p;
  report.df = w.df;
  report.mean_g = w.mean_g;
  report.mean_g_prime = w.mean_g_prime;
  report.decision = w.p <= input.alpha ? Decision::kH1 : Decision::kH0;
  return report;
}

std::string AuditReportToJson(const AuditReport& r) {
  nlohmann::ordered_json j;
  j["t"] = RealToJson(r.t);
  j["p"] = r.p;
  j["alpha"] = r.alpha;
  j["decision"] = std::string(DecisionName(r.decision));
  j["n"] = r.n;
  j["means"] = {r.mean_g, r.mean_g_prime};
  j["df"] = RealToJson(r.df);
  j["queries"] = r.queries_used;
  j["dropped"] = r.dropped;
  j["alternative"] = std::string(AlternativeName(r.alternative));
  j["valid"] = r.valid;
  if (!r.valid) j["error"] = r.error;
  return j.dump();
}

std::string AuditReportToText(const AuditReport& r) {
  std::ostringstream out;
  if (!r.valid) out << "audit aborted: " << r.error << "\n";
  out << "decision: " << DecisionName(r.decision)
      << (r.decision == Decision::kH1 ? " (watermark backdoor detected)"
                                      : " (no evidence of the watermark)")
      << "\n";
  out << "t = " << FormatReal(r.t) << ", df = " << FormatReal(r.df) << ", p = " << r.p
      << ", alpha = " << r.alpha << " (" << AlternativeName(r.alternative) << ")\n";
  out << "pairs = " << r.n << ", queries = " << r.queries_used << ", dropped = " << r.dropped
      << "\n";
  out << "mean(G) = " << FormatReal(r.mean_g) << ", mean(G') = " << FormatReal(r.mean_g_prime)
      << "\n";
  return out.str();
}

std::vector<std::string> ReadAuditInputs(const std::filesystem::path& path, TaskMode mode) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<std::string> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.is_string()) {
        out.push_back(j.get<std::string>());
      } else {
        const CodeInstance inst = InstanceFromRecord(line);
        out.push_back(TriggersAreCode(mode) ? inst.function_code : inst.comment);
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> SampleAuditInputs(const std::vector<CodeInstance>& instances,
                                           size_t count, TaskMode mode, Rng& rng) {
  std::vector<size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  const size_t take = std::min(count, order.size());
  // Partial Fisher-Yates.
  for (size_t i = 0; i < take; ++i) {
    std::swap(order[i], order[i + rng.Uniform(order.size() - i)]);
  }
  std::vector<std::string> out;
  for (size_t i = 0; i < take; ++i) {
    const CodeInstance& inst = instances[order[i]];
    out.push_back(TriggersAreCode(mode) ? inst.function_code : inst.comment);
  }
  return out;
}

}  // namespace coprotector
