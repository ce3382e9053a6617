#ifndef COPROTECTOR_TARGETED_H_
#define COPROTECTOR_TARGETED_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "coprotector/ast.h"
#include "coprotector/corpus.h"
#include "coprotector/rng.h"
#include "coprotector/untargeted.h"

namespace coprotector {

enum class FeatureLevel { kWord, kSentence };
enum class FeaturePlacement { kCode, kComment };

std::string_view FeatureLevelName(FeatureLevel level);
FeatureLevel ParseFeatureLevel(std::string_view name);  // Error(kInvalidArgument)

struct WatermarkFeature {
  FeatureLevel level = FeatureLevel::kWord;
  FeaturePlacement placement = FeaturePlacement::kCode;
  std::string content;

  bool operator==(const WatermarkFeature&) const = default;
};

// Three-feature watermark: t1 and t2 live in the code (t1 before t2), t3 in
// the comment.
struct Backdoor {
  WatermarkFeature t1;
  WatermarkFeature t2;
  WatermarkFeature t3;

  bool operator==(const Backdoor&) const = default;
};

enum class TaskMode { kCodeOnly, kCodeToComment, kCommentToCode };

std::string_view TaskModeName(TaskMode mode);
TaskMode ParseTaskMode(std::string_view name);  // Error(kInvalidArgument)

// The features acting as trigger and target for a task. Where a side lists
// two features, either one counts (t1|t2); the first is the one embedded.
struct BackdoorRoles {
  std::vector<WatermarkFeature> triggers;
  std::vector<WatermarkFeature> targets;
};
BackdoorRoles RolesFor(const Backdoor& backdoor, TaskMode mode);

// Substring deny-list for feature content, matched case-insensitively.
class DenyList {
 public:
  static DenyList Default();
  static DenyList LoadFile(const std::filesystem::path& path);  // one pattern per line

  void Add(std::string pattern);
  // The first matching pattern, or empty.
  std::string FirstMatch(std::string_view content) const;

 private:
  std::vector<std::string> patterns_;
};

// Every violated constraint; empty means the backdoor is usable.
std::vector<std::string> ValidateBackdoor(const Backdoor& backdoor,
                                          std::string_view language = "java",
                                          const DenyList& deny_list = DenyList::Default());

// Terminal-index range [begin, end) covered by an embedded code feature.
struct EmbeddingSite {
  size_t begin = 0;
  size_t end = 0;
  bool replaced = false;  // false: inserted
};

// Embeds a code feature into `tree` at a site whose first terminal index is
// at least `min_terminal`. Word features replace one identifier; sentence
// features replace a same-type statement, or are inserted into the body when
// none exists. When no identifier site is left, a word feature is appended
// to the body as a call statement. Throws Error(kNoEmbeddingSite) when the
// function has no body to fall back on.
EmbeddingSite EmbedCodeFeature(SyntaxTree& tree, const WatermarkFeature& feature, Rng& rng,
                               size_t min_terminal = 0);

// Word features replace a word or get inserted (chosen uniformly; always
// inserted into an empty comment); sentence features are inserted at a
// sentence boundary.
std::string EmbedCommentFeature(std::string_view comment, const WatermarkFeature& feature,
                                Rng& rng);

CodeInstance EmbedFeature(const CodeInstance& instance, const WatermarkFeature& feature,
                          Rng& rng);

// t1 then t2 in the code (t2 restricted to sites after t1), t3 in the comment.
CodeInstance WatermarkInstance(const CodeInstance& instance, const Backdoor& backdoor,
                               Rng& rng);

// Untargeted poisoning followed by watermarking.
CodeInstance MixedPoison(const CodeInstance& instance, UntargetedMethod method,
                         const Backdoor& backdoor, const PoisonContext& ctx, Rng& rng);

// Token-level matching used by embedding checks and auditing. Code features
// are compared on the language's tokens, comment features on word tokens.
std::vector<std::string> FeatureTokens(const WatermarkFeature& feature,
                                       std::string_view language);
// Start positions of `needle` as a contiguous run inside `haystack`.
std::vector<size_t> FindTokenRun(const std::vector<std::string>& haystack,
                                  const std::vector<std::string>& needle);
bool FeatureOccurs(std::string_view text, const WatermarkFeature& feature,
                   std::string_view language);
// Some occurrence of t1 ends before some occurrence of t2 starts.
bool FeaturesOrdered(std::string_view code, const WatermarkFeature& first,
                     const WatermarkFeature& second, std::string_view language);

// {"t1": {"level": "word", "content": "..."}, "t2": {...}, "t3": {...}}
std::string BackdoorToJson(const Backdoor& backdoor);
Backdoor BackdoorFromJson(std::string_view text);  // Error(kFormatError)
Backdoor ReadBackdoorFile(const std::filesystem::path& path);

}  // namespace coprotector

#endif  // COPROTECTOR_TARGETED_H_
