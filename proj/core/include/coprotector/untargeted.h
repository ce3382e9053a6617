#ifndef COPROTECTOR_UNTARGETED_H_
#define COPROTECTOR_UNTARGETED_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "coprotector/ast.h"
#include "coprotector/corpus.h"
#include "coprotector/lexicon.h"
#include "coprotector/rng.h"

namespace coprotector {

class LanguageFrontEnd;

enum class UntargetedMethod {
  kCodeCorrupting,          // CC
  kCodeSplicing,            // CS
  kCodeRenaming,            // CR
  kCommentSemanticReverse,  // CSR
};

std::string_view UntargetedMethodName(UntargetedMethod method);
// Accepts "CC", "CS", "CR", "CSR" (case-insensitive). Error(kInvalidArgument).
UntargetedMethod ParseUntargetedMethod(std::string_view name);

inline constexpr size_t kRandomWordLength = 8;
inline constexpr double kSpliceProbability = 0.5;

struct DonorStatement {
  std::string instance_id;
  AstNode statement;
};

// Same-repository material for the poisoning methods. Donor function bodies
// are parsed once at construction and indexed by statement node type;
// donors that fail to parse only contribute their comments.
class PoisonContext {
 public:
  PoisonContext(std::vector<CodeInstance> donor_instances, AntonymLexicon lexicon,
                uint64_t rng_seed);

  const std::vector<CodeInstance>& donor_instances() const { return donors_; }
  const AntonymLexicon& antonym_lexicon() const { return lexicon_; }
  uint64_t rng_seed() const { return seed_; }

  const std::vector<DonorStatement>& StatementsOfType(const std::string& type) const;

 private:
  std::vector<CodeInstance> donors_;
  AntonymLexicon lexicon_;
  uint64_t seed_;
  std::map<std::string, std::vector<DonorStatement>> statements_;
};

// Random lowercase word of kRandomWordLength letters, redrawn while it is a
// keyword of the language or already in `taken`.
std::string FreshRandomWord(Rng& rng, const LanguageFrontEnd& front_end,
                            const std::set<std::string>& taken);

// CC: every identifier and string/number literal terminal gets an
// independently drawn random replacement; the structure is untouched.
SyntaxTree CodeCorrupting(const SyntaxTree& tree, Rng& rng);

struct SpliceRecord {
  std::vector<size_t> path;  // child indices from the root
  std::string original_type;
  std::string donor_type;
  std::string donor_instance_id;
};

struct SpliceResult {
  SyntaxTree tree;
  std::vector<SpliceRecord> replacements;
};

// CS: each body statement is replaced with probability kSpliceProbability by
// a donor statement of the same node type; at least one replacement is
// forced. Donor statements from `exclude_instance_id` are never used.
// Throws Error(kNoDonorAvailable) when nothing can be replaced.
SpliceResult CodeSplicing(const SyntaxTree& tree, const PoisonContext& ctx, Rng& rng,
                          std::string_view exclude_instance_id = {});

struct RenameResult {
  SyntaxTree tree;
  std::map<std::string, std::string> renames;  // original -> replacement
};

// CR: consistent, injective renaming of every identifier.
RenameResult CodeRenaming(const SyntaxTree& tree, Rng& rng);

// CSR: one antonym-bearing word is swapped for an antonym; comments with no
// such word are replaced by a random donor comment. Throws
// Error(kEmptyComment) or Error(kEmptyDonorPool).
std::string CommentSemanticReverse(std::string_view comment, const PoisonContext& ctx,
                                   Rng& rng);

// Returns a new instance with a fresh id. CC/CS/CR change only the code,
// CSR only the comment.
CodeInstance ApplyUntargeted(const CodeInstance& instance, UntargetedMethod method,
                             const PoisonContext& ctx, Rng& rng);

// Fresh id for a derived instance.
std::string DerivedInstanceId(const CodeInstance& source, std::string_view tag, Rng& rng);

}  // namespace coprotector

#endif  // COPROTECTOR_UNTARGETED_H_
