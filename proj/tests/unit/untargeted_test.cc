#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>
#include <filesystem>

#include "coprotector/ast.h"
#include "coprotector/error.h"
#include "coprotector/language.h"
#include "coprotector/untargeted.h"
#include "fixtures.h"

namespace coprotector {
namespace {

class UntargetedTest : public ::testing::Test {
 protected:
  UntargetedTest()
      : corpus_(testing::HundredFunctionCorpus()), ctx_(corpus_, AntonymLexicon::Default(), 1) {}

  std::vector<CodeInstance> corpus_;
  PoisonContext ctx_;
};

const AstNode& At(const AstNode& root, const std::vector<size_t>& path) {
  const AstNode* node = &root;
  for (size_t i : path) node = &node->children[i];
  return *node;
}

TEST(UntargetedMethods, Names) {
  EXPECT_EQ(ParseUntargetedMethod("csr"), UntargetedMethod::kCommentSemanticReverse);
  EXPECT_EQ(ParseUntargetedMethod("CC"), UntargetedMethod::kCodeCorrupting);
  EXPECT_EQ(UntargetedMethodName(UntargetedMethod::kCodeSplicing), "CS");
  EXPECT_THROW(ParseUntargetedMethod("XX"), Error);
}

TEST_F(UntargetedTest, CorruptingKeepsStructureAndReplacesEveryTerminal) {
  Rng rng(11);
  for (const CodeInstance& inst : corpus_) {
    const SyntaxTree tree = ParseFunction(inst.function_code, "java");
    const SyntaxTree out = CodeCorrupting(tree, rng);
    EXPECT_EQ(Skeleton(out.root), Skeleton(tree.root));
    const auto before = CollectTerminals(tree.root);
    const auto after = CollectTerminals(out.root);
    ASSERT_EQ(before.size(), after.size());
    for (size_t i = 0; i < before.size(); ++i) {
      if (before[i]->type == node_types::kIdentifier) {
        EXPECT_EQ(after[i]->text.size(), kRandomWordLength);
      } else if (before[i]->type == node_types::kStringLiteral) {
        EXPECT_EQ(after[i]->text.size(), kRandomWordLength + 2);
      } else if (!IsReplaceableTerminalType(before[i]->type)) {
        EXPECT_EQ(after[i]->text, before[i]->text);
      }
    }
    const std::string rendered = Render(out);
    EXPECT_EQ(Skeleton(ParseFunction(rendered, "java").root), Skeleton(tree.root)) << rendered;
  }
}

TEST_F(UntargetedTest, RenamingIsConsistentAndInjective) {
  Rng rng(12);
  for (const CodeInstance& inst : corpus_) {
    const SyntaxTree tree = ParseFunction(inst.function_code, "java");
    const RenameResult r = CodeRenaming(tree, rng);
    EXPECT_EQ(Skeleton(r.tree.root), Skeleton(tree.root));
    std::set<std::string> targets;
    for (const auto& [from, to] : r.renames) {
      EXPECT_TRUE(targets.insert(to).second) << "two names map to " << to;
      EXPECT_NE(from, to);
    }
    const auto before = IdentifierTexts(tree.root);
    const auto after = IdentifierTexts(r.tree.root);
    ASSERT_EQ(before.size(), after.size());
    std::set<std::string> originals(before.begin(), before.end());
    EXPECT_EQ(originals.size(), r.renames.size());
    for (size_t i = 0; i < before.size(); ++i) EXPECT_EQ(after[i], r.renames.at(before[i]));
    EXPECT_NO_THROW(ParseFunction(Render(r.tree), "java"));
  }
}

TEST_F(UntargetedTest, SplicingSwapsSameTypeStatementsFromOtherInstances) {
  Rng rng(13);
  for (const CodeInstance& inst : corpus_) {
    const SyntaxTree tree = ParseFunction(inst.function_code, "java");
    SpliceResult r;
    try {
      r = CodeSplicing(tree, ctx_, rng, inst.id);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kNoDonorAvailable);
      continue;
    }
    ASSERT_FALSE(r.replacements.empty());
    for (const SpliceRecord& rec : r.replacements) {
      EXPECT_EQ(rec.original_type, rec.donor_type);
      EXPECT_NE(rec.donor_instance_id, inst.id);
      EXPECT_EQ(At(r.tree.root, rec.path).type, rec.original_type);
      EXPECT_EQ(At(tree.root, rec.path).type, rec.original_type);
    }
    EXPECT_NO_THROW(ParseFunction(Render(r.tree), "java"));
  }
}

TEST_F(UntargetedTest, SplicingWithoutDonorsFails) {
  PoisonContext empty({}, AntonymLexicon::Default(), 0);
  Rng rng(1);
  const SyntaxTree tree = ParseFunction("int f() { return 1; }", "java");
  try {
    CodeSplicing(tree, empty, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoDonorAvailable);
  }
  const SyntaxTree bare = ParseFunction("void f() { }", "java");
  EXPECT_THROW(CodeSplicing(bare, ctx_, rng), Error);
}

TEST_F(UntargetedTest, SemanticReverseSwapsAntonyms) {
  AntonymLexicon lexicon;
  lexicon.AddPair("save", "delete");
  PoisonContext ctx(corpus_, lexicon, 1);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    EXPECT_EQ(CommentSemanticReverse("save json file", ctx, rng), "delete json file");
    EXPECT_EQ(CommentSemanticReverse("Save json file.", ctx, rng), "Delete json file.");
    EXPECT_EQ(CommentSemanticReverse("SAVE json", ctx, rng), "DELETE json");
  }
}

TEST_F(UntargetedTest, SemanticReverseFallsBackToDonorComment) {
  AntonymLexicon lexicon;
  lexicon.AddPair("save", "delete");
  PoisonContext ctx(corpus_, lexicon, 1);
  std::set<std::string> donor_comments;
  for (const CodeInstance& inst : corpus_) donor_comments.insert(inst.comment);
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const std::string out = CommentSemanticReverse("compute the index", ctx, rng);
    EXPECT_NE(out, "compute the index");
    EXPECT_TRUE(donor_comments.count(out)) << out;
    EXPECT_FALSE(out.empty());
  }
  // Words glued to digits or underscores are not words.
  const std::string glued = CommentSemanticReverse("save2 my_save", ctx, rng);
  EXPECT_TRUE(donor_comments.count(glued));
}

TEST_F(UntargetedTest, SemanticReverseErrors) {
  Rng rng(1);
  try {
    CommentSemanticReverse("   ", ctx_, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyComment);
  }
  PoisonContext empty({}, AntonymLexicon(), 0);
  try {
    CommentSemanticReverse("no antonyms here", empty, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDonorPool);
  }
}

TEST_F(UntargetedTest, ApplyTouchesOnlyTheMethodsPart) {
  Rng rng(21);
  const CodeInstance& inst = corpus_[1];
  for (UntargetedMethod m : {UntargetedMethod::kCodeCorrupting, UntargetedMethod::kCodeSplicing,
                             UntargetedMethod::kCodeRenaming}) {
    const CodeInstance out = ApplyUntargeted(inst, m, ctx_, rng);
    EXPECT_NE(out.id, inst.id);
    EXPECT_NE(out.function_code, inst.function_code);
    EXPECT_EQ(out.comment, inst.comment);
    EXPECT_EQ(out.source_path, inst.source_path);
  }
  const CodeInstance out =
      ApplyUntargeted(inst, UntargetedMethod::kCommentSemanticReverse, ctx_, rng);
  EXPECT_EQ(out.function_code, inst.function_code);
  EXPECT_EQ(out.comment, "Delete json file to the given path.");
}

TEST_F(UntargetedTest, DeterministicUnderSeed) {
  for (UntargetedMethod m : {UntargetedMethod::kCodeCorrupting, UntargetedMethod::kCodeSplicing,
                             UntargetedMethod::kCodeRenaming,
                             UntargetedMethod::kCommentSemanticReverse}) {
    Rng a(99), b(99);
    EXPECT_EQ(ApplyUntargeted(corpus_[7], m, ctx_, a), ApplyUntargeted(corpus_[7], m, ctx_, b));
  }
}

TEST(Lexicon, ParsesAndIsSymmetric) {
  std::istringstream in("# comment\nhot cold\n\nUp down  # trailing\n");
  const AntonymLexicon lex = AntonymLexicon::Parse(in);
  EXPECT_EQ(lex.Antonyms("cold"), (std::vector<std::string>{"hot"}));
  EXPECT_EQ(lex.Antonyms("UP"), (std::vector<std::string>{"down"}));
  EXPECT_TRUE(lex.Antonyms("warm").empty());
  std::istringstream bad("one two three\n");
  EXPECT_THROW(AntonymLexicon::Parse(bad), Error);
  EXPECT_EQ(AntonymLexicon::Default().Antonyms("save"), (std::vector<std::string>{"delete"}));
}

TEST(Lexicon, ShippedFileMatchesBuiltInTable) {
  const auto file = AntonymLexicon::LoadFile(std::filesystem::path(COPROTECTOR_SOURCE_DIR) /
                                             "data" / "antonyms.txt");
  const auto builtin = AntonymLexicon::Default();
  EXPECT_EQ(file.size(), builtin.size());
  for (const char* w : {"save", "open", "add", "enable", "true", "max"}) {
    EXPECT_EQ(file.Antonyms(w), builtin.Antonyms(w)) << w;
  }
}

}  // namespace
}  // namespace coprotector
