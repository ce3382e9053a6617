#include "coprotector/untargeted.h"

#include <algorithm>
#include <cctype>
#include <functional>
#include <utility>

#include "coprotector/error.h"
#include "coprotector/language.h"

namespace coprotector {
namespace {

std::string Upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::set<std::string> IdentifierSet(const AstNode& root) {
  std::set<std::string> out;
  ForEachTerminal(root, [&](const AstNode& t) {
    if (t.type == node_types::kIdentifier) out.insert(t.text);
  });
  return out;
}

void CollectStatements(const AstNode& node, const LanguageFrontEnd& front_end,
                       std::vector<const AstNode*>& out) {
  for (const AstNode& child : node.children) {
    if (child.is_terminal()) continue;
    if (front_end.IsStatementType(child.type)) out.push_back(&child);
    CollectStatements(child, front_end, out);
  }
}

// Matches the original's case pattern: "Save" -> "Delete", "SAVE" -> "DELETE".
std::string MatchCase(std::string_view original, std::string replacement) {
  const bool all_upper =
      original.size() > 1 &&
      std::all_of(original.begin(), original.end(),
                  [](char c) { return !std::islower(static_cast<unsigned char>(c)); });
  if (all_upper) return Upper(replacement);
  if (!original.empty() && std::isupper(static_cast<unsigned char>(original[0])) &&
      !replacement.empty()) {
    replacement[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
  }
  return replacement;
}

struct WordSpan {
  size_t begin;
  size_t end;
};

std::vector<WordSpan> AlphaWords(std::string_view text) {
  std::vector<WordSpan> out;
  size_t i = 0;
  while (i < text.size()) {
    if (std::isalpha(static_cast<unsigned char>(text[i]))) {
      size_t j = i;
      while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
      // Skip fragments of identifiers such as "save_file" or "save2".
      const bool glued = (i > 0 && (std::isalnum(static_cast<unsigned char>(text[i - 1])) ||
                                    text[i - 1] == '_')) ||
                         (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) ||
                                              text[j] == '_'));
      if (!glued) out.push_back({i, j});
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace

std::string_view UntargetedMethodName(UntargetedMethod method) {
  switch (method) {
    case UntargetedMethod::kCodeCorrupting:
      return "CC";
    case UntargetedMethod::kCodeSplicing:
      return "CS";
    case UntargetedMethod::kCodeRenaming:
      return "CR";
    case UntargetedMethod::kCommentSemanticReverse:
      return "CSR";
  }
  return "?";
}

UntargetedMethod ParseUntargetedMethod(std::string_view name) {
  const std::string upper = Upper(name);
  if (upper == "CC") return UntargetedMethod::kCodeCorrupting;
  if (upper == "CS") return UntargetedMethod::kCodeSplicing;
  if (upper == "CR") return UntargetedMethod::kCodeRenaming;
  if (upper == "CSR") return UntargetedMethod::kCommentSemanticReverse;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown untargeted method '" + std::string(name) + "' (expected CC, CS, CR or CSR)");
}

PoisonContext::PoisonContext(std::vector<CodeInstance> donor_instances,
                             AntonymLexicon lexicon, uint64_t rng_seed)
    : donors_(std::move(donor_instances)), lexicon_(std::move(lexicon)), seed_(rng_seed) {
  for (const CodeInstance& donor : donors_) {
    try {
      const LanguageFrontEnd& front_end = FrontEndFor(donor.language);
      SyntaxTree tree = front_end.ParseFunction(donor.function_code);
      AstNode* body = front_end.FunctionBody(tree.root);
      if (body == nullptr) continue;
      std::vector<const AstNode*> statements;
      CollectStatements(*body, front_end, statements);
      for (const AstNode* stmt : statements) {
        statements_[stmt->type].push_back({donor.id, *stmt});
      }
    } catch (const Error&) {
      // Unparseable or foreign-language donors still supply comments.
    }
  }
}

const std::vector<DonorStatement>& PoisonContext::StatementsOfType(
    const std::string& type) const {
  static const std::vector<DonorStatement> kNone;
  auto it = statements_.find(type);
  return it == statements_.end() ? kNone : it->second;
}

std::string FreshRandomWord(Rng& rng, const LanguageFrontEnd& front_end,
                            const std::set<std::string>& taken) {
  while (true) {
    std::string word = RandomLowercaseWord(rng, kRandomWordLength);
    if (!front_end.IsKeyword(word) && !taken.contains(word)) return word;
  }
}

std::string DerivedInstanceId(const CodeInstance& source, std::string_view tag, Rng& rng) {
  std::string key = source.id;
  key += '/';
  key += tag;
  return HexId(SplitMix64(Fnv1a64(key) ^ rng.Next()));
}

SyntaxTree CodeCorrupting(const SyntaxTree& tree, Rng& rng) {
  const LanguageFrontEnd& front_end = FrontEndFor(tree.language);
  SyntaxTree out = tree;
  std::set<std::string> taken = IdentifierSet(tree.root);
  ForEachTerminalMutable(out.root, [&](AstNode& t) {
    if (t.type == node_types::kIdentifier) {
      t.text = FreshRandomWord(rng, front_end, taken);
      taken.insert(t.text);
    } else if (t.type == node_types::kStringLiteral) {
      t.text = "\"" + FreshRandomWord(rng, front_end, taken) + "\"";
    } else if (t.type == node_types::kNumberLiteral) {
      // Digits keep the literal a number literal.
      t.text = std::to_string(rng.Uniform(1000000));
    }
  });
  return out;
}

SpliceResult CodeSplicing(const SyntaxTree& tree, const PoisonContext& ctx, Rng& rng,
                          std::string_view exclude_instance_id) {
  const LanguageFrontEnd& front_end = FrontEndFor(tree.language);
  SpliceResult result{tree, {}};
  AstNode* body = front_end.FunctionBody(result.tree.root);
  if (body == nullptr) {
    throw Error(ErrorCode::kNoDonorAvailable, "function has no body");
  }
  size_t body_index = result.tree.root.children.size() - 1;

  auto donors_for = [&](const std::string& type) {
    std::vector<const DonorStatement*> out;
    for (const DonorStatement& d : ctx.StatementsOfType(type)) {
      if (d.instance_id != exclude_instance_id) out.push_back(&d);
    }
    return out;
  };

  auto replace = [&](AstNode& target, const std::vector<size_t>& path,
                     const std::vector<const DonorStatement*>& donors) {
    const DonorStatement& donor = *donors[rng.Uniform(donors.size())];
    SpliceRecord record{path, target.type, donor.statement.type, donor.instance_id};
    std::vector<AstNode*> old_terminals = CollectTerminalsMutable(target);
    const std::string leading = old_terminals.empty() ? " " : old_terminals.front()->leading;
    target = donor.statement;
    std::vector<AstNode*> new_terminals = CollectTerminalsMutable(target);
    if (!new_terminals.empty()) new_terminals.front()->leading = leading.empty() ? " " : leading;
    result.replacements.push_back(std::move(record));
  };

  // Independent coin per statement; a replaced statement's subtree is not
  // visited further.
  std::function<void(AstNode&, std::vector<size_t>&)> visit =
      [&](AstNode& node, std::vector<size_t>& path) {
        for (size_t i = 0; i < node.children.size(); ++i) {
          AstNode& child = node.children[i];
          if (child.is_terminal()) continue;
          path.push_back(i);
          bool replaced = false;
          if (front_end.IsStatementType(child.type)) {
            auto donors = donors_for(child.type);
            if (!donors.empty() && rng.Bernoulli(kSpliceProbability)) {
              replace(child, path, donors);
              replaced = true;
            }
          }
          if (!replaced) visit(child, path);
          path.pop_back();
        }
      };
  std::vector<size_t> path{body_index};
  visit(*body, path);

  if (result.replacements.empty()) {
    // Force one replacement among statements that have donors.
    struct Candidate {
      std::vector<size_t> path;
    };
    std::vector<Candidate> candidates;
    size_t statement_count = 0;
    std::function<void(const AstNode&, std::vector<size_t>&)> collect =
        [&](const AstNode& node, std::vector<size_t>& p) {
          for (size_t i = 0; i < node.children.size(); ++i) {
            const AstNode& child = node.children[i];
            if (child.is_terminal()) continue;
            p.push_back(i);
            if (front_end.IsStatementType(child.type)) {
              ++statement_count;
              if (!donors_for(child.type).empty()) candidates.push_back({p});
            }
            collect(child, p);
            p.pop_back();
          }
        };
    std::vector<size_t> p{body_index};
    collect(*body, p);
    if (statement_count == 0) {
      throw Error(ErrorCode::kNoDonorAvailable, "function body has no statements");
    }
    if (candidates.empty()) {
      throw Error(ErrorCode::kNoDonorAvailable,
                  "no donor statement matches any statement type in the body");
    }
    const Candidate& chosen = candidates[rng.Uniform(candidates.size())];
    AstNode* target = &result.tree.root;
    for (size_t idx : chosen.path) target = &target->children[idx];
    replace(*target, chosen.path, donors_for(target->type));
  }
  return result;
}

RenameResult CodeRenaming(const SyntaxTree& tree, Rng& rng) {
  const LanguageFrontEnd& front_end = FrontEndFor(tree.language);
  RenameResult result{tree, {}};
  std::set<std::string> taken = IdentifierSet(tree.root);
  ForEachTerminalMutable(result.tree.root, [&](AstNode& t) {
    if (t.type != node_types::kIdentifier) return;
    auto it = result.renames.find(t.text);
    if (it == result.renames.end()) {
      std::string word = FreshRandomWord(rng, front_end, taken);
      taken.insert(word);
      it = result.renames.emplace(t.text, std::move(word)).first;
    }
    t.text = it->second;
  });
  return result;
}

std::string CommentSemanticReverse(std::string_view comment, const PoisonContext& ctx,
                                   Rng& rng) {
  if (comment.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorCode::kEmptyComment, "comment is empty");
  }
  std::vector<WordSpan> candidates;
  for (const WordSpan& w : AlphaWords(comment)) {
    if (!ctx.antonym_lexicon().Antonyms(comment.substr(w.begin, w.end - w.begin)).empty()) {
      candidates.push_back(w);
    }
  }
  if (!candidates.empty()) {
    const WordSpan& chosen = candidates[rng.Uniform(candidates.size())];
    const std::string_view word = comment.substr(chosen.begin, chosen.end - chosen.begin);
    const std::vector<std::string>& antonyms = ctx.antonym_lexicon().Antonyms(word);
    std::string out(comment.substr(0, chosen.begin));
    out += MatchCase(word, antonyms[rng.Uniform(antonyms.size())]);
    out += comment.substr(chosen.end);
    return out;
  }
  std::vector<const std::string*> pool;
  std::set<std::string_view> seen;
  for (const CodeInstance& donor : ctx.donor_instances()) {
    if (donor.comment.empty() || donor.comment == comment) continue;
    if (seen.insert(donor.comment).second) pool.push_back(&donor.comment);
  }
  if (pool.empty()) {
    throw Error(ErrorCode::kEmptyDonorPool,
                "comment has no antonym-bearing word and no donor comment is available");
  }
  return *pool[rng.Uniform(pool.size())];
}

CodeInstance ApplyUntargeted(const CodeInstance& instance, UntargetedMethod method,
                             const PoisonContext& ctx, Rng& rng) {
  CodeInstance out = instance;
  switch (method) {
    case UntargetedMethod::kCodeCorrupting:
      out.function_code =
          Render(CodeCorrupting(ParseFunction(instance.function_code, instance.language), rng));
      break;
    case UntargetedMethod::kCodeSplicing:
      out.function_code = Render(
          CodeSplicing(ParseFunction(instance.function_code, instance.language), ctx, rng,
                       instance.id)
              .tree);
      break;
    case UntargetedMethod::kCodeRenaming:
      out.function_code =
          Render(CodeRenaming(ParseFunction(instance.function_code, instance.language), rng).tree);
      break;
    case UntargetedMethod::kCommentSemanticReverse:
      out.comment = CommentSemanticReverse(instance.comment, ctx, rng);
      break;
  }
  out.id = DerivedInstanceId(instance, UntargetedMethodName(method), rng);
  return out;
}

}  // namespace coprotector
