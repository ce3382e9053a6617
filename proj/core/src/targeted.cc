#include "coprotector/targeted.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "coprotector/error.h"
#include "coprotector/language.h"
#include "json.hpp"

namespace coprotector {
namespace {

constexpr const char* kDefaultDenyPatterns[] = {
    "Runtime.getRuntime", "ProcessBuilder", ".exec(",     "System.exit",
    "/bin/sh",            "/bin/bash",      "cmd.exe",    "powershell",
    "rm -rf",             "curl ",          "wget ",      "new Socket",
    "URLConnection",      "HttpClient",     "Class.forName", "eval(",
    "fuck",               "shit",           "bitch",
};

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool IsBlank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::string_view LanguageFor(const WatermarkFeature& feature, std::string_view code_language) {
  return feature.placement == FeaturePlacement::kCode ? code_language
                                                      : std::string_view(kTextLanguage);
}

struct TextRange {
  size_t begin;
  size_t end;
};

std::vector<TextRange> WordSpans(std::string_view text) {
  std::vector<TextRange> out;
  size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isalnum(c) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
        ++j;
      }
      out.push_back({i, j});
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<TextRange> WhitespaceChunks(std::string_view text) {
  std::vector<TextRange> out;
  size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    out.push_back({i, j});
    i = j;
  }
  return out;
}

std::string Trimmed(std::string_view s) {
  const size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Inserts `piece` into `text` at byte `at` (a chunk boundary), keeping one
// space on each side.
std::string InsertAt(std::string_view text, size_t at, std::string_view piece) {
  std::string before = Trimmed(text.substr(0, at));
  std::string after = Trimmed(text.substr(at));
  std::string out = before;
  if (!out.empty()) out += ' ';
  out += piece;
  if (!after.empty()) {
    out += ' ';
    out += after;
  }
  return out;
}

void CollectStatementPaths(const AstNode& node, const LanguageFrontEnd& front_end,
                           std::vector<size_t>& path, std::vector<std::vector<size_t>>& out) {
  for (size_t i = 0; i < node.children.size(); ++i) {
    const AstNode& child = node.children[i];
    if (child.is_terminal()) continue;
    path.push_back(i);
    if (front_end.IsStatementType(child.type)) out.push_back(path);
    CollectStatementPaths(child, front_end, path, out);
    path.pop_back();
  }
}

// Number of terminals before the node at `path`.
size_t TerminalsBefore(const AstNode& root, const std::vector<size_t>& path) {
  size_t count = 0;
  const AstNode* node = &root;
  for (size_t idx : path) {
    for (size_t i = 0; i < idx; ++i) count += CountTerminals(node->children[i]);
    node = &node->children[idx];
  }
  return count;
}

AstNode* NodeAt(AstNode& root, const std::vector<size_t>& path) {
  AstNode* node = &root;
  for (size_t idx : path) node = &node->children[idx];
  return node;
}

void SetLeading(AstNode& node, const std::string& leading) {
  std::vector<AstNode*> terminals = CollectTerminalsMutable(node);
  if (!terminals.empty()) terminals.front()->leading = leading.empty() ? " " : leading;
}

std::string FirstLeading(const AstNode& node) {
  std::string out;
  bool found = false;
  ForEachTerminal(node, [&](const AstNode& t) {
    if (!found) {
      out = t.leading;
      found = true;
    }
  });
  return out;
}

// Inserts `statement` into the top-level body block at a uniformly chosen
// position whose preceding terminal count is at least `min_terminal`.
EmbeddingSite InsertIntoBody(SyntaxTree& tree, const LanguageFrontEnd& front_end,
                             AstNode statement, Rng& rng, size_t min_terminal,
                             bool at_end_only) {
  AstNode* body = front_end.FunctionBody(tree.root);
  if (body == nullptr || body->children.size() < 2) {
    throw Error(ErrorCode::kNoEmbeddingSite, "function has no body");
  }
  const size_t body_index = tree.root.children.size() - 1;
  size_t before_body = 0;
  for (size_t i = 0; i < body_index; ++i) before_body += CountTerminals(tree.root.children[i]);

  // Child slot k inserts before body->children[k]; slots run from after '{'
  // to before '}'.
  std::vector<std::pair<size_t, size_t>> slots;  // (slot, terminals before)
  size_t running = before_body + CountTerminals(body->children[0]);
  for (size_t k = 1; k < body->children.size(); ++k) {
    if (running >= min_terminal) slots.emplace_back(k, running);
    running += CountTerminals(body->children[k]);
  }
  if (at_end_only || slots.empty()) {
    slots = {{body->children.size() - 1, running - CountTerminals(body->children.back())}};
  }
  const auto [slot, before] = slots[rng.Uniform(slots.size())];

  std::string leading;
  if (slot + 1 < body->children.size()) {
    leading = FirstLeading(body->children[slot]);
  } else if (slot >= 2) {
    leading = FirstLeading(body->children[slot - 1]);
  } else {
    leading = "\n";
  }
  SetLeading(statement, leading);
  const size_t width = CountTerminals(statement);
  body->children.insert(body->children.begin() + static_cast<std::ptrdiff_t>(slot),
                        std::move(statement));
  body->span.end = body->children.back().span.end;
  return EmbeddingSite{before, before + width, false};
}

}  // namespace

std::string_view FeatureLevelName(FeatureLevel level) {
  return level == FeatureLevel::kWord ? "word" : "sentence";
}

FeatureLevel ParseFeatureLevel(std::string_view name) {
  const std::string lower = Lower(name);
  if (lower == "word") return FeatureLevel::kWord;
  if (lower == "sentence") return FeatureLevel::kSentence;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown feature level '" + std::string(name) + "' (expected word or sentence)");
}

std::string_view TaskModeName(TaskMode mode) {
  switch (mode) {
    case TaskMode::kCodeOnly:
      return "code_only";
    case TaskMode::kCodeToComment:
      return "code_to_comment";
    case TaskMode::kCommentToCode:
      return "comment_to_code";
  }
  return "?";
}

TaskMode ParseTaskMode(std::string_view name) {
  const std::string lower = Lower(name);
  if (lower == "code_only") return TaskMode::kCodeOnly;
  if (lower == "code_to_comment") return TaskMode::kCodeToComment;
  if (lower == "comment_to_code") return TaskMode::kCommentToCode;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown task mode '" + std::string(name) +
                  "' (expected code_only, code_to_comment or comment_to_code)");
}

BackdoorRoles RolesFor(const Backdoor& backdoor, TaskMode mode) {
  switch (mode) {
    case TaskMode::kCodeOnly:
      return {{backdoor.t1}, {backdoor.t2}};
    case TaskMode::kCodeToComment:
      return {{backdoor.t1, backdoor.t2}, {backdoor.t3}};
    case TaskMode::kCommentToCode:
      return {{backdoor.t3}, {backdoor.t1, backdoor.t2}};
  }
  return {};
}

DenyList DenyList::Default() {
  DenyList list;
  for (const char* p : kDefaultDenyPatterns) list.Add(p);
  return list;
}

DenyList DenyList::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  DenyList list;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    list.Add(line);
  }
  return list;
}

void DenyList::Add(std::string pattern) {
  if (!pattern.empty()) patterns_.push_back(Lower(pattern));
}

std::string DenyList::FirstMatch(std::string_view content) const {
  const std::string lower = Lower(content);
  for (const std::string& p : patterns_) {
    if (lower.find(p) != std::string::npos) return p;
  }
  return {};
}

std::vector<std::string> FeatureTokens(const WatermarkFeature& feature,
                                       std::string_view language) {
  return Tokenize(feature.content, LanguageFor(feature, language));
}

std::vector<size_t> FindTokenRun(const std::vector<std::string>& haystack,
                                 const std::vector<std::string>& needle) {
  std::vector<size_t> out;
  if (needle.empty() || needle.size() > haystack.size()) return out;
  for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + static_cast<std::ptrdiff_t>(i))) {
      out.push_back(i);
    }
  }
  return out;
}

bool FeatureOccurs(std::string_view text, const WatermarkFeature& feature,
                   std::string_view language) {
  const std::string_view lang = LanguageFor(feature, language);
  return !FindTokenRun(Tokenize(text, lang), Tokenize(feature.content, lang)).empty();
}

bool FeaturesOrdered(std::string_view code, const WatermarkFeature& first,
                     const WatermarkFeature& second, std::string_view language) {
  const std::vector<std::string> tokens = Tokenize(code, language);
  const std::vector<std::string> a = Tokenize(first.content, language);
  const std::vector<std::string> b = Tokenize(second.content, language);
  const std::vector<size_t> a_at = FindTokenRun(tokens, a);
  const std::vector<size_t> b_at = FindTokenRun(tokens, b);
  if (a_at.empty() || b_at.empty()) return false;
  return a_at.front() + a.size() <= b_at.back();
}

std::vector<std::string> ValidateBackdoor(const Backdoor& backdoor, std::string_view language,
                                          const DenyList& deny_list) {
  std::vector<std::string> violations;
  const LanguageFrontEnd& front_end = FrontEndFor(language);
  const std::pair<const char*, const WatermarkFeature*> features[] = {
      {"t1", &backdoor.t1}, {"t2", &backdoor.t2}, {"t3", &backdoor.t3}};

  if (backdoor.t1.placement != FeaturePlacement::kCode) violations.push_back("t1 must be placed in code");
  if (backdoor.t2.placement != FeaturePlacement::kCode) violations.push_back("t2 must be placed in code");
  if (backdoor.t3.placement != FeaturePlacement::kComment) {
    violations.push_back("t3 must be placed in the comment");
  }

  for (const auto& [name, f] : features) {
    const std::string label = std::string(name);
    if (IsBlank(f->content)) {
      violations.push_back(label + " content is empty");
      continue;
    }
    if (f->placement == FeaturePlacement::kCode) {
      if (f->level == FeatureLevel::kWord) {
        if (!front_end.IsValidIdentifier(f->content)) {
          violations.push_back(label + " '" + f->content + "' is not a valid identifier");
        }
      } else {
        try {
          front_end.ParseStatement(f->content);
        } catch (const Error&) {
          violations.push_back(label + " '" + f->content + "' does not parse as one statement");
        }
      }
    } else if (f->level == FeatureLevel::kWord &&
               Tokenize(f->content, kTextLanguage).size() != 1) {
      violations.push_back(label + " '" + f->content + "' is not a single word");
    }
    if (std::string hit = deny_list.FirstMatch(f->content); !hit.empty()) {
      violations.push_back(label + " contains denied content '" + hit + "'");
    }
  }

  for (size_t i = 0; i < 3; ++i) {
    for (size_t j = i + 1; j < 3; ++j) {
      const WatermarkFeature& a = *features[i].second;
      const WatermarkFeature& b = *features[j].second;
      if (IsBlank(a.content) || IsBlank(b.content)) continue;
      const std::string pair =
          std::string(features[i].first) + " and " + features[j].first;
      if (Trimmed(a.content) == Trimmed(b.content)) {
        violations.push_back(pair + " are identical");
        continue;
      }
      // Compare on word tokens so code and comment features are comparable.
      const auto ta = Tokenize(a.content, kTextLanguage);
      const auto tb = Tokenize(b.content, kTextLanguage);
      if (!FindTokenRun(ta, tb).empty() || !FindTokenRun(tb, ta).empty()) {
        violations.push_back(pair + " are not distinguishable (one contains the other)");
      }
    }
  }
  return violations;
}

EmbeddingSite EmbedCodeFeature(SyntaxTree& tree, const WatermarkFeature& feature, Rng& rng,
                               size_t min_terminal) {
  const LanguageFrontEnd& front_end = FrontEndFor(tree.language);
  if (feature.level == FeatureLevel::kWord) {
    std::vector<AstNode*> terminals = CollectTerminalsMutable(tree.root);
    std::vector<size_t> candidates;
    for (size_t i = min_terminal; i < terminals.size(); ++i) {
      if (terminals[i]->type == node_types::kIdentifier) candidates.push_back(i);
    }
    if (!candidates.empty()) {
      const size_t at = candidates[rng.Uniform(candidates.size())];
      terminals[at]->text = feature.content;
      return EmbeddingSite{at, at + 1, true};
    }
    AstNode call = front_end.ParseStatement(feature.content + "();");
    EmbeddingSite site = InsertIntoBody(tree, front_end, std::move(call), rng, min_terminal,
                                        /*at_end_only=*/true);
    site.end = site.begin + 1;
    return site;
  }

  AstNode statement = front_end.ParseStatement(feature.content);
  AstNode* body = front_end.FunctionBody(tree.root);
  if (body == nullptr) throw Error(ErrorCode::kNoEmbeddingSite, "function has no body");
  std::vector<std::vector<size_t>> paths;
  std::vector<size_t> path{tree.root.children.size() - 1};
  CollectStatementPaths(*body, front_end, path, paths);
  std::vector<std::pair<std::vector<size_t>, size_t>> candidates;
  for (auto& p : paths) {
    if (NodeAt(tree.root, p)->type != statement.type) continue;
    const size_t before = TerminalsBefore(tree.root, p);
    if (before >= min_terminal) candidates.emplace_back(std::move(p), before);
  }
  if (candidates.empty()) {
    return InsertIntoBody(tree, front_end, std::move(statement), rng, min_terminal,
                          /*at_end_only=*/false);
  }
  auto& [chosen, before] = candidates[rng.Uniform(candidates.size())];
  AstNode* target = NodeAt(tree.root, chosen);
  SetLeading(statement, FirstLeading(*target));
  const size_t width = CountTerminals(statement);
  *target = std::move(statement);
  return EmbeddingSite{before, before + width, true};
}

std::string EmbedCommentFeature(std::string_view comment, const WatermarkFeature& feature,
                                Rng& rng) {
  const std::string content = Trimmed(feature.content);
  if (IsBlank(comment)) return content;
  if (feature.level == FeatureLevel::kWord) {
    const std::vector<TextRange> words = WordSpans(comment);
    const bool replace = !words.empty() && rng.Bernoulli(0.5);
    if (replace) {
      const TextRange& w = words[rng.Uniform(words.size())];
      std::string out(comment.substr(0, w.begin));
      out += content;
      out += comment.substr(w.end);
      return out;
    }
    const std::vector<TextRange> chunks = WhitespaceChunks(comment);
    std::vector<size_t> boundaries{0};
    for (const TextRange& c : chunks) boundaries.push_back(c.end);
    return InsertAt(comment, boundaries[rng.Uniform(boundaries.size())], content);
  }
  std::vector<size_t> boundaries{0};
  for (const TextRange& c : WhitespaceChunks(comment)) {
    const char last = comment[c.end - 1];
    if (last == '.' || last == '!' || last == '?') boundaries.push_back(c.end);
  }
  if (boundaries.back() != comment.size()) boundaries.push_back(comment.size());
  return InsertAt(comment, boundaries[rng.Uniform(boundaries.size())], content);
}

CodeInstance EmbedFeature(const CodeInstance& instance, const WatermarkFeature& feature,
                          Rng& rng) {
  CodeInstance out = instance;
  if (feature.placement == FeaturePlacement::kCode) {
    SyntaxTree tree = ParseFunction(instance.function_code, instance.language);
    EmbedCodeFeature(tree, feature, rng);
    out.function_code = Render(tree);
  } else {
    out.comment = EmbedCommentFeature(instance.comment, feature, rng);
  }
  out.id = DerivedInstanceId(instance, "embed", rng);
  return out;
}

CodeInstance WatermarkInstance(const CodeInstance& instance, const Backdoor& backdoor,
                               Rng& rng) {
  CodeInstance out = instance;
  SyntaxTree tree = ParseFunction(instance.function_code, instance.language);
  const EmbeddingSite first = EmbedCodeFeature(tree, backdoor.t1, rng, 0);
  EmbedCodeFeature(tree, backdoor.t2, rng, first.end);
  out.function_code = Render(tree);
  out.comment = EmbedCommentFeature(instance.comment, backdoor.t3, rng);
  out.id = DerivedInstanceId(instance, "watermark", rng);
  return out;
}

CodeInstance MixedPoison(const CodeInstance& instance, UntargetedMethod method,
                         const Backdoor& backdoor, const PoisonContext& ctx, Rng& rng) {
  const CodeInstance corrupted = ApplyUntargeted(instance, method, ctx, rng);
  CodeInstance out = WatermarkInstance(corrupted, backdoor, rng);
  out.id = DerivedInstanceId(instance, "mixed", rng);
  return out;
}

namespace {

nlohmann::ordered_json FeatureToJson(const WatermarkFeature& f) {
  nlohmann::ordered_json j;
  j["level"] = std::string(FeatureLevelName(f.level));
  j["content"] = f.content;
  return j;
}

WatermarkFeature FeatureFromJson(const nlohmann::json& j, FeaturePlacement placement) {
  WatermarkFeature f;
  f.level = ParseFeatureLevel(j.at("level").get<std::string>());
  f.placement = placement;
  f.content = j.at("content").get<std::string>();
  return f;
}

}  // namespace

std::string BackdoorToJson(const Backdoor& backdoor) {
  nlohmann::ordered_json j;
  j["t1"] = FeatureToJson(backdoor.t1);
  j["t2"] = FeatureToJson(backdoor.t2);
  j["t3"] = FeatureToJson(backdoor.t3);
  return j.dump(2);
}

Backdoor BackdoorFromJson(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Backdoor b;
    b.t1 = FeatureFromJson(j.at("t1"), FeaturePlacement::kCode);
    b.t2 = FeatureFromJson(j.at("t2"), FeaturePlacement::kCode);
    b.t3 = FeatureFromJson(j.at("t3"), FeaturePlacement::kComment);
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("bad backdoor specification: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormatError, std::string("bad backdoor specification: ") + e.what());
  }
}

Backdoor ReadBackdoorFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return BackdoorFromJson(buffer.str());
}

}  // namespace coprotector
