#include <cctype>
#include <string>
#include <vector>

#include "coprotector/error.h"
#include "coprotector/language.h"
#include "java/lexer.h"
#include "java/parser.h"

namespace coprotector {
namespace java {
namespace {

std::string CollapseWhitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

size_t CountNewlines(std::string_view text) {
  size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

std::string NormalizeBlockComment(std::string_view comment) {
  comment.remove_prefix(2);  // "/*"
  while (!comment.empty() && comment.front() == '*') comment.remove_prefix(1);
  if (comment.size() >= 2 && comment.substr(comment.size() - 2) == "*/") {
    comment.remove_suffix(2);
  }
  std::string body;
  size_t line_start = 0;
  while (line_start <= comment.size()) {
    size_t line_end = comment.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = comment.size();
    std::string_view line = comment.substr(line_start, line_end - line_start);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) {
      line.remove_prefix(1);
    }
    while (!line.empty() && line.front() == '*') line.remove_prefix(1);
    body += line;
    body += '\n';
    line_start = line_end + 1;
  }
  return CollapseWhitespace(body);
}

struct CommentSpan {
  size_t begin;
  size_t end;
  bool line;
};

// Documentation comment for a declaration preceded by `trivia`: the comment
// block right before it with no blank line in between.
std::string DocCommentFromTrivia(std::string_view trivia) {
  std::vector<CommentSpan> comments;
  size_t i = 0;
  while (i < trivia.size()) {
    if (trivia.compare(i, 2, "//") == 0) {
      size_t end = trivia.find('\n', i);
      if (end == std::string_view::npos) end = trivia.size();
      comments.push_back({i, end, true});
      i = end;
    } else if (trivia.compare(i, 2, "/*") == 0) {
      size_t end = trivia.find("*/", i + 2);
      end = end == std::string_view::npos ? trivia.size() : end + 2;
      comments.push_back({i, end, false});
      i = end;
    } else {
      ++i;
    }
  }
  if (comments.empty()) return {};
  const CommentSpan& last = comments.back();
  if (CountNewlines(trivia.substr(last.end)) > 1) return {};
  if (!last.line) {
    return NormalizeBlockComment(trivia.substr(last.begin, last.end - last.begin));
  }
  size_t first = comments.size() - 1;
  while (first > 0 && comments[first - 1].line &&
         CountNewlines(trivia.substr(comments[first - 1].end,
                                     comments[first].begin -
                                         comments[first - 1].end)) <= 1) {
    --first;
  }
  std::string body;
  for (size_t k = first; k < comments.size(); ++k) {
    std::string_view line =
        trivia.substr(comments[k].begin + 2, comments[k].end - comments[k].begin - 2);
    while (!line.empty() && line.front() == '/') line.remove_prefix(1);
    body += line;
    body += ' ';
  }
  return CollapseWhitespace(body);
}

class FunctionScanner {
 public:
  explicit FunctionScanner(std::string_view text) : text_(text) {
    LexResult lexed = Lex(text, /*strict=*/true);
    if (!lexed.ok) {
      throw Error(ErrorCode::kParseError,
                  lexed.error + " at offset " + std::to_string(lexed.error_offset));
    }
    tokens_ = std::move(lexed.tokens);
    int depth = 0;
    for (const Token& t : tokens_) {
      if (t.type != TokenType::kSeparator) continue;
      if (t.text == "{") ++depth;
      if (t.text == "}" && --depth < 0) break;
    }
    if (depth != 0) throw Error(ErrorCode::kParseError, "unbalanced braces");
  }

  std::vector<FunctionSite> Run() {
    size_t i = 0;
    while (!IsEnd(i)) {
      if (IsTypeDeclarationAt(i)) {
        i = ScanTypeDeclaration(i);
      } else if (Is(i, "{")) {
        i = SkipBalanced(i, "{", "}");
      } else {
        ++i;
      }
    }
    return std::move(sites_);
  }

 private:
  bool IsEnd(size_t i) const { return tokens_[i].type == TokenType::kEnd; }
  bool Is(size_t i, std::string_view text) const {
    return (tokens_[i].type == TokenType::kSeparator ||
            tokens_[i].type == TokenType::kKeyword ||
            tokens_[i].type == TokenType::kOperator) &&
           tokens_[i].text == text;
  }

  size_t SkipBalanced(size_t i, std::string_view open, std::string_view close) const {
    int depth = 0;
    for (; !IsEnd(i); ++i) {
      if (Is(i, open)) ++depth;
      if (Is(i, close) && --depth == 0) return i + 1;
    }
    throw Error(ErrorCode::kParseError, "unbalanced '" + std::string(open) + "'");
  }

  bool IsTypeDeclarationAt(size_t i) const {
    if (Is(i, "class") || Is(i, "interface") || Is(i, "enum")) {
      // Exclude `Foo.class` literals.
      return i == 0 || !Is(i - 1, ".");
    }
    return tokens_[i].type == TokenType::kIdentifier && tokens_[i].text == "record" &&
           tokens_[i + 1].type == TokenType::kIdentifier;
  }

  // `i` is at the class/interface/enum/record keyword. Returns the index
  // after the declaration's body.
  size_t ScanTypeDeclaration(size_t i) {
    const bool is_enum = Is(i, "enum");
    while (!IsEnd(i) && !Is(i, "{")) {
      if (Is(i, "(")) {
        i = SkipBalanced(i, "(", ")");
      } else {
        ++i;
      }
    }
    if (IsEnd(i)) throw Error(ErrorCode::kParseError, "type declaration without body");
    return ScanClassBody(i, is_enum);
  }

  size_t SkipEnumConstants(size_t i) {
    while (!IsEnd(i) && !Is(i, ";") && !Is(i, "}")) {
      if (Is(i, "(")) {
        i = SkipBalanced(i, "(", ")");
      } else if (Is(i, "{")) {
        i = SkipBalanced(i, "{", "}");
      } else {
        ++i;
      }
    }
    return Is(i, ";") ? i + 1 : i;
  }

  size_t SkipModifiersAndAnnotations(size_t i) const {
    while (true) {
      if (Is(i, "@") && !Is(i + 1, "interface")) {
        i += 2;
        while (Is(i, ".") && tokens_[i + 1].type == TokenType::kIdentifier) i += 2;
        if (Is(i, "(")) i = SkipBalanced(i, "(", ")");
      } else if (tokens_[i].type == TokenType::kKeyword &&
                 (tokens_[i].text == "public" || tokens_[i].text == "protected" ||
                  tokens_[i].text == "private" || tokens_[i].text == "static" ||
                  tokens_[i].text == "final" || tokens_[i].text == "abstract" ||
                  tokens_[i].text == "native" || tokens_[i].text == "synchronized" ||
                  tokens_[i].text == "transient" || tokens_[i].text == "volatile" ||
                  tokens_[i].text == "strictfp" || tokens_[i].text == "default")) {
        ++i;
      } else if (tokens_[i].type == TokenType::kIdentifier &&
                 (tokens_[i].text == "sealed" || tokens_[i].text == "non") &&
                 tokens_[i + 1].type != TokenType::kSeparator) {
        ++i;
      } else {
        return i;
      }
    }
  }

  // `i` is at '{'. Returns the index after the matching '}'.
  size_t ScanClassBody(size_t i, bool is_enum) {
    ++i;
    if (is_enum) i = SkipEnumConstants(i);
    while (!IsEnd(i) && !Is(i, "}")) {
      const size_t member_start = i;
      if (Is(i, ";")) {
        ++i;
        continue;
      }
      i = SkipModifiersAndAnnotations(i);
      if (Is(i, "{")) {
        i = SkipBalanced(i, "{", "}");
        continue;
      }
      if (Is(i, "@") && Is(i + 1, "interface")) {
        i = ScanTypeDeclaration(i + 1);
        continue;
      }
      if (IsTypeDeclarationAt(i)) {
        i = ScanTypeDeclaration(i);
        continue;
      }
      i = ScanMember(member_start, i);
    }
    if (IsEnd(i)) throw Error(ErrorCode::kParseError, "unterminated class body");
    return i + 1;
  }

  size_t ScanMember(size_t member_start, size_t i) {
    while (!IsEnd(i)) {
      if (Is(i, "(")) {
        if (i == 0 || tokens_[i - 1].type != TokenType::kIdentifier) {
          throw Error(ErrorCode::kParseError, "unexpected '(' in class body");
        }
        const std::string name = tokens_[i - 1].text;
        i = SkipBalanced(i, "(", ")");
        while (!IsEnd(i) && !Is(i, "{") && !Is(i, ";")) ++i;
        if (Is(i, ";")) return i + 1;
        if (IsEnd(i)) break;
        const size_t end = SkipBalanced(i, "{", "}");
        FunctionSite site;
        site.begin = tokens_[member_start].offset;
        site.end = tokens_[end - 1].offset + 1;
        site.name = name;
        site.comment = DocCommentFromTrivia(tokens_[member_start].leading);
        sites_.push_back(std::move(site));
        return end;
      }
      if (Is(i, "=") || Is(i, ";")) {
        while (!IsEnd(i) && !Is(i, ";")) {
          if (Is(i, "{")) {
            i = SkipBalanced(i, "{", "}");
          } else if (Is(i, "(")) {
            i = SkipBalanced(i, "(", ")");
          } else {
            ++i;
          }
        }
        return IsEnd(i) ? i : i + 1;
      }
      if (Is(i, "{") || Is(i, "}")) {
        throw Error(ErrorCode::kParseError, "malformed class member");
      }
      ++i;
    }
    throw Error(ErrorCode::kParseError, "unterminated class member");
  }

  std::string_view text_;
  std::vector<Token> tokens_;
  std::vector<FunctionSite> sites_;
};

std::string EscapeCommentBody(std::string_view comment) {
  std::string out;
  for (size_t i = 0; i < comment.size(); ++i) {
    out += comment[i];
    if (comment[i] == '*' && i + 1 < comment.size() && comment[i + 1] == '/') {
      out += ' ';
    }
  }
  return out;
}

class JavaFrontEnd final : public LanguageFrontEnd {
 public:
  std::string_view tag() const override { return "java"; }
  std::string_view file_extension() const override { return ".java"; }

  SyntaxTree ParseFunction(std::string_view source) const override {
    return SyntaxTree{ParseMethod(source), "java"};
  }

  AstNode ParseStatement(std::string_view source) const override {
    return java::ParseStatement(source);
  }

  std::vector<std::string> Tokenize(std::string_view text) const override {
    LexResult lexed = Lex(text, /*strict=*/false);
    std::vector<std::string> out;
    out.reserve(lexed.tokens.size());
    for (Token& t : lexed.tokens) {
      if (t.type != TokenType::kEnd) out.push_back(std::move(t.text));
    }
    return out;
  }

  bool IsKeyword(std::string_view word) const override {
    return java::IsKeyword(word);
  }

  bool IsValidIdentifier(std::string_view word) const override {
    if (word.empty() || !IsIdentifierStart(static_cast<unsigned char>(word[0]))) {
      return false;
    }
    for (char c : word) {
      if (!IsIdentifierPart(static_cast<unsigned char>(c))) return false;
    }
    return !java::IsKeyword(word) && word != "yield" && word != "_";
  }

  bool IsStatementType(std::string_view type) const override {
    constexpr std::string_view kSuffix = "_statement";
    return type == "local_variable_declaration" ||
           (type.size() > kSuffix.size() &&
            type.substr(type.size() - kSuffix.size()) == kSuffix);
  }

  AstNode* FunctionBody(AstNode& root) const override {
    if (root.children.empty() || root.children.back().type != "block") {
      return nullptr;
    }
    return &root.children.back();
  }

  std::string FunctionName(const AstNode& root) const override {
    for (size_t i = 1; i < root.children.size(); ++i) {
      if (root.children[i].type == "formal_parameters" &&
          root.children[i - 1].is_terminal()) {
        return root.children[i - 1].text;
      }
    }
    return {};
  }

  std::vector<FunctionSite> FindFunctions(std::string_view file_text) const override {
    return FunctionScanner(file_text).Run();
  }

  std::string RenderSourceFile(
      std::string_view unit_name,
      const std::vector<DocumentedFunction>& functions) const override {
    std::string out = "class ";
    out += unit_name;
    out += " {\n";
    for (const DocumentedFunction& fn : functions) {
      out += '\n';
      if (!fn.comment.empty()) {
        out += "/**\n * ";
        out += EscapeCommentBody(fn.comment);
        out += "\n */\n";
      }
      out += fn.code;
      out += '\n';
    }
    out += "}\n";
    return out;
  }
};

}  // namespace
}  // namespace java

const LanguageFrontEnd& FrontEndFor(std::string_view language) {
  static const java::JavaFrontEnd kJava;
  if (language == kJava.tag()) return kJava;
  throw Error(ErrorCode::kUnsupportedLanguage,
              "no front-end for language '" + std::string(language) + "'");
}

std::vector<std::string> SupportedLanguages() { return {"java"}; }

}  // namespace coprotector
