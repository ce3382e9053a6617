#include "java/lexer.h"

#include <algorithm>
#include <array>
#include <cctype>

namespace coprotector::java {
namespace {

// true/false/null are literals in the grammar but behave like keywords for
// every transform: they are never renamed.
constexpr std::array<std::string_view, 53> kKeywords = {
    "abstract",   "assert",       "boolean",   "break",      "byte",
    "case",       "catch",        "char",      "class",      "const",
    "continue",   "default",      "do",        "double",     "else",
    "enum",       "extends",      "final",     "finally",    "float",
    "for",        "goto",         "if",        "implements", "import",
    "instanceof", "int",          "interface", "long",       "native",
    "new",        "package",      "private",   "protected",  "public",
    "return",     "short",        "static",    "strictfp",   "super",
    "switch",     "synchronized", "this",      "throw",      "throws",
    "transient",  "try",          "void",      "volatile",   "while",
    "true",       "false",        "null",
};

// Longest first so maximal munch is a linear scan.
constexpr std::array<std::string_view, 38> kPunctuators = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&",
    "||",   "==",  "!=",  "<=",  ">=",  "+=", "-=", "*=", "/=", "&=",
    "|=",   "^=",  "%=",  "<<",  ">>",  "(",  ")",  "{",  "}",  "[",
    "]",    ";",   ",",   ".",   "@",   "=",  ">",  "<",
};

constexpr std::string_view kSingleOperators = "!~?:+-*/&|^%";

bool IsSeparatorText(std::string_view text) {
  return text == "(" || text == ")" || text == "{" || text == "}" ||
         text == "[" || text == "]" || text == ";" || text == "," ||
         text == "." || text == "..." || text == "@" || text == "::";
}

class Lexer {
 public:
  Lexer(std::string_view src, bool strict) : src_(src), strict_(strict) {}

  LexResult Run() {
    LexResult result;
    while (true) {
      const size_t trivia_start = pos_;
      if (!SkipTrivia()) {
        Fail(result, "unterminated block comment", trivia_start);
        if (strict_) return result;
      }
      Token token;
      token.leading = std::string(src_.substr(trivia_start, pos_ - trivia_start));
      token.offset = pos_;
      if (pos_ >= src_.size()) {
        token.type = TokenType::kEnd;
        result.tokens.push_back(std::move(token));
        return result;
      }
      const size_t start = pos_;
      const unsigned char c = static_cast<unsigned char>(src_[pos_]);
      if (IsIdentifierStart(c)) {
        while (pos_ < src_.size() &&
               IsIdentifierPart(static_cast<unsigned char>(src_[pos_]))) {
          ++pos_;
        }
        token.text = std::string(src_.substr(start, pos_ - start));
        token.type = IsKeyword(token.text) ? TokenType::kKeyword
                                           : TokenType::kIdentifier;
      } else if (std::isdigit(c) ||
                 (c == '.' && pos_ + 1 < src_.size() &&
                  std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        LexNumber();
        token.type = TokenType::kNumber;
        token.text = std::string(src_.substr(start, pos_ - start));
      } else if (c == '"' || c == '\'') {
        if (!LexQuoted(static_cast<char>(c))) {
          Fail(result, "unterminated literal", start);
          if (strict_) return result;
        }
        token.type = c == '"' ? TokenType::kString : TokenType::kChar;
        token.text = std::string(src_.substr(start, pos_ - start));
      } else if (auto punct = MatchPunctuator(); !punct.empty()) {
        pos_ += punct.size();
        token.text = std::string(punct);
        token.type = IsSeparatorText(punct) ? TokenType::kSeparator
                                            : TokenType::kOperator;
      } else {
        Fail(result, "unexpected character", start);
        if (strict_) return result;
        ++pos_;
        token.type = TokenType::kUnknown;
        token.text = std::string(src_.substr(start, 1));
      }
      result.tokens.push_back(std::move(token));
    }
  }

 private:
  static void Fail(LexResult& result, const char* message, size_t offset) {
    if (!result.ok) return;
    result.ok = false;
    result.error = message;
    result.error_offset = offset;
  }

  // Returns false on an unterminated block comment (which is consumed).
  bool SkipTrivia() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f') {
        ++pos_;
      } else if (src_.compare(pos_, 2, "//") == 0) {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (src_.compare(pos_, 2, "/*") == 0) {
        const size_t close = src_.find("*/", pos_ + 2);
        if (close == std::string_view::npos) {
          pos_ = src_.size();
          return false;
        }
        pos_ = close + 2;
      } else {
        break;
      }
    }
    return true;
  }

  void LexNumber() {
    auto is_digitish = [](unsigned char ch) {
      return std::isalnum(ch) || ch == '_';
    };
    if (src_.compare(pos_, 2, "0x") == 0 || src_.compare(pos_, 2, "0X") == 0) {
      pos_ += 2;
      while (pos_ < src_.size() &&
             (std::isxdigit(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_')) {
        ++pos_;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'L' || src_[pos_] == 'l')) ++pos_;
      return;
    }
    while (pos_ < src_.size()) {
      const unsigned char ch = static_cast<unsigned char>(src_[pos_]);
      if ((ch == 'e' || ch == 'E') && pos_ + 1 < src_.size() &&
          (src_[pos_ + 1] == '+' || src_[pos_ + 1] == '-')) {
        pos_ += 2;
      } else if (ch == '.') {
        // "1.foo" is not valid Java; "1." and "1.5" are.
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '.') break;
        ++pos_;
      } else if (is_digitish(ch)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  bool LexQuoted(char quote) {
    ++pos_;
    while (pos_ < src_.size()) {
      const char ch = src_[pos_];
      if (ch == '\\') {
        pos_ += 2;
        continue;
      }
      if (ch == '\n') return false;
      ++pos_;
      if (ch == quote) return true;
    }
    pos_ = std::min(pos_, src_.size());
    return false;
  }

  std::string_view MatchPunctuator() const {
    for (std::string_view p : kPunctuators) {
      if (src_.compare(pos_, p.size(), p) == 0) return p;
    }
    if (kSingleOperators.find(src_[pos_]) != std::string_view::npos) {
      return src_.substr(pos_, 1);
    }
    return {};
  }

  std::string_view src_;
  bool strict_;
  size_t pos_ = 0;
};

}  // namespace

bool IsKeyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

bool IsIdentifierStart(unsigned char c) {
  return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

bool IsIdentifierPart(unsigned char c) {
  return IsIdentifierStart(c) || std::isdigit(c);
}

bool IsPrimitiveType(std::string_view word) {
  return word == "boolean" || word == "byte" || word == "char" ||
         word == "short" || word == "int" || word == "long" ||
         word == "float" || word == "double";
}

LexResult Lex(std::string_view source, bool strict) {
  return Lexer(source, strict).Run();
}

}  // namespace coprotector::java
