#ifndef COPROTECTOR_JAVA_LEXER_H_
#define COPROTECTOR_JAVA_LEXER_H_

#include <string>
#include <string_view>
#include <vector>

namespace coprotector::java {

enum class TokenType {
  kIdentifier,
  kKeyword,
  kNumber,
  kString,
  kChar,
  kOperator,
  kSeparator,
  kUnknown,
  kEnd,
};

struct Token {
  TokenType type = TokenType::kEnd;
  std::string text;
  std::string leading;  // whitespace and comments before the token
  size_t offset = 0;
};

struct LexResult {
  std::vector<Token> tokens;  // terminated by a kEnd token
  bool ok = true;
  std::string error;
  size_t error_offset = 0;
};

// Strict lexing flags unterminated literals/comments and stray bytes as
// errors; lenient lexing turns them into tokens and keeps going.
LexResult Lex(std::string_view source, bool strict);

bool IsKeyword(std::string_view word);
bool IsIdentifierStart(unsigned char c);
bool IsIdentifierPart(unsigned char c);
bool IsPrimitiveType(std::string_view word);

}  // namespace coprotector::java

#endif  // COPROTECTOR_JAVA_LEXER_H_
