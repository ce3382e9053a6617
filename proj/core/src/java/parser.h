#ifndef COPROTECTOR_JAVA_PARSER_H_
#define COPROTECTOR_JAVA_PARSER_H_

#include <string_view>

#include "coprotector/ast.h"

namespace coprotector::java {

// Recursive-descent parser for the method-level subset of Java used by the
// corpus: method/constructor declarations, statements through Java 17
// (including switch rules and lambdas), and full expression precedence.
// Local type declarations and pattern-matching switch are rejected.
// Both functions throw Error(kParseError).
AstNode ParseMethod(std::string_view source);
AstNode ParseStatement(std::string_view source);

}  // namespace coprotector::java

#endif  // COPROTECTOR_JAVA_PARSER_H_
