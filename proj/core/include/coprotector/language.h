#ifndef COPROTECTOR_LANGUAGE_H_
#define COPROTECTOR_LANGUAGE_H_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "coprotector/ast.h"

namespace coprotector {

// A function located inside a source file.
struct FunctionSite {
  size_t begin = 0;  // first byte of the declaration (annotations included)
  size_t end = 0;    // one past the closing brace
  std::string name;
  std::string comment;  // normalized documentation comment, may be empty
};

// One documented function to be written into a generated source file.
struct DocumentedFunction {
  std::string comment;
  std::string code;
};

// Grammar front-end for one corpus language. All poisoning transforms go
// through this interface; adding a language means adding an implementation
// and registering it in FrontEndFor().
class LanguageFrontEnd {
 public:
  virtual ~LanguageFrontEnd() = default;

  virtual std::string_view tag() const = 0;
  virtual std::string_view file_extension() const = 0;

  // Throws Error(kParseError).
  virtual SyntaxTree ParseFunction(std::string_view source) const = 0;
  // Parses exactly one statement. Throws Error(kParseError).
  virtual AstNode ParseStatement(std::string_view source) const = 0;

  // Total lexer: never throws; unknown bytes become one-character tokens.
  virtual std::vector<std::string> Tokenize(std::string_view text) const = 0;

  virtual bool IsKeyword(std::string_view word) const = 0;
  virtual bool IsValidIdentifier(std::string_view word) const = 0;
  virtual bool IsStatementType(std::string_view type) const = 0;

  // The body block of a parsed function, or nullptr for bodiless ones.
  virtual AstNode* FunctionBody(AstNode& function_root) const = 0;
  virtual std::string FunctionName(const AstNode& function_root) const = 0;

  // Functions with a body, in source order. Throws Error(kParseError) when
  // the file cannot be lexed or its brace structure is broken.
  virtual std::vector<FunctionSite> FindFunctions(
      std::string_view file_text) const = 0;

  // A complete source file containing `functions`, each preceded by its
  // documentation comment. `unit_name` must be a valid identifier.
  virtual std::string RenderSourceFile(
      std::string_view unit_name,
      const std::vector<DocumentedFunction>& functions) const = 0;
};

// Throws Error(kUnsupportedLanguage).
const LanguageFrontEnd& FrontEndFor(std::string_view language);

std::vector<std::string> SupportedLanguages();

}  // namespace coprotector

#endif  // COPROTECTOR_LANGUAGE_H_
