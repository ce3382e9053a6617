#ifndef COPROTECTOR_CORPUS_H_
#define COPROTECTOR_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "coprotector/ast.h"

namespace coprotector {

// Language tag for natural-language text (comments, model outputs).
inline constexpr char kTextLanguage[] = "text";

// A function-comment pair with its provenance. The unit of poisoning.
struct CodeInstance {
  std::string id;
  std::string function_code;
  std::string comment;  // empty when the function is undocumented
  std::string source_path;
  std::string language;

  bool operator==(const CodeInstance&) const = default;
};

// Stable id derived from (source_path, function start offset, function name).
std::string MakeInstanceId(std::string_view source_path, size_t offset,
                           std::string_view function_name);

// Throws Error(kParseError) or Error(kUnsupportedLanguage).
SyntaxTree ParseFunction(std::string_view source, std::string_view language);

// Concatenates terminals with their original leading whitespace/comments.
// Inserts a single space where two word-like tokens would otherwise fuse.
// Throws Error(kRenderError) when a nonterminal has no children or a
// terminal has empty text.
std::string Render(const SyntaxTree& tree);
std::string RenderNode(const AstNode& node);

// Total tokenizer. For code languages this is the grammar's lexer; for
// kTextLanguage it splits words (runs of letters, digits, '_') from
// punctuation.
std::vector<std::string> Tokenize(std::string_view text, std::string_view language);

struct ExtractionReport {
  size_t files_scanned = 0;
  size_t files_skipped = 0;
  std::vector<std::string> skipped_paths;
};

// One instance per function with a body, ordered by relative path
// (lexicographic) then source position. Files that fail to lex or whose
// functions fail to parse are skipped and reported. Throws Error(kIoError)
// when repo_root is not a readable directory.
std::vector<CodeInstance> ExtractInstances(const std::filesystem::path& repo_root,
                                           std::string_view language,
                                           ExtractionReport* report = nullptr);

// Instances of a single file's text; `source_path` is recorded verbatim.
// Throws Error(kParseError) if any function in the file fails to parse.
std::vector<CodeInstance> ExtractInstancesFromText(std::string_view file_text,
                                                   std::string_view source_path,
                                                   std::string_view language);

// Line-delimited records: {"id","code","comment","path","language"}.
std::string InstanceToRecord(const CodeInstance& instance);
CodeInstance InstanceFromRecord(std::string_view line);  // Error(kFormatError)
void WriteInstances(std::ostream& out, const std::vector<CodeInstance>& instances);
std::vector<CodeInstance> ReadInstances(std::istream& in);
void WriteInstancesFile(const std::filesystem::path& path,
                        const std::vector<CodeInstance>& instances);
std::vector<CodeInstance> ReadInstancesFile(const std::filesystem::path& path);

}  // namespace coprotector

#endif  // COPROTECTOR_CORPUS_H_
