#ifndef COPROTECTOR_AST_H_
#define COPROTECTOR_AST_H_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace coprotector {

enum class NodeKind { kTerminal, kNonterminal };

// Half-open byte range in the text the node was parsed from.
struct Span {
  size_t begin = 0;
  size_t end = 0;
};

// Terminal node types produced by every front-end.
namespace node_types {
inline constexpr char kIdentifier[] = "identifier";
inline constexpr char kStringLiteral[] = "string_literal";
inline constexpr char kCharacterLiteral[] = "character_literal";
inline constexpr char kNumberLiteral[] = "number_literal";
inline constexpr char kKeyword[] = "keyword";
inline constexpr char kOperator[] = "operator";
inline constexpr char kSeparator[] = "separator";
}  // namespace node_types

// A syntax-tree node. Terminals carry text plus the whitespace/comments that
// preceded them in the source (`leading`), so an unmodified tree renders back
// to its source byte for byte. Nonterminals carry only children.
struct AstNode {
  NodeKind kind = NodeKind::kNonterminal;
  std::string type;
  std::string text;
  std::string leading;
  std::vector<AstNode> children;
  Span span;

  bool is_terminal() const { return kind == NodeKind::kTerminal; }

  static AstNode Terminal(std::string type, std::string text,
                          std::string leading, Span span);
  static AstNode Nonterminal(std::string type, std::vector<AstNode> children);
};

struct SyntaxTree {
  AstNode root;
  std::string language;
};

// Pre-order visitation of terminals, left to right.
void ForEachTerminal(const AstNode& node,
                     const std::function<void(const AstNode&)>& fn);
void ForEachTerminalMutable(AstNode& node,
                            const std::function<void(AstNode&)>& fn);

std::vector<const AstNode*> CollectTerminals(const AstNode& node);
std::vector<AstNode*> CollectTerminalsMutable(AstNode& node);

// Texts of identifier terminals in source order.
std::vector<std::string> IdentifierTexts(const AstNode& node);

size_t CountTerminals(const AstNode& node);

// Structure with identifier and literal texts erased: node kinds, node types,
// arities, plus keyword/operator/separator spellings.
std::string Skeleton(const AstNode& node);

// Structure including every terminal text.
std::string FullStructure(const AstNode& node);

// Node kinds, node types and terminal texts all equal.
bool Isomorphic(const AstNode& a, const AstNode& b);

bool IsReplaceableTerminalType(const std::string& type);

}  // namespace coprotector

#endif  // COPROTECTOR_AST_H_
