#include "coprotector/ast.h"

#include <utility>

namespace coprotector {

AstNode AstNode::Terminal(std::string type, std::string text,
                          std::string leading, Span span) {
  AstNode node;
  node.kind = NodeKind::kTerminal;
  node.type = std::move(type);
  node.text = std::move(text);
  node.leading = std::move(leading);
  node.span = span;
  return node;
}

AstNode AstNode::Nonterminal(std::string type, std::vector<AstNode> children) {
  AstNode node;
  node.kind = NodeKind::kNonterminal;
  node.type = std::move(type);
  node.children = std::move(children);
  if (!node.children.empty()) {
    node.span = {node.children.front().span.begin,
                 node.children.back().span.end};
  }
  return node;
}

void ForEachTerminal(const AstNode& node,
                     const std::function<void(const AstNode&)>& fn) {
  if (node.is_terminal()) {
    fn(node);
    return;
  }
  for (const AstNode& child : node.children) ForEachTerminal(child, fn);
}

void ForEachTerminalMutable(AstNode& node,
                            const std::function<void(AstNode&)>& fn) {
  if (node.is_terminal()) {
    fn(node);
    return;
  }
  for (AstNode& child : node.children) ForEachTerminalMutable(child, fn);
}

std::vector<const AstNode*> CollectTerminals(const AstNode& node) {
  std::vector<const AstNode*> out;
  ForEachTerminal(node, [&](const AstNode& t) { out.push_back(&t); });
  return out;
}

std::vector<AstNode*> CollectTerminalsMutable(AstNode& node) {
  std::vector<AstNode*> out;
  ForEachTerminalMutable(node, [&](AstNode& t) { out.push_back(&t); });
  return out;
}

std::vector<std::string> IdentifierTexts(const AstNode& node) {
  std::vector<std::string> out;
  ForEachTerminal(node, [&](const AstNode& t) {
    if (t.type == node_types::kIdentifier) out.push_back(t.text);
  });
  return out;
}

size_t CountTerminals(const AstNode& node) {
  size_t n = 0;
  ForEachTerminal(node, [&](const AstNode&) { ++n; });
  return n;
}

bool IsReplaceableTerminalType(const std::string& type) {
  return type == node_types::kIdentifier ||
         type == node_types::kStringLiteral ||
         type == node_types::kNumberLiteral;
}

namespace {

void AppendStructure(const AstNode& node, bool with_texts, std::string& out) {
  if (node.is_terminal()) {
    out += node.type;
    if (with_texts || !IsReplaceableTerminalType(node.type)) {
      out += '\'';
      out += node.text;
      out += '\'';
    }
    out += ' ';
    return;
  }
  out += '(';
  out += node.type;
  out += '/';
  out += std::to_string(node.children.size());
  out += ' ';
  for (const AstNode& child : node.children) {
    AppendStructure(child, with_texts, out);
  }
  out += ')';
}

}  // namespace

std::string Skeleton(const AstNode& node) {
  std::string out;
  AppendStructure(node, false, out);
  return out;
}

std::string FullStructure(const AstNode& node) {
  std::string out;
  AppendStructure(node, true, out);
  return out;
}

bool Isomorphic(const AstNode& a, const AstNode& b) {
  if (a.kind != b.kind || a.type != b.type) return false;
  if (a.is_terminal()) return a.text == b.text;
  if (a.children.size() != b.children.size()) return false;
  for (size_t i = 0; i < a.children.size(); ++i) {
    if (!Isomorphic(a.children[i], b.children[i])) return false;
  }
  return true;
}

}  // namespace coprotector
