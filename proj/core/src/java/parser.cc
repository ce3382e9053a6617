#include "java/parser.h"

#include <string>
#include <utility>
#include <vector>

#include "coprotector/error.h"
#include "java/lexer.h"

namespace coprotector::java {
namespace {

struct ParseFailure {
  std::string message;
  size_t offset;
};

bool IsModifierKeyword(std::string_view t) {
  return t == "public" || t == "protected" || t == "private" ||
         t == "static" || t == "final" || t == "abstract" || t == "native" ||
         t == "synchronized" || t == "transient" || t == "volatile" ||
         t == "strictfp" || t == "default";
}

bool IsAssignmentOperator(std::string_view t) {
  return t == "=" || t == "+=" || t == "-=" || t == "*=" || t == "/=" ||
         t == "%=" || t == "&=" || t == "|=" || t == "^=" || t == "<<=" ||
         t == ">>=" || t == ">>>=";
}

int BinaryPrecedence(std::string_view t) {
  if (t == "||") return 1;
  if (t == "&&") return 2;
  if (t == "|") return 3;
  if (t == "^") return 4;
  if (t == "&") return 5;
  if (t == "==" || t == "!=") return 6;
  if (t == "<" || t == ">" || t == "<=" || t == ">=" || t == "instanceof") {
    return 7;
  }
  if (t == "<<" || t == ">>" || t == ">>>") return 8;
  if (t == "+" || t == "-") return 9;
  if (t == "*" || t == "/" || t == "%") return 10;
  return 0;
}

const char* TerminalType(TokenType type) {
  switch (type) {
    case TokenType::kIdentifier:
      return node_types::kIdentifier;
    case TokenType::kKeyword:
      return node_types::kKeyword;
    case TokenType::kNumber:
      return node_types::kNumberLiteral;
    case TokenType::kString:
      return node_types::kStringLiteral;
    case TokenType::kChar:
      return node_types::kCharacterLiteral;
    case TokenType::kSeparator:
      return node_types::kSeparator;
    default:
      return node_types::kOperator;
  }
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  AstNode ParseFunctionRoot() {
    AstNode member = ParseMember();
    if (member.type != "method_declaration" &&
        member.type != "constructor_declaration") {
      Fail("expected a method or constructor declaration");
    }
    ExpectEnd();
    return member;
  }

  AstNode ParseSingleStatement() {
    AstNode stmt = ParseBlockStatement();
    ExpectEnd();
    return stmt;
  }

 private:
  // Parser position. `sub` > 0 means the first `sub` characters of the
  // current token were already consumed (only ever for '>' splitting).
  struct Pos {
    size_t index = 0;
    size_t sub = 0;
  };

  // ---- token access -------------------------------------------------------

  const Token& Tok(size_t ahead = 0) const {
    const size_t i = pos_.index + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }

  std::string_view Text() const {
    return std::string_view(Tok().text).substr(pos_.sub);
  }

  TokenType TypeAt(size_t ahead = 0) const { return Tok(ahead).type; }

  bool At(std::string_view text) const {
    return TypeAt() != TokenType::kEnd && TypeAt() != TokenType::kString &&
           TypeAt() != TokenType::kChar && Text() == text;
  }

  bool AtIdentifier() const { return TypeAt() == TokenType::kIdentifier; }
  bool AtEnd() const { return TypeAt() == TokenType::kEnd; }

  [[noreturn]] void Fail(const std::string& message) const {
    throw ParseFailure{message + " near '" + std::string(Text()) + "'",
                       Tok().offset + pos_.sub};
  }

  AstNode Take() {
    if (AtEnd()) Fail("unexpected end of input");
    const Token& t = Tok();
    AstNode node = AstNode::Terminal(
        TerminalType(t.type), std::string(Text()),
        pos_.sub == 0 ? t.leading : std::string(),
        Span{t.offset + pos_.sub, t.offset + t.text.size()});
    ++pos_.index;
    pos_.sub = 0;
    return node;
  }

  AstNode Expect(std::string_view text) {
    if (At(text)) return Take();
    Fail("expected '" + std::string(text) + "'");
  }

  // Consumes a single '>' even when it is the head of '>>', '>>>' or '>='.
  AstNode ExpectCloseAngle() {
    const std::string_view text = Text();
    if (text.empty() || text[0] != '>' || TypeAt() != TokenType::kOperator) {
      Fail("expected '>'");
    }
    if (text.size() == 1) return Take();
    const Token& t = Tok();
    AstNode node = AstNode::Terminal(
        node_types::kOperator, ">", pos_.sub == 0 ? t.leading : std::string(),
        Span{t.offset + pos_.sub, t.offset + pos_.sub + 1});
    ++pos_.sub;
    return node;
  }

  AstNode ExpectIdentifier() {
    if (!AtIdentifier()) Fail("expected identifier");
    return Take();
  }

  void ExpectEnd() const {
    if (!AtEnd() || pos_.sub != 0) Fail("unexpected trailing input");
  }

  // ---- pure lookahead scanning (no nodes, no failures) ---------------------

  static constexpr size_t kNone = static_cast<size_t>(-1);

  // Index of the token after a balanced group opened at `i`, or kNone.
  size_t SkipBalanced(size_t i, std::string_view open,
                      std::string_view close) const {
    int depth = 0;
    for (; i < tokens_.size(); ++i) {
      const Token& t = tokens_[i];
      if (t.type == TokenType::kEnd) return kNone;
      if (t.type != TokenType::kSeparator) continue;
      if (t.text == open) ++depth;
      if (t.text == close && --depth == 0) return i + 1;
    }
    return kNone;
  }

  size_t SkipAnnotation(size_t i) const {
    // '@' Name {'.' Name} ['(' ... ')']
    if (tokens_[i].text != "@") return kNone;
    ++i;
    if (tokens_[i].type != TokenType::kIdentifier) return kNone;
    ++i;
    while (tokens_[i].text == "." &&
           tokens_[i + 1].type == TokenType::kIdentifier) {
      i += 2;
    }
    if (tokens_[i].text == "(") return SkipBalanced(i, "(", ")");
    return i;
  }

  size_t SkipTypeArguments(size_t i) const {
    if (tokens_[i].text != "<") return kNone;
    int depth = 0;
    for (; i < tokens_.size(); ++i) {
      const Token& t = tokens_[i];
      if (t.text == "<") {
        ++depth;
      } else if (t.text == ">" || t.text == ">>" || t.text == ">>>") {
        depth -= static_cast<int>(t.text.size());
        if (depth == 0) return i + 1;
        if (depth < 0) return kNone;
      } else if (t.type == TokenType::kIdentifier || t.text == "," ||
                 t.text == "." || t.text == "?" || t.text == "extends" ||
                 t.text == "super" || t.text == "[" || t.text == "]" ||
                 t.text == "&" || t.text == "@" || IsPrimitiveType(t.text)) {
        continue;
      } else {
        return kNone;
      }
    }
    return kNone;
  }

  // Index after a type starting at `i`, or kNone when no type starts there.
  // Only whole tokens are scanned, so callers must not be mid-split.
  size_t SkipType(size_t i) const {
    while (tokens_[i].text == "@") {
      i = SkipAnnotation(i);
      if (i == kNone) return kNone;
    }
    if (tokens_[i].type == TokenType::kKeyword &&
        IsPrimitiveType(tokens_[i].text)) {
      ++i;
    } else if (tokens_[i].type == TokenType::kIdentifier) {
      ++i;
      if (tokens_[i].text == "<") {
        i = SkipTypeArguments(i);
        if (i == kNone) return kNone;
      }
      while (tokens_[i].text == "." &&
             tokens_[i + 1].type == TokenType::kIdentifier) {
        i += 2;
        if (tokens_[i].text == "<") {
          i = SkipTypeArguments(i);
          if (i == kNone) return kNone;
        }
      }
    } else {
      return kNone;
    }
    while (tokens_[i].text == "[" && tokens_[i + 1].text == "]") i += 2;
    return i;
  }

  size_t SkipVariableModifiers(size_t i) const {
    while (true) {
      if (tokens_[i].text == "final") {
        ++i;
      } else if (tokens_[i].text == "@") {
        i = SkipAnnotation(i);
        if (i == kNone) return kNone;
      } else {
        return i;
      }
    }
  }

  bool LooksLikeLocalVariable() const {
    if (pos_.sub != 0) return false;
    size_t i = SkipVariableModifiers(pos_.index);
    if (i == kNone) return false;
    i = SkipType(i);
    if (i == kNone || tokens_[i].type != TokenType::kIdentifier) return false;
    const std::string& next = tokens_[i + 1].text;
    return next == "=" || next == "," || next == ";" || next == "[";
  }

  bool LooksLikeEnhancedFor() const {
    size_t i = SkipVariableModifiers(pos_.index);
    if (i == kNone) return false;
    i = SkipType(i);
    return i != kNone && tokens_[i].type == TokenType::kIdentifier &&
           tokens_[i + 1].text == ":";
  }

  bool LooksLikeLambda() const {
    if (pos_.sub != 0) return false;
    if (AtIdentifier()) return Tok(1).text == "->";
    if (!At("(")) return false;
    const size_t after = SkipBalanced(pos_.index, "(", ")");
    return after != kNone && tokens_[after].text == "->";
  }

  bool LooksLikeCast() const {
    if (!At("(")) return false;
    const size_t first = pos_.index + 1;
    const bool primitive = tokens_[first].type == TokenType::kKeyword &&
                           IsPrimitiveType(tokens_[first].text);
    size_t i = SkipType(first);
    if (i == kNone) return false;
    while (tokens_[i].text == "&") {  // intersection cast
      i = SkipType(i + 1);
      if (i == kNone) return false;
    }
    if (tokens_[i].text != ")") return false;
    if (primitive) return true;
    const Token& next = tokens_[i + 1];
    switch (next.type) {
      case TokenType::kIdentifier:
      case TokenType::kNumber:
      case TokenType::kString:
      case TokenType::kChar:
        return true;
      case TokenType::kKeyword:
        return next.text == "this" || next.text == "super" ||
               next.text == "new" || next.text == "true" ||
               next.text == "false" || next.text == "null" ||
               next.text == "switch" || IsPrimitiveType(next.text);
      default:
        return next.text == "(" || next.text == "!" || next.text == "~";
    }
  }

  // ---- declarations -------------------------------------------------------

  AstNode ParseAnnotation() {
    std::vector<AstNode> kids;
    kids.push_back(Expect("@"));
    kids.push_back(ExpectIdentifier());
    while (At(".") && Tok(1).type == TokenType::kIdentifier) {
      kids.push_back(Take());
      kids.push_back(Take());
    }
    if (!At("(")) return AstNode::Nonterminal("marker_annotation", std::move(kids));
    std::vector<AstNode> args;
    args.push_back(Take());
    if (!At(")")) {
      while (true) {
        if (AtIdentifier() && Tok(1).text == "=") {
          std::vector<AstNode> pair;
          pair.push_back(Take());
          pair.push_back(Take());
          pair.push_back(ParseElementValue());
          args.push_back(AstNode::Nonterminal("element_value_pair", std::move(pair)));
        } else {
          args.push_back(ParseElementValue());
        }
        if (!At(",")) break;
        args.push_back(Take());
      }
    }
    args.push_back(Expect(")"));
    kids.push_back(AstNode::Nonterminal("annotation_argument_list", std::move(args)));
    return AstNode::Nonterminal("annotation", std::move(kids));
  }

  AstNode ParseElementValue() {
    if (At("@")) return ParseAnnotation();
    if (At("{")) {
      std::vector<AstNode> kids;
      kids.push_back(Take());
      while (!At("}")) {
        kids.push_back(ParseElementValue());
        if (!At(",")) break;
        kids.push_back(Take());
      }
      kids.push_back(Expect("}"));
      return AstNode::Nonterminal("element_value_array_initializer", std::move(kids));
    }
    return ParseTernary();
  }

  // Returns a "modifiers" node, possibly with no children.
  AstNode ParseModifiers(bool variable_only) {
    std::vector<AstNode> kids;
    while (true) {
      if (At("@") && Tok(1).text != "interface") {
        kids.push_back(ParseAnnotation());
      } else if (TypeAt() == TokenType::kKeyword &&
                 (variable_only ? Text() == "final"
                                : IsModifierKeyword(Text()))) {
        kids.push_back(Take());
      } else {
        break;
      }
    }
    return AstNode::Nonterminal("modifiers", std::move(kids));
  }

  void PushModifiers(std::vector<AstNode>& kids, AstNode modifiers) {
    if (!modifiers.children.empty()) kids.push_back(std::move(modifiers));
  }

  AstNode ParseTypeParameters() {
    std::vector<AstNode> kids;
    kids.push_back(Expect("<"));
    while (true) {
      std::vector<AstNode> param;
      while (At("@")) param.push_back(ParseAnnotation());
      param.push_back(ExpectIdentifier());
      if (At("extends")) {
        param.push_back(Take());
        param.push_back(ParseType());
        while (At("&")) {
          param.push_back(Take());
          param.push_back(ParseType());
        }
      }
      kids.push_back(AstNode::Nonterminal("type_parameter", std::move(param)));
      if (!At(",")) break;
      kids.push_back(Take());
    }
    kids.push_back(ExpectCloseAngle());
    return AstNode::Nonterminal("type_parameters", std::move(kids));
  }

  AstNode ParseTypeArguments() {
    std::vector<AstNode> kids;
    kids.push_back(Expect("<"));
    if (!Text().empty() && Text()[0] == '>') {  // diamond
      kids.push_back(ExpectCloseAngle());
      return AstNode::Nonterminal("type_arguments", std::move(kids));
    }
    while (true) {
      if (At("?")) {
        std::vector<AstNode> wildcard;
        wildcard.push_back(Expect("?"));
        if (At("extends") || At("super")) {
          wildcard.push_back(Take());
          wildcard.push_back(ParseType());
        }
        kids.push_back(AstNode::Nonterminal("wildcard", std::move(wildcard)));
      } else {
        kids.push_back(ParseType());
      }
      if (!At(",")) break;
      kids.push_back(Take());
    }
    kids.push_back(ExpectCloseAngle());
    return AstNode::Nonterminal("type_arguments", std::move(kids));
  }

  // Class type without trailing dimensions.
  void ParseClassTypeInto(std::vector<AstNode>& kids) {
    kids.push_back(ExpectIdentifier());
    if (At("<")) kids.push_back(ParseTypeArguments());
    while (At(".") && Tok(1).type == TokenType::kIdentifier) {
      kids.push_back(Take());
      kids.push_back(Take());
      if (At("<")) kids.push_back(ParseTypeArguments());
    }
  }

  AstNode ParseType(bool allow_dims = true) {
    std::vector<AstNode> kids;
    while (At("@")) kids.push_back(ParseAnnotation());
    if (TypeAt() == TokenType::kKeyword && IsPrimitiveType(Text())) {
      kids.push_back(Take());
    } else if (AtIdentifier()) {
      ParseClassTypeInto(kids);
    } else {
      Fail("expected type");
    }
    if (allow_dims) {
      while (At("[") && Tok(1).text == "]") {
        kids.push_back(Take());
        kids.push_back(Take());
      }
    }
    return AstNode::Nonterminal("type", std::move(kids));
  }

  AstNode ParseFormalParameters() {
    std::vector<AstNode> kids;
    kids.push_back(Expect("("));
    if (!At(")")) {
      while (true) {
        std::vector<AstNode> param;
        PushModifiers(param, ParseModifiers(/*variable_only=*/true));
        param.push_back(ParseType());
        std::string type = "formal_parameter";
        if (At("...")) {
          param.push_back(Take());
          type = "spread_parameter";
        }
        if (At("this")) {
          param.push_back(Take());
        } else {
          param.push_back(ExpectIdentifier());
        }
        while (At("[") && Tok(1).text == "]") {
          param.push_back(Take());
          param.push_back(Take());
        }
        kids.push_back(AstNode::Nonterminal(type, std::move(param)));
        if (!At(",")) break;
        kids.push_back(Take());
      }
    }
    kids.push_back(Expect(")"));
    return AstNode::Nonterminal("formal_parameters", std::move(kids));
  }

  void ParseMethodRest(std::vector<AstNode>& kids) {
    kids.push_back(ParseFormalParameters());
    while (At("[") && Tok(1).text == "]") {
      kids.push_back(Take());
      kids.push_back(Take());
    }
    if (At("throws")) {
      std::vector<AstNode> throws;
      throws.push_back(Take());
      throws.push_back(ParseType());
      while (At(",")) {
        throws.push_back(Take());
        throws.push_back(ParseType());
      }
      kids.push_back(AstNode::Nonterminal("throws", std::move(throws)));
    }
    if (At("default")) {  // annotation type element default
      kids.push_back(Take());
      kids.push_back(ParseElementValue());
      kids.push_back(Expect(";"));
    } else if (At(";")) {
      kids.push_back(Take());
    } else {
      kids.push_back(ParseBlock());
    }
  }

  // Method, constructor, field or initializer inside a class body.
  AstNode ParseMember() {
    if (At("{")) {
      return AstNode::Nonterminal("block_initializer", {ParseBlock()});
    }
    if (At("static") && Tok(1).text == "{") {
      std::vector<AstNode> kids;
      kids.push_back(Take());
      kids.push_back(ParseBlock());
      return AstNode::Nonterminal("static_initializer", std::move(kids));
    }
    std::vector<AstNode> kids;
    PushModifiers(kids, ParseModifiers(/*variable_only=*/false));
    if (At("class") || At("interface") || At("enum") ||
        (At("@") && Tok(1).text == "interface")) {
      Fail("nested type declarations are not supported");
    }
    if (At("<")) kids.push_back(ParseTypeParameters());
    if (AtIdentifier() && Tok(1).text == "(") {
      kids.push_back(Take());
      ParseMethodRest(kids);
      return AstNode::Nonterminal("constructor_declaration", std::move(kids));
    }
    if (At("void")) {
      kids.push_back(Take());
    } else {
      kids.push_back(ParseType());
    }
    if (AtIdentifier() && Tok(1).text == "(") {
      kids.push_back(Take());
      ParseMethodRest(kids);
      return AstNode::Nonterminal("method_declaration", std::move(kids));
    }
    ParseDeclaratorsInto(kids);
    kids.push_back(Expect(";"));
    return AstNode::Nonterminal("field_declaration", std::move(kids));
  }

  AstNode ParseClassBody() {
    std::vector<AstNode> kids;
    kids.push_back(Expect("{"));
    while (!At("}")) {
      if (AtEnd()) Fail("unterminated class body");
      if (At(";")) {
        kids.push_back(Take());
      } else {
        kids.push_back(ParseMember());
      }
    }
    kids.push_back(Expect("}"));
    return AstNode::Nonterminal("class_body", std::move(kids));
  }

  void ParseDeclaratorsInto(std::vector<AstNode>& kids) {
    while (true) {
      std::vector<AstNode> decl;
      decl.push_back(ExpectIdentifier());
      while (At("[") && Tok(1).text == "]") {
        decl.push_back(Take());
        decl.push_back(Take());
      }
      if (At("=")) {
        decl.push_back(Take());
        decl.push_back(At("{") ? ParseArrayInitializer() : ParseExpression());
      }
      kids.push_back(AstNode::Nonterminal("variable_declarator", std::move(decl)));
      if (!At(",")) break;
      kids.push_back(Take());
    }
  }

  AstNode ParseArrayInitializer() {
    std::vector<AstNode> kids;
    kids.push_back(Expect("{"));
    while (!At("}")) {
      kids.push_back(At("{") ? ParseArrayInitializer() : ParseExpression());
      if (!At(",")) break;
      kids.push_back(Take());
    }
    kids.push_back(Expect("}"));
    return AstNode::Nonterminal("array_initializer", std::move(kids));
  }

  // ---- statements -----------------------------------------------------------

  AstNode ParseBlock() {
    std::vector<AstNode> kids;
    kids.push_back(Expect("{"));
    while (!At("}")) {
      if (AtEnd()) Fail("unterminated block");
      kids.push_back(ParseBlockStatement());
    }
    kids.push_back(Expect("}"));
    return AstNode::Nonterminal("block", std::move(kids));
  }

  AstNode ParseLocalVariableDeclaration(bool with_semicolon) {
    std::vector<AstNode> kids;
    PushModifiers(kids, ParseModifiers(/*variable_only=*/true));
    kids.push_back(ParseType());
    ParseDeclaratorsInto(kids);
    if (with_semicolon) kids.push_back(Expect(";"));
    return AstNode::Nonterminal("local_variable_declaration", std::move(kids));
  }

  AstNode ParseBlockStatement() {
    if (At("class") || At("interface") || At("enum") ||
        ((At("final") || At("abstract") || At("static")) &&
         (Tok(1).text == "class" || Tok(1).text == "interface"))) {
      Fail("local type declarations are not supported");
    }
    if (LooksLikeLocalVariable()) return ParseLocalVariableDeclaration(true);
    return ParseStatementProper();
  }

  AstNode ParseParenthesized() {
    std::vector<AstNode> kids;
    kids.push_back(Expect("("));
    kids.push_back(ParseExpression());
    kids.push_back(Expect(")"));
    return AstNode::Nonterminal("parenthesized_expression", std::move(kids));
  }

  AstNode ParseStatementProper() {
    std::vector<AstNode> kids;
    if (At("{")) return ParseBlock();
    if (At(";")) {
      kids.push_back(Take());
      return AstNode::Nonterminal("empty_statement", std::move(kids));
    }
    if (At("if")) {
      kids.push_back(Take());
      kids.push_back(ParseParenthesized());
      kids.push_back(ParseStatementProper());
      if (At("else")) {
        kids.push_back(Take());
        kids.push_back(ParseStatementProper());
      }
      return AstNode::Nonterminal("if_statement", std::move(kids));
    }
    if (At("while")) {
      kids.push_back(Take());
      kids.push_back(ParseParenthesized());
      kids.push_back(ParseStatementProper());
      return AstNode::Nonterminal("while_statement", std::move(kids));
    }
    if (At("do")) {
      kids.push_back(Take());
      kids.push_back(ParseStatementProper());
      kids.push_back(Expect("while"));
      kids.push_back(ParseParenthesized());
      kids.push_back(Expect(";"));
      return AstNode::Nonterminal("do_statement", std::move(kids));
    }
    if (At("for")) return ParseFor();
    if (At("try")) return ParseTry();
    if (At("switch")) return ParseSwitch("switch_statement");
    if (At("return")) {
      kids.push_back(Take());
      if (!At(";")) kids.push_back(ParseExpression());
      kids.push_back(Expect(";"));
      return AstNode::Nonterminal("return_statement", std::move(kids));
    }
    if (At("break") || At("continue")) {
      const std::string type =
          At("break") ? "break_statement" : "continue_statement";
      kids.push_back(Take());
      if (AtIdentifier()) kids.push_back(Take());
      kids.push_back(Expect(";"));
      return AstNode::Nonterminal(type, std::move(kids));
    }
    if (At("throw")) {
      kids.push_back(Take());
      kids.push_back(ParseExpression());
      kids.push_back(Expect(";"));
      return AstNode::Nonterminal("throw_statement", std::move(kids));
    }
    if (At("synchronized")) {
      kids.push_back(Take());
      kids.push_back(ParseParenthesized());
      kids.push_back(ParseBlock());
      return AstNode::Nonterminal("synchronized_statement", std::move(kids));
    }
    if (At("assert")) {
      kids.push_back(Take());
      kids.push_back(ParseExpression());
      if (At(":")) {
        kids.push_back(Take());
        kids.push_back(ParseExpression());
      }
      kids.push_back(Expect(";"));
      return AstNode::Nonterminal("assert_statement", std::move(kids));
    }
    if (AtIdentifier() && Text() == "yield" &&
        Tok(1).type != TokenType::kOperator && Tok(1).text != "." &&
        Tok(1).text != "(" && Tok(1).text != "[" && Tok(1).text != ";") {
      kids.push_back(Take());
      kids.back().type = node_types::kKeyword;  // contextual
      kids.push_back(ParseExpression());
      kids.push_back(Expect(";"));
      return AstNode::Nonterminal("yield_statement", std::move(kids));
    }
    if (AtIdentifier() && Tok(1).text == ":") {
      kids.push_back(Take());
      kids.push_back(Take());
      kids.push_back(ParseStatementProper());
      return AstNode::Nonterminal("labeled_statement", std::move(kids));
    }
    kids.push_back(ParseExpression());
    kids.push_back(Expect(";"));
    return AstNode::Nonterminal("expression_statement", std::move(kids));
  }

  AstNode ParseFor() {
    std::vector<AstNode> kids;
    kids.push_back(Take());
    kids.push_back(Expect("("));
    if (LooksLikeEnhancedFor()) {
      PushModifiers(kids, ParseModifiers(/*variable_only=*/true));
      kids.push_back(ParseType());
      kids.push_back(ExpectIdentifier());
      kids.push_back(Expect(":"));
      kids.push_back(ParseExpression());
      kids.push_back(Expect(")"));
      kids.push_back(ParseStatementProper());
      return AstNode::Nonterminal("enhanced_for_statement", std::move(kids));
    }
    if (!At(";")) {
      if (LooksLikeLocalVariable()) {
        AstNode decl = ParseLocalVariableDeclaration(false);
        decl.type = "for_variable_declaration";
        kids.push_back(std::move(decl));
      } else {
        kids.push_back(ParseExpressionList("for_init"));
      }
    }
    kids.push_back(Expect(";"));
    if (!At(";")) kids.push_back(ParseExpression());
    kids.push_back(Expect(";"));
    if (!At(")")) kids.push_back(ParseExpressionList("for_update"));
    kids.push_back(Expect(")"));
    kids.push_back(ParseStatementProper());
    return AstNode::Nonterminal("for_statement", std::move(kids));
  }

  AstNode ParseExpressionList(const std::string& type) {
    std::vector<AstNode> kids;
    kids.push_back(ParseExpression());
    while (At(",")) {
      kids.push_back(Take());
      kids.push_back(ParseExpression());
    }
    return AstNode::Nonterminal(type, std::move(kids));
  }

  AstNode ParseTry() {
    std::vector<AstNode> kids;
    kids.push_back(Take());
    std::string type = "try_statement";
    if (At("(")) {
      type = "try_with_resources_statement";
      std::vector<AstNode> res;
      res.push_back(Take());
      while (!At(")")) {
        if (LooksLikeLocalVariable()) {
          std::vector<AstNode> r;
          PushModifiers(r, ParseModifiers(/*variable_only=*/true));
          r.push_back(ParseType());
          r.push_back(ExpectIdentifier());
          r.push_back(Expect("="));
          r.push_back(ParseExpression());
          res.push_back(AstNode::Nonterminal("resource", std::move(r)));
        } else {
          res.push_back(AstNode::Nonterminal("resource", {ParseExpression()}));
        }
        if (!At(";")) break;
        res.push_back(Take());
      }
      res.push_back(Expect(")"));
      kids.push_back(AstNode::Nonterminal("resource_specification", std::move(res)));
    }
    kids.push_back(ParseBlock());
    bool has_handler = false;
    while (At("catch")) {
      has_handler = true;
      std::vector<AstNode> c;
      c.push_back(Take());
      c.push_back(Expect("("));
      PushModifiers(c, ParseModifiers(/*variable_only=*/true));
      std::vector<AstNode> types;
      types.push_back(ParseType());
      while (At("|")) {
        types.push_back(Take());
        types.push_back(ParseType());
      }
      c.push_back(AstNode::Nonterminal("catch_type", std::move(types)));
      c.push_back(ExpectIdentifier());
      c.push_back(Expect(")"));
      c.push_back(ParseBlock());
      kids.push_back(AstNode::Nonterminal("catch_clause", std::move(c)));
    }
    if (At("finally")) {
      has_handler = true;
      std::vector<AstNode> f;
      f.push_back(Take());
      f.push_back(ParseBlock());
      kids.push_back(AstNode::Nonterminal("finally_clause", std::move(f)));
    }
    if (!has_handler && type == "try_statement") {
      Fail("try without catch or finally");
    }
    return AstNode::Nonterminal(type, std::move(kids));
  }

  AstNode ParseSwitch(const std::string& type) {
    std::vector<AstNode> kids;
    kids.push_back(Expect("switch"));
    kids.push_back(ParseParenthesized());
    std::vector<AstNode> block;
    block.push_back(Expect("{"));
    while (!At("}")) {
      if (AtEnd()) Fail("unterminated switch");
      if (!At("case") && !At("default")) Fail("expected case label");
      AstNode label = ParseSwitchLabel();
      if (At("->")) {
        std::vector<AstNode> rule;
        rule.push_back(std::move(label));
        rule.push_back(Take());
        if (At("{")) {
          rule.push_back(ParseBlock());
        } else if (At("throw")) {
          rule.push_back(ParseStatementProper());
        } else {
          std::vector<AstNode> es;
          es.push_back(ParseExpression());
          es.push_back(Expect(";"));
          rule.push_back(AstNode::Nonterminal("expression_statement", std::move(es)));
        }
        block.push_back(AstNode::Nonterminal("switch_rule", std::move(rule)));
        continue;
      }
      std::vector<AstNode> group;
      label.children.push_back(Expect(":"));
      label.span.end = label.children.back().span.end;
      group.push_back(std::move(label));
      while (At("case") || At("default")) {
        AstNode more = ParseSwitchLabel();
        more.children.push_back(Expect(":"));
        more.span.end = more.children.back().span.end;
        group.push_back(std::move(more));
      }
      while (!At("case") && !At("default") && !At("}")) {
        if (AtEnd()) Fail("unterminated switch");
        group.push_back(ParseBlockStatement());
      }
      block.push_back(AstNode::Nonterminal("switch_block_statement_group", std::move(group)));
    }
    block.push_back(Expect("}"));
    kids.push_back(AstNode::Nonterminal("switch_block", std::move(block)));
    return AstNode::Nonterminal(type, std::move(kids));
  }

  AstNode ParseSwitchLabel() {
    std::vector<AstNode> kids;
    if (At("default")) {
      kids.push_back(Take());
    } else {
      kids.push_back(Expect("case"));
      kids.push_back(ParseTernary());
      while (At(",")) {
        kids.push_back(Take());
        kids.push_back(ParseTernary());
      }
    }
    return AstNode::Nonterminal("switch_label", std::move(kids));
  }

  // ---- expressions ----------------------------------------------------------

  AstNode ParseExpression() {
    if (LooksLikeLambda()) return ParseLambda();
    AstNode lhs = ParseTernary();
    if (TypeAt() == TokenType::kOperator && pos_.sub == 0 &&
        IsAssignmentOperator(Text())) {
      std::vector<AstNode> kids;
      kids.push_back(std::move(lhs));
      kids.push_back(Take());
      kids.push_back(ParseExpression());
      return AstNode::Nonterminal("assignment_expression", std::move(kids));
    }
    return lhs;
  }

  AstNode ParseLambda() {
    std::vector<AstNode> kids;
    if (AtIdentifier()) {
      kids.push_back(Take());
    } else {
      std::vector<AstNode> params;
      params.push_back(Expect("("));
      if (!At(")")) {
        const bool bare_names =
            AtIdentifier() && (Tok(1).text == "," || Tok(1).text == ")");
        while (true) {
          if (bare_names) {
            params.push_back(ExpectIdentifier());
          } else {
            std::vector<AstNode> param;
            PushModifiers(param, ParseModifiers(/*variable_only=*/true));
            param.push_back(ParseType());
            if (At("...")) param.push_back(Take());
            param.push_back(ExpectIdentifier());
            params.push_back(AstNode::Nonterminal("formal_parameter", std::move(param)));
          }
          if (!At(",")) break;
          params.push_back(Take());
        }
      }
      params.push_back(Expect(")"));
      kids.push_back(AstNode::Nonterminal("lambda_parameters", std::move(params)));
    }
    kids.push_back(Expect("->"));
    kids.push_back(At("{") ? ParseBlock() : ParseExpression());
    return AstNode::Nonterminal("lambda_expression", std::move(kids));
  }

  AstNode ParseTernary() {
    AstNode cond = ParseBinary(1);
    if (!At("?")) return cond;
    std::vector<AstNode> kids;
    kids.push_back(std::move(cond));
    kids.push_back(Take());
    kids.push_back(LooksLikeLambda() ? ParseLambda() : ParseTernary());
    kids.push_back(Expect(":"));
    kids.push_back(LooksLikeLambda() ? ParseLambda() : ParseTernary());
    return AstNode::Nonterminal("ternary_expression", std::move(kids));
  }

  AstNode ParseBinary(int min_precedence) {
    AstNode lhs = ParseUnary();
    while (true) {
      if (pos_.sub != 0) break;
      const std::string_view op = Text();
      const bool is_operator = TypeAt() == TokenType::kOperator ||
                               (TypeAt() == TokenType::kKeyword &&
                                op == "instanceof");
      if (!is_operator) break;
      const int prec = BinaryPrecedence(op);
      if (prec == 0 || prec < min_precedence) break;
      std::vector<AstNode> kids;
      kids.push_back(std::move(lhs));
      if (op == "instanceof") {
        kids.push_back(Take());
        if (At("final")) kids.push_back(Take());
        kids.push_back(ParseType());
        if (AtIdentifier()) kids.push_back(Take());  // pattern binding
        lhs = AstNode::Nonterminal("instanceof_expression", std::move(kids));
        continue;
      }
      kids.push_back(Take());
      kids.push_back(ParseBinary(prec + 1));
      lhs = AstNode::Nonterminal("binary_expression", std::move(kids));
    }
    return lhs;
  }

  AstNode ParseUnary() {
    std::vector<AstNode> kids;
    if (At("++") || At("--")) {
      kids.push_back(Take());
      kids.push_back(ParseUnary());
      return AstNode::Nonterminal("update_expression", std::move(kids));
    }
    if (At("+") || At("-") || At("!") || At("~")) {
      kids.push_back(Take());
      kids.push_back(ParseUnary());
      return AstNode::Nonterminal("unary_expression", std::move(kids));
    }
    if (LooksLikeCast()) {
      kids.push_back(Take());
      kids.push_back(ParseType());
      while (At("&")) {
        kids.push_back(Take());
        kids.push_back(ParseType());
      }
      kids.push_back(Expect(")"));
      kids.push_back(LooksLikeLambda() ? ParseLambda() : ParseUnary());
      return AstNode::Nonterminal("cast_expression", std::move(kids));
    }
    AstNode expr = ParsePostfix(ParsePrimary());
    while (At("++") || At("--")) {
      std::vector<AstNode> post;
      post.push_back(std::move(expr));
      post.push_back(Take());
      expr = AstNode::Nonterminal("update_expression", std::move(post));
    }
    return expr;
  }

  AstNode ParseArguments() {
    std::vector<AstNode> kids;
    kids.push_back(Expect("("));
    if (!At(")")) {
      while (true) {
        kids.push_back(ParseExpression());
        if (!At(",")) break;
        kids.push_back(Take());
      }
    }
    kids.push_back(Expect(")"));
    return AstNode::Nonterminal("argument_list", std::move(kids));
  }

  AstNode ParseCreation(std::vector<AstNode> kids) {
    // `kids` already holds an optional qualifier and the `new` keyword.
    if (At("<")) kids.push_back(ParseTypeArguments());
    std::vector<AstNode> type;
    while (At("@")) type.push_back(ParseAnnotation());
    if (TypeAt() == TokenType::kKeyword && IsPrimitiveType(Text())) {
      type.push_back(Take());
    } else {
      ParseClassTypeInto(type);
    }
    if (At("[")) {
      kids.push_back(AstNode::Nonterminal("type", std::move(type)));
      bool sized = false;
      while (At("[") && Tok(1).text != "]") {
        std::vector<AstNode> dim;
        dim.push_back(Take());
        dim.push_back(ParseExpression());
        dim.push_back(Expect("]"));
        kids.push_back(AstNode::Nonterminal("dimensions_expr", std::move(dim)));
        sized = true;
      }
      while (At("[") && Tok(1).text == "]") {
        kids.push_back(Take());
        kids.push_back(Take());
      }
      if (!sized) {
        if (!At("{")) Fail("expected array initializer");
        kids.push_back(ParseArrayInitializer());
      }
      return AstNode::Nonterminal("array_creation_expression", std::move(kids));
    }
    kids.push_back(AstNode::Nonterminal("type", std::move(type)));
    kids.push_back(ParseArguments());
    if (At("{")) kids.push_back(ParseClassBody());
    return AstNode::Nonterminal("object_creation_expression", std::move(kids));
  }

  AstNode ParsePrimary() {
    std::vector<AstNode> kids;
    switch (TypeAt()) {
      case TokenType::kNumber:
      case TokenType::kString:
      case TokenType::kChar:
        return Take();
      case TokenType::kIdentifier:
        if (Tok(1).text == "(") {
          kids.push_back(Take());
          kids.push_back(ParseArguments());
          return AstNode::Nonterminal("method_invocation", std::move(kids));
        }
        return Take();
      default:
        break;
    }
    if (At("true") || At("false") || At("null")) return Take();
    if (At("this") || At("super")) {
      kids.push_back(Take());
      if (At("(")) {
        kids.push_back(ParseArguments());
        return AstNode::Nonterminal("explicit_constructor_invocation", std::move(kids));
      }
      return std::move(kids.front());
    }
    if (At("(")) return ParseParenthesized();
    if (At("new")) {
      kids.push_back(Take());
      return ParseCreation(std::move(kids));
    }
    if (At("switch")) return ParseSwitch("switch_expression");
    if ((TypeAt() == TokenType::kKeyword && IsPrimitiveType(Text())) ||
        At("void")) {
      kids.push_back(At("void") ? Take() : ParseType());
      if (At("::")) {
        kids.push_back(Take());
        kids.push_back(Expect("new"));
        return AstNode::Nonterminal("method_reference", std::move(kids));
      }
      kids.push_back(Expect("."));
      kids.push_back(Expect("class"));
      return AstNode::Nonterminal("class_literal", std::move(kids));
    }
    Fail("expected expression");
  }

  AstNode ParsePostfix(AstNode expr) {
    while (true) {
      std::vector<AstNode> kids;
      if (At(".")) {
        kids.push_back(std::move(expr));
        kids.push_back(Take());
        if (At("<")) {
          kids.push_back(ParseTypeArguments());
          kids.push_back(ExpectIdentifier());
          kids.push_back(ParseArguments());
          expr = AstNode::Nonterminal("method_invocation", std::move(kids));
        } else if (AtIdentifier()) {
          kids.push_back(Take());
          if (At("(")) {
            kids.push_back(ParseArguments());
            expr = AstNode::Nonterminal("method_invocation", std::move(kids));
          } else {
            expr = AstNode::Nonterminal("field_access", std::move(kids));
          }
        } else if (At("class")) {
          kids.push_back(Take());
          expr = AstNode::Nonterminal("class_literal", std::move(kids));
        } else if (At("this")) {
          kids.push_back(Take());
          expr = AstNode::Nonterminal("field_access", std::move(kids));
        } else if (At("super")) {
          kids.push_back(Take());
          if (At("(")) {
            kids.push_back(ParseArguments());
            expr = AstNode::Nonterminal("explicit_constructor_invocation", std::move(kids));
          } else {
            expr = AstNode::Nonterminal("field_access", std::move(kids));
          }
        } else if (At("new")) {
          kids.push_back(Take());
          expr = ParseCreation(std::move(kids));
        } else {
          Fail("expected member name");
        }
      } else if (At("[")) {
        kids.push_back(std::move(expr));
        if (Tok(1).text == "]") {
          // Array type in a class literal or constructor reference.
          while (At("[") && Tok(1).text == "]") {
            kids.push_back(Take());
            kids.push_back(Take());
          }
          if (At("::")) {
            kids.push_back(Take());
            kids.push_back(Expect("new"));
            expr = AstNode::Nonterminal("method_reference", std::move(kids));
          } else {
            kids.push_back(Expect("."));
            kids.push_back(Expect("class"));
            expr = AstNode::Nonterminal("class_literal", std::move(kids));
          }
        } else {
          kids.push_back(Take());
          kids.push_back(ParseExpression());
          kids.push_back(Expect("]"));
          expr = AstNode::Nonterminal("array_access", std::move(kids));
        }
      } else if (At("::")) {
        kids.push_back(std::move(expr));
        kids.push_back(Take());
        if (At("<")) kids.push_back(ParseTypeArguments());
        if (At("new")) {
          kids.push_back(Take());
        } else {
          kids.push_back(ExpectIdentifier());
        }
        expr = AstNode::Nonterminal("method_reference", std::move(kids));
      } else {
        return expr;
      }
    }
  }

  std::vector<Token> tokens_;
  Pos pos_;
};

template <typename Fn>
AstNode RunParser(std::string_view source, Fn&& fn) {
  LexResult lexed = Lex(source, /*strict=*/true);
  if (!lexed.ok) {
    throw Error(ErrorCode::kParseError,
                lexed.error + " at offset " + std::to_string(lexed.error_offset));
  }
  if (lexed.tokens.size() == 1) {
    throw Error(ErrorCode::kParseError, "empty input");
  }
  Parser parser(std::move(lexed.tokens));
  try {
    return fn(parser);
  } catch (const ParseFailure& failure) {
    throw Error(ErrorCode::kParseError,
                failure.message + " at offset " + std::to_string(failure.offset));
  }
}

}  // namespace

AstNode ParseMethod(std::string_view source) {
  return RunParser(source, [](auto& p) { return p.ParseFunctionRoot(); });
}

AstNode ParseStatement(std::string_view source) {
  return RunParser(source, [](auto& p) { return p.ParseSingleStatement(); });
}

}  // namespace coprotector::java
