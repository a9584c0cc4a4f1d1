// Syntax trees for a JavaScript subset: lexer, recursive-descent parser,
// ESTree JSON ingestion and slice reconstruction.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slicefix {

/// A source file split into 1-indexed lines.
struct SourceFile {
  std::string path;
  std::string content;
  std::vector<std::string> lines;

  static SourceFile from_text(std::string path, std::string content);
  static SourceFile load(const std::string &path);

  std::size_t line_count() const { return lines.size(); }
  /// 1-based accessor; throws std::out_of_range.
  const std::string &line(int number) const;
};

/// Node kinds of the internal grammar. Declaration keywords and loop
/// flavours are encoded in the kind so that `var`->`let` or `in`->`of`
/// is a single type replacement.
enum class Kind : std::uint8_t {
  Program,
  VarDeclaration,
  LetDeclaration,
  ConstDeclaration,
  VariableDeclarator,
  FunctionDeclaration,
  FormalParameters,
  RestElement,
  AssignmentPattern,
  ReturnStatement,
  IfStatement,
  ForStatement,
  ForInStatement,
  ForOfStatement,
  WhileStatement,
  BreakStatement,
  ContinueStatement,
  ThrowStatement,
  EmptyStatement,
  ExpressionStatement,
  Block,
  ImportDeclaration,
  ImportDefaultSpecifier,
  ImportNamespaceSpecifier,
  ImportSpecifier,
  ExportDefaultDeclaration,
  ExportNamedDeclaration,
  AssignmentExpression,
  BinaryExpression,
  LogicalExpression,
  UnaryExpression,
  UpdateExpression,
  ConditionalExpression,
  CallExpression,
  NewExpression,
  MemberExpression,
  ComputedMemberExpression,
  ArrowFunctionExpression,
  FunctionExpression,
  ObjectExpression,
  Property,
  ShorthandProperty,
  MethodProperty,
  SpreadElement,
  ArrayExpression,
  EmptyExpression,
  Identifier,
  PropertyName,
  Operator,
  StringLiteral,
  NumericLiteral,
  BooleanLiteral,
  NullLiteral,
  TemplateLiteral,
  ThisExpression,
  Foreign,
};

inline constexpr int kKindCount = static_cast<int>(Kind::Foreign) + 1;

std::string_view kind_name(Kind kind);
std::optional<Kind> kind_from_name(std::string_view name);
/// True for kinds whose nodes carry a lexeme (identifiers, operators,
/// property names, literals).
bool kind_has_value(Kind kind);
bool kind_label_has_value(std::string_view label);

/// Half-open source range; lines 1-based, columns 0-based (ESTree style).
struct Span {
  int line = 1;
  int col = 0;
  int end_line = 1;
  int end_col = 0;

  bool contains(const Span &other) const;
  friend bool operator==(const Span &, const Span &) = default;
};

struct SyntaxNode {
  Kind kind = Kind::Foreign;
  std::optional<std::string> value;
  std::vector<int> children;
  int parent = -1;
  Span span;

  bool is_leaf() const { return children.empty(); }
};

enum class TokenType : std::uint8_t {
  Identifier,
  Keyword,
  Punctuator,
  String,
  Template,
  Number,
  EndOfFile,
};

/// A lexical token. `leading_trivia` holds the whitespace and comments
/// that precede it, so tokens plus trivia reproduce the source exactly.
struct Token {
  TokenType type = TokenType::EndOfFile;
  std::string text;
  std::string leading_trivia;
  Span span;
  bool newline_before = false;
};

class ParseError : public std::runtime_error {
public:
  ParseError(int line, int col, const std::string &message);
  int line() const { return line_; }
  int col() const { return col_; }
  const std::string &message() const { return message_; }

private:
  int line_;
  int col_;
  std::string message_;
};

/// Ordered, span-annotated tree. Nodes are stored in preorder and the root
/// is node 0, so a node index doubles as its preorder position.
struct SyntaxTree {
  std::vector<SyntaxNode> nodes;
  std::vector<Token> tokens;            // empty for ingested/edited trees
  std::vector<std::string> source_lines; // empty for edited trees
  std::string trailing_trivia;

  int root() const { return 0; }
  std::size_t size() const { return nodes.size(); }
  const SyntaxNode &node(int index) const { return nodes.at(static_cast<std::size_t>(index)); }

  /// Number of nodes in the subtree rooted at `index` (preorder storage
  /// makes the subtree a contiguous range).
  int subtree_size(int index) const;
  /// Tokens that are not whitespace/comments.
  std::size_t token_count() const { return tokens.size(); }
  /// Rebuilds the source from tokens and trivia.
  std::string render_tokens() const;
};

/// Throws ParseError for input outside the subset grammar.
SyntaxTree parse(const SourceFile &source);
SyntaxTree parse(std::string_view text);

/// Lexes without parsing (token statistics).
std::vector<Token> tokenize(std::string_view text);

/// Indices of leaf nodes in source order.
std::vector<int> leaves(const SyntaxTree &tree);

/// Builds a tree from an ESTree-shaped JSON document with `loc` fields.
/// Unknown node types become Kind::Foreign with their children kept.
SyntaxTree ingest_estree(std::string_view json);

/// Emits the context lines together with the header and terminator lines
/// of every multi-line construct touching them. Throws ParseError if the
/// result does not parse.
std::string reconstruct_statements(const SyntaxTree &tree, const std::set<int> &context_lines);
/// The closure-completed line set used by reconstruct_statements.
std::set<int> complete_closures(const SyntaxTree &tree, const std::set<int> &context_lines);

/// Checks preorder layout, parent links and span nesting; returns an
/// empty string when the tree is well formed, else a description.
std::string validate(const SyntaxTree &tree);

/// Structural equality ignoring spans and trivia.
bool isomorphic(const SyntaxTree &a, const SyntaxTree &b);
bool isomorphic_subtrees(const SyntaxTree &a, int ia, const SyntaxTree &b, int ib);

/// Indented one-node-per-line dump, for debugging and golden tests.
std::string dump(const SyntaxTree &tree);

} // namespace slicefix
