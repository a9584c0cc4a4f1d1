#include "slicefix/syntax.hpp"

#include <array>
#include <fstream>
#include <sstream>

namespace slicefix {

namespace {

constexpr std::array<std::string_view, kKindCount> kKindNames = {
    "Program",
    "VarDeclaration",
    "LetDeclaration",
    "ConstDeclaration",
    "VariableDeclarator",
    "FunctionDeclaration",
    "FormalParameters",
    "RestElement",
    "AssignmentPattern",
    "ReturnStatement",
    "IfStatement",
    "ForStatement",
    "ForInStatement",
    "ForOfStatement",
    "WhileStatement",
    "BreakStatement",
    "ContinueStatement",
    "ThrowStatement",
    "EmptyStatement",
    "ExpressionStatement",
    "Block",
    "ImportDeclaration",
    "ImportDefaultSpecifier",
    "ImportNamespaceSpecifier",
    "ImportSpecifier",
    "ExportDefaultDeclaration",
    "ExportNamedDeclaration",
    "AssignmentExpression",
    "BinaryExpression",
    "LogicalExpression",
    "UnaryExpression",
    "UpdateExpression",
    "ConditionalExpression",
    "CallExpression",
    "NewExpression",
    "MemberExpression",
    "ComputedMemberExpression",
    "ArrowFunctionExpression",
    "FunctionExpression",
    "ObjectExpression",
    "Property",
    "ShorthandProperty",
    "MethodProperty",
    "SpreadElement",
    "ArrayExpression",
    "EmptyExpression",
    "Identifier",
    "PropertyName",
    "Operator",
    "StringLiteral",
    "NumericLiteral",
    "BooleanLiteral",
    "NullLiteral",
    "TemplateLiteral",
    "ThisExpression",
    "Foreign",
};

} // namespace

std::string_view kind_name(Kind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<Kind> kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<Kind>(i);
  return std::nullopt;
}

bool kind_has_value(Kind kind) {
  switch (kind) {
  case Kind::Identifier:
  case Kind::PropertyName:
  case Kind::Operator:
  case Kind::StringLiteral:
  case Kind::NumericLiteral:
  case Kind::BooleanLiteral:
  case Kind::TemplateLiteral:
    return true;
  default:
    return false;
  }
}

bool kind_label_has_value(std::string_view label) {
  auto k = kind_from_name(label);
  return k && kind_has_value(*k);
}

SourceFile SourceFile::from_text(std::string path, std::string content) {
  SourceFile f;
  f.path = std::move(path);
  f.content = std::move(content);
  std::size_t start = 0;
  const std::string &c = f.content;
  while (start <= c.size()) {
    std::size_t nl = c.find('\n', start);
    if (nl == std::string::npos) {
      // A trailing newline does not open an extra line.
      if (start < c.size()) f.lines.push_back(c.substr(start));
      break;
    }
    f.lines.push_back(c.substr(start, nl - start));
    start = nl + 1;
  }
  return f;
}

SourceFile SourceFile::load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(path, ss.str());
}

const std::string &SourceFile::line(int number) const {
  if (number < 1 || static_cast<std::size_t>(number) > lines.size())
    throw std::out_of_range("line " + std::to_string(number) + " outside file");
  return lines[static_cast<std::size_t>(number - 1)];
}

bool Span::contains(const Span &o) const {
  auto before_eq = [](int l1, int c1, int l2, int c2) {
    return l1 < l2 || (l1 == l2 && c1 <= c2);
  };
  return before_eq(line, col, o.line, o.col) && before_eq(o.end_line, o.end_col, end_line, end_col);
}

int SyntaxTree::subtree_size(int index) const {
  int end = index + 1;
  while (end < static_cast<int>(nodes.size())) {
    int p = nodes[end].parent;
    while (p > index) p = nodes[p].parent;
    if (p != index) break;
    ++end;
  }
  return end - index;
}

std::string SyntaxTree::render_tokens() const {
  std::string out;
  for (const Token &t : tokens) {
    out += t.leading_trivia;
    out += t.text;
  }
  out += trailing_trivia;
  return out;
}

std::vector<int> leaves(const SyntaxTree &tree) {
  std::vector<int> out;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i)
    if (tree.nodes[i].is_leaf() && i != 0) out.push_back(static_cast<int>(i));
  return out;
}

std::string validate(const SyntaxTree &tree) {
  if (tree.nodes.empty()) return "empty tree";
  if (tree.nodes[0].parent != -1) return "root has a parent";
  int next = 1;
  // Preorder: walking children in order must enumerate indices 1..n-1.
  std::vector<int> stack{0};
  std::vector<int> order;
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    order.push_back(n);
    const auto &kids = tree.nodes[n].children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      if (*it <= 0 || *it >= static_cast<int>(tree.nodes.size()))
        return "child index out of range at node " + std::to_string(n);
      stack.push_back(*it);
    }
  }
  if (order.size() != tree.nodes.size()) return "unreachable or shared nodes";
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] != static_cast<int>(i)) return "nodes not in preorder";
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    for (int c : tree.nodes[i].children) {
      if (tree.nodes[c].parent != static_cast<int>(i))
        return "bad parent link at node " + std::to_string(c);
      if (!tree.nodes[i].span.contains(tree.nodes[c].span))
        return "span of node " + std::to_string(c) + " escapes its parent";
    }
    const auto &kids = tree.nodes[i].children;
    for (std::size_t k = 1; k < kids.size(); ++k) {
      const Span &a = tree.nodes[kids[k - 1]].span;
      const Span &b = tree.nodes[kids[k]].span;
      if (a.end_line > b.line || (a.end_line == b.line && a.end_col > b.col))
        return "siblings overlap at node " + std::to_string(i);
    }
  }
  (void)next;
  return {};
}

bool isomorphic_subtrees(const SyntaxTree &a, int ia, const SyntaxTree &b, int ib) {
  const SyntaxNode &x = a.nodes[ia];
  const SyntaxNode &y = b.nodes[ib];
  if (x.kind != y.kind || x.value != y.value || x.children.size() != y.children.size())
    return false;
  for (std::size_t i = 0; i < x.children.size(); ++i)
    if (!isomorphic_subtrees(a, x.children[i], b, y.children[i])) return false;
  return true;
}

bool isomorphic(const SyntaxTree &a, const SyntaxTree &b) {
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const SyntaxNode &x = a.nodes[i];
    const SyntaxNode &y = b.nodes[i];
    if (x.kind != y.kind || x.value != y.value || x.children.size() != y.children.size())
      return false;
    for (std::size_t k = 0; k < x.children.size(); ++k)
      if (x.children[k] != y.children[k]) return false;
  }
  return true;
}

std::string dump(const SyntaxTree &tree) {
  std::string out;
  std::vector<int> depth(tree.nodes.size(), 0);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const SyntaxNode &n = tree.nodes[i];
    if (n.parent >= 0) depth[i] = depth[n.parent] + 1;
    out.append(static_cast<std::size_t>(depth[i]) * 2, ' ');
    out += kind_name(n.kind);
    if (n.value) out += " " + *n.value;
    out += " @" + std::to_string(n.span.line) + ":" + std::to_string(n.span.col);
    out += '\n';
  }
  return out;
}

} // namespace slicefix
