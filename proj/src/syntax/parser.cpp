#include "slicefix/syntax.hpp"

#include <unordered_map>

namespace slicefix {

namespace {

bool is_assignment_operator(std::string_view op) {
  static const std::set<std::string_view> ops = {"=",  "+=",  "-=",  "*=",   "/=",  "%=",
                                                 "**=", "<<=", ">>=", ">>>=", "&=",  "|=",
                                                 "^=", "&&=", "||=", "?\?="};
  return ops.contains(op);
}

int binary_precedence(const Token &tok, bool no_in) {
  static const std::unordered_map<std::string_view, int> table = {
      {"??", 1}, {"||", 2},  {"&&", 3},  {"|", 4},   {"^", 5},    {"&", 6},
      {"==", 7}, {"!=", 7},  {"===", 7}, {"!==", 7}, {"<", 8},    {">", 8},
      {"<=", 8}, {">=", 8},  {"<<", 9},  {">>", 9},  {">>>", 9},  {"+", 10},
      {"-", 10}, {"*", 11},  {"/", 11},  {"%", 11},  {"**", 12},
  };
  if (tok.type == TokenType::Punctuator) {
    auto it = table.find(tok.text);
    return it == table.end() ? 0 : it->second;
  }
  if (tok.type == TokenType::Keyword) {
    if (tok.text == "instanceof") return 8;
    if (tok.text == "in" && !no_in) return 8;
  }
  return 0;
}

class Parser {
public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  SyntaxTree run() {
    Span start = begin();
    std::vector<int> body;
    while (!at_end()) body.push_back(statement());
    int root = arena_.size();
    arena_.push_back(SyntaxNode{Kind::Program, std::nullopt, std::move(body), -1, {}});
    Span span{1, 0, toks_.back().span.end_line, toks_.back().span.end_col};
    (void)start;
    arena_[root].span = span;
    return flatten(root);
  }

private:
  // ---- token helpers -------------------------------------------------
  const Token &cur() const { return toks_[pos_]; }
  const Token &ahead(std::size_t n) const {
    return toks_[std::min(pos_ + n, toks_.size() - 1)];
  }
  bool at_end() const { return cur().type == TokenType::EndOfFile; }
  bool is_punct(std::string_view p) const {
    return cur().type == TokenType::Punctuator && cur().text == p;
  }
  bool is_kw(std::string_view k) const {
    return cur().type == TokenType::Keyword && cur().text == k;
  }
  bool is_ident(std::string_view name) const {
    return cur().type == TokenType::Identifier && cur().text == name;
  }

  [[noreturn]] void fail(const std::string &what) const {
    const Token &t = cur();
    if (t.type == TokenType::EndOfFile)
      throw ParseError(t.span.line, t.span.col, "unexpected end of input, " + what);
    throw ParseError(t.span.line, t.span.col, "unexpected '" + t.text + "', " + what);
  }

  std::size_t consume() {
    last_ = pos_;
    return pos_++;
  }
  void expect(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
    consume();
  }
  void expect_kw(std::string_view k) {
    if (!is_kw(k)) fail("expected '" + std::string(k) + "'");
    consume();
  }

  void semicolon() {
    if (is_punct(";")) {
      consume();
      return;
    }
    if (is_punct("}") || at_end() || cur().newline_before) return;
    fail("expected ';'");
  }

  // ---- node helpers --------------------------------------------------
  Span begin() const { return Span{cur().span.line, cur().span.col, 0, 0}; }
  Span close(Span s) const {
    s.end_line = toks_[last_].span.end_line;
    s.end_col = toks_[last_].span.end_col;
    return s;
  }
  Span start_of(int node) const {
    const Span &s = arena_[node].span;
    return Span{s.line, s.col, 0, 0};
  }

  int make(Kind kind, Span span, std::vector<int> children = {},
           std::optional<std::string> value = std::nullopt) {
    arena_.push_back(SyntaxNode{kind, std::move(value), std::move(children), -1, span});
    return static_cast<int>(arena_.size() - 1);
  }
  int leaf(Kind kind, bool with_value = true) {
    std::size_t i = consume();
    std::optional<std::string> v;
    if (with_value) v = toks_[i].text;
    return make(kind, toks_[i].span, {}, std::move(v));
  }
  int op_leaf() { return leaf(Kind::Operator); }

  // ---- statements ----------------------------------------------------
  int statement() {
    const Token &t = cur();
    if (t.type == TokenType::Punctuator) {
      if (t.text == "{") return block();
      if (t.text == ";") {
        Span s = begin();
        consume();
        return make(Kind::EmptyStatement, close(s));
      }
    }
    if (t.type == TokenType::Keyword) {
      if (t.text == "var" || t.text == "let" || t.text == "const") {
        Span s = begin();
        int decl = declaration(false, s);
        semicolon();
        arena_[decl].span = close(s);
        return decl;
      }
      if (t.text == "function") return function(Kind::FunctionDeclaration, true);
      if (t.text == "return") return return_statement();
      if (t.text == "if") return if_statement();
      if (t.text == "for") return for_statement();
      if (t.text == "while") return while_statement();
      if (t.text == "break" || t.text == "continue") {
        Span s = begin();
        Kind k = t.text == "break" ? Kind::BreakStatement : Kind::ContinueStatement;
        consume();
        semicolon();
        return make(k, close(s));
      }
      if (t.text == "throw") {
        Span s = begin();
        consume();
        if (cur().newline_before) fail("newline after throw");
        int arg = expression();
        semicolon();
        return make(Kind::ThrowStatement, close(s), {arg});
      }
      if (t.text == "import") return import_declaration();
      if (t.text == "export") return export_declaration();
      if (t.text == "class" || t.text == "do" || t.text == "switch" || t.text == "try" ||
          t.text == "with" || t.text == "yield" || t.text == "debugger" || t.text == "else" ||
          t.text == "case" || t.text == "catch" || t.text == "finally" || t.text == "enum")
        fail("statement outside the supported grammar");
    }
    Span s = begin();
    int expr = expression();
    semicolon();
    return make(Kind::ExpressionStatement, close(s), {expr});
  }

  int block() {
    Span s = begin();
    expect("{");
    std::vector<int> body;
    while (!is_punct("}")) {
      if (at_end()) fail("expected '}'");
      body.push_back(statement());
    }
    consume();
    return make(Kind::Block, close(s), std::move(body));
  }

  Kind declaration_kind() const {
    if (cur().text == "var") return Kind::VarDeclaration;
    if (cur().text == "let") return Kind::LetDeclaration;
    return Kind::ConstDeclaration;
  }

  int binding_identifier() {
    if (cur().type != TokenType::Identifier) fail("expected identifier");
    return leaf(Kind::Identifier);
  }

  // Parses `var a = 1, b` (without the terminating semicolon). In for-heads
  // `no_in` stops at `in`; a single bare declarator may be a for-in/of left.
  int declaration(bool no_in, Span s) {
    Kind kind = declaration_kind();
    consume();
    std::vector<int> decls;
    for (;;) {
      Span ds = begin();
      int id = binding_identifier();
      std::vector<int> parts{id};
      if (is_punct("=")) {
        consume();
        parts.push_back(assignment(no_in));
      }
      decls.push_back(make(Kind::VariableDeclarator, close(ds), std::move(parts)));
      if (!is_punct(",")) break;
      consume();
    }
    return make(kind, close(s), std::move(decls));
  }

  int return_statement() {
    Span s = begin();
    consume();
    std::vector<int> kids;
    if (!is_punct(";") && !is_punct("}") && !at_end() && !cur().newline_before)
      kids.push_back(expression());
    semicolon();
    return make(Kind::ReturnStatement, close(s), std::move(kids));
  }

  int if_statement() {
    Span s = begin();
    consume();
    expect("(");
    int test = expression();
    expect(")");
    int cons = statement();
    std::vector<int> kids{test, cons};
    if (is_kw("else")) {
      consume();
      kids.push_back(statement());
    }
    return make(Kind::IfStatement, close(s), std::move(kids));
  }

  int while_statement() {
    Span s = begin();
    consume();
    expect("(");
    int test = expression();
    expect(")");
    int body = statement();
    return make(Kind::WhileStatement, close(s), {test, body});
  }

  int empty_expression() {
    Span s{cur().span.line, cur().span.col, cur().span.line, cur().span.col};
    return make(Kind::EmptyExpression, s);
  }

  int for_statement() {
    Span s = begin();
    consume();
    expect("(");
    int init;
    bool declared = false;
    if (is_punct(";")) {
      init = empty_expression();
    } else if (is_kw("var") || is_kw("let") || is_kw("const")) {
      init = declaration(true, begin());
      declared = true;
    } else {
      init = expression(true);
    }
    if (is_kw("in") || is_ident("of")) {
      Kind kind = is_kw("in") ? Kind::ForInStatement : Kind::ForOfStatement;
      if (declared) {
        const auto &d = arena_[init];
        if (d.children.size() != 1 || arena_[d.children[0]].children.size() != 1)
          fail("invalid for-in/of declaration");
      }
      consume();
      int right = kind == Kind::ForOfStatement ? assignment() : expression();
      expect(")");
      int body = statement();
      return make(kind, close(s), {init, right, body});
    }
    expect(";");
    int test = is_punct(";") ? empty_expression() : expression();
    expect(";");
    int update = is_punct(")") ? empty_expression() : expression();
    expect(")");
    int body = statement();
    return make(Kind::ForStatement, close(s), {init, test, update, body});
  }

  int string_leaf() {
    if (cur().type != TokenType::String) fail("expected module string");
    return leaf(Kind::StringLiteral);
  }

  int import_declaration() {
    Span s = begin();
    consume();
    std::vector<int> kids;
    if (cur().type == TokenType::String) {
      kids.push_back(string_leaf());
      semicolon();
      return make(Kind::ImportDeclaration, close(s), std::move(kids));
    }
    if (cur().type == TokenType::Identifier) {
      Span is = begin();
      int id = leaf(Kind::Identifier);
      kids.push_back(make(Kind::ImportDefaultSpecifier, close(is), {id}));
      if (is_punct(",")) {
        consume();
      }
    }
    if (is_punct("*")) {
      Span is = begin();
      consume();
      if (!is_ident("as")) fail("expected 'as'");
      consume();
      int id = binding_identifier();
      kids.push_back(make(Kind::ImportNamespaceSpecifier, close(is), {id}));
    } else if (is_punct("{")) {
      consume();
      while (!is_punct("}")) {
        Span is = begin();
        if (cur().type != TokenType::Identifier && cur().type != TokenType::Keyword)
          fail("expected import name");
        if (ahead(1).type == TokenType::Identifier && ahead(1).text == "as") {
          int imported = leaf(Kind::PropertyName);
          consume();
          int local = binding_identifier();
          kids.push_back(make(Kind::ImportSpecifier, close(is), {imported, local}));
        } else {
          int local = binding_identifier();
          kids.push_back(make(Kind::ImportSpecifier, close(is), {local}));
        }
        if (!is_punct(",")) break;
        consume();
      }
      expect("}");
    }
    if (!is_ident("from")) fail("expected 'from'");
    consume();
    kids.push_back(string_leaf());
    semicolon();
    return make(Kind::ImportDeclaration, close(s), std::move(kids));
  }

  int export_declaration() {
    Span s = begin();
    consume();
    if (is_kw("default")) {
      consume();
      int inner;
      if (is_kw("function") && ahead(1).type == TokenType::Identifier) {
        inner = function(Kind::FunctionDeclaration, true);
      } else {
        inner = assignment();
        semicolon();
      }
      return make(Kind::ExportDefaultDeclaration, close(s), {inner});
    }
    int inner;
    if (is_kw("var") || is_kw("let") || is_kw("const")) {
      Span ds = begin();
      inner = declaration(false, ds);
      semicolon();
      arena_[inner].span = close(ds);
    } else if (is_kw("function")) {
      inner = function(Kind::FunctionDeclaration, true);
    } else {
      fail("unsupported export form");
    }
    return make(Kind::ExportNamedDeclaration, close(s), {inner});
  }

  // ---- functions -----------------------------------------------------
  int parameters() {
    Span s = begin();
    expect("(");
    std::vector<int> params;
    while (!is_punct(")")) {
      params.push_back(parameter());
      if (!is_punct(",")) break;
      consume();
    }
    expect(")");
    return make(Kind::FormalParameters, close(s), std::move(params));
  }

  int parameter() {
    Span s = begin();
    if (is_punct("...")) {
      consume();
      int id = binding_identifier();
      return make(Kind::RestElement, close(s), {id});
    }
    int id = binding_identifier();
    if (is_punct("=")) {
      int op = op_leaf();
      int init = assignment();
      return make(Kind::AssignmentPattern, close(s), {id, op, init});
    }
    return id;
  }

  int function(Kind kind, bool require_name) {
    Span s = begin();
    expect_kw("function");
    std::vector<int> kids;
    if (cur().type == TokenType::Identifier) {
      kids.push_back(leaf(Kind::Identifier));
    } else if (require_name) {
      fail("expected function name");
    }
    kids.push_back(parameters());
    kids.push_back(block());
    return make(kind, close(s), std::move(kids));
  }

  // ---- expressions ---------------------------------------------------
  int expression(bool no_in = false) { return assignment(no_in); }

  // True if the parenthesised group at the cursor is followed by `=>`.
  bool arrow_ahead() const {
    int depth = 0;
    for (std::size_t i = pos_; i < toks_.size(); ++i) {
      const Token &t = toks_[i];
      if (t.type == TokenType::EndOfFile) return false;
      if (t.type != TokenType::Punctuator) continue;
      if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
      if (t.text == ")" || t.text == "]" || t.text == "}") {
        if (--depth == 0) {
          const Token &n = toks_[std::min(i + 1, toks_.size() - 1)];
          return n.type == TokenType::Punctuator && n.text == "=>";
        }
      }
    }
    return false;
  }

  int arrow_function(bool no_in) {
    Span s = begin();
    int params;
    if (cur().type == TokenType::Identifier) {
      Span ps = begin();
      int id = leaf(Kind::Identifier);
      params = make(Kind::FormalParameters, close(ps), {id});
    } else {
      params = parameters();
    }
    if (cur().newline_before) fail("newline before '=>'");
    expect("=>");
    int body = is_punct("{") ? block() : assignment(no_in);
    return make(Kind::ArrowFunctionExpression, close(s), {params, body});
  }

  int assignment(bool no_in = false) {
    if (cur().type == TokenType::Identifier && ahead(1).type == TokenType::Punctuator &&
        ahead(1).text == "=>")
      return arrow_function(no_in);
    if (is_punct("(") && arrow_ahead()) return arrow_function(no_in);

    Span s = begin();
    int lhs = conditional(no_in);
    if (cur().type == TokenType::Punctuator && is_assignment_operator(cur().text)) {
      Kind k = arena_[lhs].kind;
      if (k != Kind::Identifier && k != Kind::MemberExpression &&
          k != Kind::ComputedMemberExpression)
        fail("invalid assignment target");
      int op = op_leaf();
      int rhs = assignment(no_in);
      return make(Kind::AssignmentExpression, close(s), {lhs, op, rhs});
    }
    return lhs;
  }

  int conditional(bool no_in) {
    Span s = begin();
    int test = binary(1, no_in);
    if (!is_punct("?")) return test;
    consume();
    int cons = assignment();
    expect(":");
    int alt = assignment(no_in);
    return make(Kind::ConditionalExpression, close(s), {test, cons, alt});
  }

  int binary(int min_prec, bool no_in) {
    Span s = begin();
    int left = unary();
    for (;;) {
      int prec = binary_precedence(cur(), no_in);
      if (prec == 0 || prec < min_prec) return left;
      std::string op_text = cur().text;
      Kind kind = (op_text == "&&" || op_text == "||" || op_text == "??")
                      ? Kind::LogicalExpression
                      : Kind::BinaryExpression;
      int op = op_leaf();
      // `**` is right-associative.
      int right = binary(op_text == "**" ? prec : prec + 1, no_in);
      left = make(kind, close(s), {left, op, right});
    }
  }

  int unary() {
    Span s = begin();
    const Token &t = cur();
    bool unary_punct = t.type == TokenType::Punctuator &&
                       (t.text == "!" || t.text == "~" || t.text == "+" || t.text == "-");
    bool unary_kw = t.type == TokenType::Keyword &&
                    (t.text == "typeof" || t.text == "void" || t.text == "delete" ||
                     t.text == "await");
    if (unary_punct || unary_kw) {
      int op = op_leaf();
      int arg = unary();
      return make(Kind::UnaryExpression, close(s), {op, arg});
    }
    if (t.type == TokenType::Punctuator && (t.text == "++" || t.text == "--")) {
      int op = op_leaf();
      int arg = unary();
      check_update_target(arg);
      return make(Kind::UpdateExpression, close(s), {op, arg});
    }
    int expr = call_member();
    if (cur().type == TokenType::Punctuator && (cur().text == "++" || cur().text == "--") &&
        !cur().newline_before) {
      check_update_target(expr);
      int op = op_leaf();
      return make(Kind::UpdateExpression, close(s), {expr, op});
    }
    return expr;
  }

  void check_update_target(int node) const {
    Kind k = arena_[node].kind;
    if (k != Kind::Identifier && k != Kind::MemberExpression && k != Kind::ComputedMemberExpression)
      fail("invalid update target");
  }

  int property_name() {
    if (cur().type != TokenType::Identifier && cur().type != TokenType::Keyword)
      fail("expected property name");
    return leaf(Kind::PropertyName);
  }

  std::vector<int> arguments() {
    expect("(");
    std::vector<int> args;
    while (!is_punct(")")) {
      if (is_punct("...")) {
        Span s = begin();
        consume();
        int e = assignment();
        args.push_back(make(Kind::SpreadElement, close(s), {e}));
      } else {
        args.push_back(assignment());
      }
      if (!is_punct(",")) break;
      consume();
    }
    expect(")");
    return args;
  }

  int call_member() {
    Span s = begin();
    int expr;
    if (is_kw("new")) {
      consume();
      int callee = member_only();
      std::vector<int> kids{callee};
      if (is_punct("(")) {
        auto args = arguments();
        kids.insert(kids.end(), args.begin(), args.end());
      }
      expr = make(Kind::NewExpression, close(s), std::move(kids));
    } else {
      expr = primary();
    }
    for (;;) {
      if (is_punct(".")) {
        consume();
        int prop = property_name();
        expr = make(Kind::MemberExpression, close(s), {expr, prop});
      } else if (is_punct("[") && !cur().newline_before) {
        consume();
        int index = expression();
        expect("]");
        expr = make(Kind::ComputedMemberExpression, close(s), {expr, index});
      } else if (is_punct("(") && !cur().newline_before) {
        auto args = arguments();
        std::vector<int> kids{expr};
        kids.insert(kids.end(), args.begin(), args.end());
        expr = make(Kind::CallExpression, close(s), std::move(kids));
      } else if (is_punct("?.")) {
        fail("optional chaining is outside the supported grammar");
      } else {
        return expr;
      }
    }
  }

  // Callee of `new`: member accesses without calls.
  int member_only() {
    Span s = begin();
    int expr;
    if (is_kw("new")) {
      consume();
      int callee = member_only();
      std::vector<int> kids{callee};
      if (is_punct("(")) {
        auto args = arguments();
        kids.insert(kids.end(), args.begin(), args.end());
      }
      expr = make(Kind::NewExpression, close(s), std::move(kids));
    } else {
      expr = primary();
    }
    for (;;) {
      if (is_punct(".")) {
        consume();
        int prop = property_name();
        expr = make(Kind::MemberExpression, close(s), {expr, prop});
      } else if (is_punct("[")) {
        consume();
        int index = expression();
        expect("]");
        expr = make(Kind::ComputedMemberExpression, close(s), {expr, index});
      } else {
        return expr;
      }
    }
  }

  int primary() {
    const Token &t = cur();
    switch (t.type) {
    case TokenType::Identifier:
      return leaf(Kind::Identifier);
    case TokenType::Number:
      return leaf(Kind::NumericLiteral);
    case TokenType::String:
      return leaf(Kind::StringLiteral);
    case TokenType::Template:
      return leaf(Kind::TemplateLiteral);
    case TokenType::Keyword:
      if (t.text == "this") return leaf(Kind::ThisExpression, false);
      if (t.text == "true" || t.text == "false") return leaf(Kind::BooleanLiteral);
      if (t.text == "null") return leaf(Kind::NullLiteral, false);
      if (t.text == "function") return function(Kind::FunctionExpression, false);
      fail("expected expression");
    case TokenType::Punctuator:
      if (t.text == "(") {
        consume();
        int inner = expression();
        expect(")");
        return inner;
      }
      if (t.text == "[") return array_literal();
      if (t.text == "{") return object_literal();
      fail("expected expression");
    case TokenType::EndOfFile:
      fail("expected expression");
    }
    fail("expected expression");
  }

  int array_literal() {
    Span s = begin();
    expect("[");
    std::vector<int> elems;
    while (!is_punct("]")) {
      if (is_punct("...")) {
        Span es = begin();
        consume();
        int e = assignment();
        elems.push_back(make(Kind::SpreadElement, close(es), {e}));
      } else {
        elems.push_back(assignment());
      }
      if (!is_punct(",")) break;
      consume();
    }
    expect("]");
    return make(Kind::ArrayExpression, close(s), std::move(elems));
  }

  int object_literal() {
    Span s = begin();
    expect("{");
    std::vector<int> props;
    while (!is_punct("}")) {
      props.push_back(object_member());
      if (!is_punct(",")) break;
      consume();
    }
    expect("}");
    return make(Kind::ObjectExpression, close(s), std::move(props));
  }

  int object_member() {
    Span s = begin();
    if (is_punct("...")) {
      consume();
      int e = assignment();
      return make(Kind::SpreadElement, close(s), {e});
    }
    const Token &t = cur();
    bool ident_key = t.type == TokenType::Identifier || t.type == TokenType::Keyword;
    if (ident_key && ahead(1).type == TokenType::Punctuator &&
        (ahead(1).text == "," || ahead(1).text == "}")) {
      if (t.type != TokenType::Identifier) fail("invalid shorthand property");
      int id = leaf(Kind::Identifier);
      return make(Kind::ShorthandProperty, close(s), {id});
    }
    int key;
    if (ident_key) {
      key = leaf(Kind::PropertyName);
    } else if (t.type == TokenType::String) {
      key = leaf(Kind::StringLiteral);
    } else if (t.type == TokenType::Number) {
      key = leaf(Kind::NumericLiteral);
    } else {
      fail("expected property key");
    }
    if (is_punct("(")) {
      int params = parameters();
      int body = block();
      return make(Kind::MethodProperty, close(s), {key, params, body});
    }
    expect(":");
    int value = assignment();
    return make(Kind::Property, close(s), {key, value});
  }

  // ---- preorder flattening ---------------------------------------------
  SyntaxTree flatten(int root) {
    SyntaxTree tree;
    tree.nodes.reserve(arena_.size());
    std::vector<std::pair<int, int>> stack{{root, -1}};
    while (!stack.empty()) {
      auto [old, parent] = stack.back();
      stack.pop_back();
      int idx = static_cast<int>(tree.nodes.size());
      SyntaxNode n = arena_[old];
      n.parent = parent;
      std::vector<int> old_children = std::move(n.children);
      n.children.clear();
      tree.nodes.push_back(std::move(n));
      if (parent >= 0) tree.nodes[parent].children.push_back(idx);
      for (auto it = old_children.rbegin(); it != old_children.rend(); ++it)
        stack.emplace_back(*it, idx);
    }
    return tree;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t last_ = 0;
  std::vector<SyntaxNode> arena_;
};

} // namespace

SyntaxTree parse(std::string_view text) {
  std::vector<Token> tokens = tokenize(text);
  SyntaxTree tree = Parser(tokens).run();
  tree.trailing_trivia = tokens.back().leading_trivia;
  tokens.pop_back();
  tree.tokens = std::move(tokens);
  SourceFile src = SourceFile::from_text("", std::string(text));
  tree.source_lines = std::move(src.lines);
  return tree;
}

SyntaxTree parse(const SourceFile &source) {
  SyntaxTree tree = parse(std::string_view(source.content));
  return tree;
}

} // namespace slicefix
