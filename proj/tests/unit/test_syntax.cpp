#include <doctest.h>

#include <random>

#include "slicefix/syntax.hpp"
#include "support/io.hpp"
#include "support/program_gen.hpp"

using namespace slicefix;
using testsupport::read_fixture;

namespace {

std::vector<std::string> leaf_values(const SyntaxTree &t) {
  std::vector<std::string> out;
  for (int i : leaves(t)) out.push_back(t.node(i).value.value_or(std::string(kind_name(t.node(i).kind))));
  return out;
}

int count_kind(const SyntaxTree &t, Kind k) {
  int n = 0;
  for (const auto &node : t.nodes) n += node.kind == k;
  return n;
}

} // namespace

TEST_CASE("const declaration shape") {
  SyntaxTree t = parse("const x = 1;");
  CHECK(validate(t).empty());
  CHECK(count_kind(t, Kind::ConstDeclaration) == 1);
  CHECK(leaf_values(t) == std::vector<std::string>{"x", "1"});
  CHECK(t.node(leaves(t)[0]).kind == Kind::Identifier);
  CHECK(t.node(leaves(t)[1]).kind == Kind::NumericLiteral);
}

TEST_CASE("unclosed function is a parse error on line 1") {
  try {
    parse("function (");
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 1);
  }
}

TEST_CASE("parse errors report positions inside the file") {
  for (const char *src : {"let = ;", "a(\n", "x = 'abc", "if (a {}", "a +* b;", "class A {}",
                          "var [a] = b;", "x = /re/;"}) {
    CAPTURE(src);
    try {
      parse(src);
      FAIL("expected ParseError");
    } catch (const ParseError &e) {
      SourceFile f = SourceFile::from_text("", src);
      CHECK(e.line() >= 1);
      CHECK(e.line() <= std::max<int>(1, static_cast<int>(f.line_count()) + 1));
    }
  }
}

TEST_CASE("leaves in source order") {
  CHECK(leaf_values(parse("a + b")) == std::vector<std::string>{"a", "+", "b"});
  CHECK(leaves(parse("")).empty());
  auto sum = leaf_values(parse("sum(a, b);"));
  CHECK(sum == std::vector<std::string>{"sum", "a", "b"});
}

TEST_CASE("declaration keyword lives in the kind") {
  CHECK(count_kind(parse("var a = 1;"), Kind::VarDeclaration) == 1);
  CHECK(count_kind(parse("let a = 1;"), Kind::LetDeclaration) == 1);
  CHECK(count_kind(parse("for (const k in o) {}"), Kind::ForInStatement) == 1);
  CHECK(count_kind(parse("for (const k of o) {}"), Kind::ForOfStatement) == 1);
}

TEST_CASE("newline ends a complete statement") {
  SyntaxTree t = parse("let a = 1\nlet b = a\nb = b +\n  2\nfoo()\n(bar)");
  CHECK(count_kind(t, Kind::LetDeclaration) == 2);
  // `b +` continues onto the next line; `(bar)` starts a new statement.
  CHECK(count_kind(t, Kind::BinaryExpression) == 1);
  CHECK(count_kind(t, Kind::ExpressionStatement) == 3);
  SyntaxTree r = parse("function f() {\n  return\n  1\n}");
  CHECK(count_kind(r, Kind::ReturnStatement) == 1);
  CHECK(r.node(1).kind == Kind::FunctionDeclaration);
}

TEST_CASE("operators are value-bearing leaves") {
  SyntaxTree t = parse("x += -y * z++;");
  std::vector<std::string> ops;
  for (const auto &n : t.nodes)
    if (n.kind == Kind::Operator) ops.push_back(*n.value);
  CHECK(ops == std::vector<std::string>{"+=", "-", "*", "++"});
}

TEST_CASE("motivating example parses") {
  SyntaxTree t = parse(SourceFile::from_text("buggy.js", read_fixture("motivating/buggy.js")));
  CHECK(validate(t).empty());
  CHECK(t.source_lines.size() == 66);
  CHECK(t.node(t.node(0).children.back()).kind == Kind::ExportDefaultDeclaration);
}

TEST_CASE("token stream and trivia reproduce the source") {
  std::string src = read_fixture("motivating/buggy.js");
  SyntaxTree t = parse(src);
  CHECK(t.render_tokens() == src);
  std::string odd = "/* lead */ a /*mid*/ = b // tail\n\n";
  CHECK(parse(odd).render_tokens() == odd);
}

TEST_CASE("every leaf span covers exactly one token") {
  SyntaxTree t = parse(read_fixture("estree/constructs.js"));
  std::set<std::pair<int, int>> token_starts;
  for (const Token &tok : t.tokens) token_starts.insert({tok.span.line, tok.span.col});
  for (int i : leaves(t)) {
    const SyntaxNode &n = t.node(i);
    if (n.kind == Kind::EmptyExpression) continue;
    CHECK(token_starts.contains({n.span.line, n.span.col}));
    if (n.value) {
      const Token *match = nullptr;
      for (const Token &tok : t.tokens)
        if (tok.span == n.span) match = &tok;
      REQUIRE(match != nullptr);
      CHECK(match->text == *n.value);
    }
  }
}

TEST_CASE("source file lines") {
  SourceFile f = SourceFile::from_text("p", "a\nb\n");
  CHECK(f.line_count() == 2);
  CHECK(f.line(1) == "a");
  CHECK_THROWS_AS(f.line(0), std::out_of_range);
  SourceFile g = SourceFile::from_text("p", "a\n\nc");
  CHECK(g.line_count() == 3);
  CHECK(g.line(2).empty());
}

TEST_CASE("estree ingestion matches the parser") {
  for (const char *name : {"const_x", "motivating", "constructs"}) {
    CAPTURE(name);
    SyntaxTree a = parse(read_fixture(std::string("estree/") + name + ".js"));
    SyntaxTree b = ingest_estree(read_fixture(std::string("estree/") + name + ".json"));
    CHECK(validate(b).empty());
    if (!isomorphic(a, b)) {
      MESSAGE(dump(a));
      MESSAGE(dump(b));
    }
    CHECK(isomorphic(a, b));
  }
}

TEST_CASE("estree without loc is rejected") {
  CHECK_THROWS_AS(ingest_estree(R"({"type":"Program","body":[]})"), ParseError);
  CHECK_THROWS_AS(ingest_estree("not json"), ParseError);
}

TEST_CASE("unknown estree types become Foreign nodes") {
  const char *doc = R"({"type":"Program","loc":{"start":{"line":1,"column":0},"end":{"line":1,"column":20}},
    "body":[{"type":"ClassDeclaration","loc":{"start":{"line":1,"column":0},"end":{"line":1,"column":20}},
      "id":{"type":"Identifier","name":"A","loc":{"start":{"line":1,"column":6},"end":{"line":1,"column":7}}},
      "body":{"type":"ClassBody","body":[],"loc":{"start":{"line":1,"column":8},"end":{"line":1,"column":20}}}}]})";
  SyntaxTree t = ingest_estree(doc);
  CHECK(validate(t).empty());
  CHECK(t.node(1).kind == Kind::Foreign);
  CHECK(t.node(1).value == "ClassDeclaration");
  CHECK(t.node(1).children.size() == 2);
  CHECK(t.node(2).value == "A");
}

TEST_CASE("estree with escaping child span is rejected") {
  const char *doc = R"({"type":"Program","loc":{"start":{"line":1,"column":0},"end":{"line":1,"column":3}},
    "body":[{"type":"EmptyStatement","loc":{"start":{"line":2,"column":0},"end":{"line":2,"column":1}}}]})";
  CHECK_THROWS_AS(ingest_estree(doc), ParseError);
}

TEST_CASE("reconstruct single line") {
  SyntaxTree t = parse("x = 1;");
  CHECK(reconstruct_statements(t, {1}) == "x = 1;\n");
}

TEST_CASE("reconstruct adds enclosing header and terminator") {
  SyntaxTree t = parse("let c = 1;\nif (c) {\n  x = 1;\n}\ny = 2;\n");
  std::string out = reconstruct_statements(t, {3});
  CHECK(out == "if (c) {\n  x = 1;\n}\n");
  CHECK_NOTHROW(parse(out));
}

TEST_CASE("reconstruct the sliced buggy file of the motivating example") {
  SyntaxTree t = parse(read_fixture("motivating/buggy.js"));
  std::string out = reconstruct_statements(t, {3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 14});
  CHECK(testsupport::squash(out) == testsupport::squash(read_fixture("motivating/listing3.js")));
  CHECK(SourceFile::from_text("", out).line_count() == 12);
}

TEST_CASE("property: random programs keep span nesting and reconstruct") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 300; ++round) {
    testsupport::GeneratedProgram prog = testsupport::generate_program(rng, 15);
    CAPTURE(prog.source);
    SyntaxTree t = parse(prog.source);
    REQUIRE(validate(t).empty());
    CHECK(t.render_tokens() == prog.source);
    int n = static_cast<int>(t.source_lines.size());
    std::uniform_int_distribution<int> pick(1, n);
    std::set<int> ctx{pick(rng), pick(rng)};
    std::string out = reconstruct_statements(t, ctx);
    SourceFile f = SourceFile::from_text("", out);
    CHECK(static_cast<int>(f.line_count()) <= n);
    std::set<int> closed = complete_closures(t, ctx);
    for (int l : ctx) CHECK(closed.contains(l));
    CHECK(closed.size() == f.line_count());
  }
}
