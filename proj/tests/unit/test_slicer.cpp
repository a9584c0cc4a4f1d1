#include <doctest.h>

#include <algorithm>

#include "slicefix/slicer.hpp"
#include "support/io.hpp"
#include "support/program_gen.hpp"
#include "support/slice_oracle.hpp"

using namespace slicefix;
using testsupport::read_fixture;
using testsupport::squash;

namespace {

std::set<std::pair<std::string, EntityKind>> named(const std::set<Entity> &es) {
  std::set<std::pair<std::string, EntityKind>> out;
  for (const auto &e : es) out.insert({e.name, e.kind});
  return out;
}

std::set<int> range(int a, int b) {
  std::set<int> out;
  for (int i = a; i <= b; ++i) out.insert(i);
  return out;
}

// Binding that the n-th occurrence of `name` (in preorder) resolves to.
int binding_at(const SyntaxTree &t, const ReferenceIndex &idx, const std::string &name, int nth) {
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    if (t.nodes[i].kind == Kind::Identifier && t.nodes[i].value == name && nth-- == 0)
      return idx.binding_of_node[i];
  }
  return -2;
}

struct Motivating {
  SyntaxTree buggy = parse(read_fixture("motivating/buggy.js"));
  SyntaxTree fixed = parse(read_fixture("motivating/fixed.js"));
  DiffResult diff = *ast_diff(buggy, fixed).result;
};

} // namespace

TEST_CASE("entities of the motivating buggy line") {
  Motivating m;
  auto es = get_entities(m.buggy, 14);
  CHECK(named(es) == std::set<std::pair<std::string, EntityKind>>{
                         {"service", EntityKind::Function},
                         {"currentUser", EntityKind::ObjectProperty}});
  for (const auto &e : es) {
    REQUIRE(e.declaration_site.has_value());
    if (e.name == "service") CHECK(e.declaration_site->first == 5);
    if (e.name == "currentUser") CHECK(e.declaration_site->first == 14);
  }
}

TEST_CASE("entities of simple lines") {
  SyntaxTree t = parse("let cart = [];\nlet item = 1;\n\ncart.push(item);\nconst z = cart.length + q;\n");
  auto push = get_entities(t, 4);
  CHECK(named(push) == std::set<std::pair<std::string, EntityKind>>{
                           {"cart", EntityKind::Variable}, {"item", EntityKind::Variable}});
  CHECK(get_entities(t, 3).empty());
  // The declared name is excluded, the initialiser's names are kept, and
  // `length` is a property access rather than an entity.
  auto decl = get_entities(t, 5);
  CHECK(named(decl) == std::set<std::pair<std::string, EntityKind>>{
                           {"cart", EntityKind::Variable}, {"q", EntityKind::Variable}});
  for (const auto &e : decl)
    if (e.name == "q") CHECK_FALSE(e.declaration_site.has_value());
}

TEST_CASE("scoping") {
  SUBCASE("function body sees outer var") {
    SyntaxTree t = parse("var a=1; function f(){ return a; }");
    auto idx = resolve_references(t);
    CHECK(binding_at(t, idx, "a", 0) == binding_at(t, idx, "a", 1));
  }
  SUBCASE("block shadowing") {
    SyntaxTree t = parse("let x=1; { let x=2; y=x; }");
    auto idx = resolve_references(t);
    int outer = binding_at(t, idx, "x", 0);
    int inner = binding_at(t, idx, "x", 1);
    CHECK(outer != inner);
    CHECK(binding_at(t, idx, "x", 2) == inner);
  }
  SUBCASE("var hoisting") {
    SyntaxTree t = parse("g(v);\nif (c) { var v = 2; }\n");
    auto idx = resolve_references(t);
    CHECK(binding_at(t, idx, "v", 0) == binding_at(t, idx, "v", 1));
    CHECK(idx.bindings[binding_at(t, idx, "v", 0)].decl_node >= 0);
  }
  SUBCASE("let stays in its block") {
    SyntaxTree t = parse("g(v);\nif (c) { let v = 2; }\n");
    auto idx = resolve_references(t);
    CHECK(binding_at(t, idx, "v", 0) != binding_at(t, idx, "v", 1));
    CHECK(idx.bindings[binding_at(t, idx, "v", 0)].decl_node == -1);
  }
  SUBCASE("function declarations are hoisted") {
    SyntaxTree t = parse("h();\nfunction h() {}\n");
    auto idx = resolve_references(t);
    int b = binding_at(t, idx, "h", 0);
    CHECK(idx.bindings[b].kind == EntityKind::Function);
    CHECK(b == binding_at(t, idx, "h", 1));
  }
  SUBCASE("parameters shadow globals") {
    SyntaxTree t = parse("const user = 1;\nfunction s(user) { return user; }\n");
    auto idx = resolve_references(t);
    CHECK(binding_at(t, idx, "user", 0) != binding_at(t, idx, "user", 2));
    CHECK(binding_at(t, idx, "user", 1) == binding_at(t, idx, "user", 2));
  }
  SUBCASE("this.x resolves inside the object literal") {
    SyntaxTree t = parse("const o = {\n  n: 1,\n  inc() { this.n += 1; },\n};\n");
    auto idx = resolve_references(t);
    int key = -1, member = -1;
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      if (t.nodes[i].kind == Kind::PropertyName && t.nodes[i].value == "n") {
        if (key < 0) key = static_cast<int>(i);
        else member = static_cast<int>(i);
      }
    }
    REQUIRE(member > 0);
    CHECK(idx.binding_of_node[key] == idx.binding_of_node[member]);
    const Reference &r = idx.refs[idx.binding_of_node[member]][idx.ref_of_node[member]];
    CHECK(r.kind == RefKind::Mutation);
  }
}

TEST_CASE("reference kinds") {
  SyntaxTree t = parse("a = 1;\nb += 1;\nc++;\nd.push(1);\nf(e);\ng.h = 2;\ndelete k.m;\nn.map(x);\n");
  auto idx = resolve_references(t);
  auto kind_of = [&](const char *name) {
    int b = binding_at(t, idx, name, 0);
    return idx.refs[b][0].kind;
  };
  CHECK(kind_of("a") == RefKind::Definition);
  CHECK(kind_of("b") == RefKind::Mutation);
  CHECK(kind_of("c") == RefKind::Mutation);
  CHECK(kind_of("d") == RefKind::Mutation);
  CHECK(kind_of("f") == RefKind::Call);
  CHECK(kind_of("e") == RefKind::Use);
  CHECK(kind_of("g") == RefKind::Mutation);
  CHECK(kind_of("k") == RefKind::Mutation);
  CHECK(kind_of("n") == RefKind::Use);
}

TEST_CASE("backward slice basics") {
  CHECK(backward_slice(parse("x = 1;\n"), 1).context_lines == std::set<int>{1});
  SyntaxTree chain = parse("a=1;\nb=a;\nc=b;\n");
  CHECK(backward_slice(chain, 3).context_lines == range(1, 3));
  CHECK(backward_slice(chain, 2).context_lines == range(1, 2));
  CHECK_THROWS_AS(backward_slice(chain, 0), std::out_of_range);
  CHECK_THROWS_AS(backward_slice(chain, 4), std::out_of_range);

  // A later definition does not feed an earlier use outside loops.
  SyntaxTree later = parse("a = 1;\nlog(a);\na = 2;\n");
  CHECK(backward_slice(later, 2).context_lines == range(1, 2));
  // Inside a loop it does.
  SyntaxTree loop = parse("let a = 0;\nwhile (a < 3) {\n  log(a);\n  a = a + 1;\n}\n");
  auto s = backward_slice(loop, 3);
  CHECK(s.context_lines == range(1, 4));
  CHECK(s.used_control_flow);
  CHECK_FALSE(backward_slice(chain, 3).used_control_flow);
}

TEST_CASE("motivating example: single and dual slices") {
  Motivating m;
  CHECK(m.diff.buggy_line == 14);
  CHECK(m.diff.fixed_line == 14);
  ContextSlice s = slice_with_fallback(m.buggy, 14);
  CHECK_FALSE(s.used_fallback);
  CHECK(s.context_lines == std::set<int>{3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 14});

  SlicedPair single = single_slice(m.buggy, m.fixed, m.diff);
  CHECK(single.buggy == read_fixture("motivating/listing3.js"));
  CHECK(squash(single.fixed) == squash(read_fixture("motivating/listing4.js")));
  CHECK(std::count(single.buggy.begin(), single.buggy.end(), '\n') == 12);

  SlicedPair dual = dual_slice(m.buggy, m.fixed, m.diff);
  CHECK(dual.buggy == single.buggy);
  CHECK(squash(dual.fixed) == squash(read_fixture("motivating/listing6.js")));
  CHECK(dual.fixed.find("const user = get('currentUser.user');") != std::string::npos);
  CHECK(single.fixed.find("const user") == std::string::npos);
}

TEST_CASE("whole-file fallback") {
  const char *src = "function greet() {\n  let n = 1;\n  n = n + 1;\n  return \"foo\";\n}\n";
  SyntaxTree t = parse(src);
  ContextSlice s = slice_with_fallback(t, 4);
  CHECK(s.criterion.entities.empty());
  CHECK(s.used_fallback);
  CHECK(s.context_lines == range(1, 5));
  CHECK_FALSE(backward_slice(t, 4).used_fallback);

  ContextSlice one = slice_with_fallback(parse("\"foo\";\n"), 1);
  CHECK(one.used_fallback);
  CHECK(one.context_lines == std::set<int>{1});

  Motivating m;
  CHECK_FALSE(slice_with_fallback(m.buggy, 14).used_fallback);
}

TEST_CASE("dual slice picks up the replacement identifier") {
  const char *buggy = "let cart = [];\nlet item = 5;\nlet object = 7;\nlog(cart);\ncart.push(object);\n";
  const char *fixed = "let cart = [];\nlet item = 5;\nlet object = 7;\nlog(cart);\ncart.push(item);\n";
  SyntaxTree b = parse(buggy), f = parse(fixed);
  auto d = ast_diff(b, f);
  REQUIRE(d.status == DiffStatus::OneNode);
  SlicedPair dual = dual_slice(b, f, *d.result);
  CHECK(dual.fixed_slice.context_lines.contains(2));
  CHECK_FALSE(dual.buggy_slice.context_lines.contains(2));
  CHECK(dual.buggy_slice.context_lines.contains(3));
  SlicedPair single = single_slice(b, f, *d.result);
  CHECK(single.fixed.find("let item") == std::string::npos);
  CHECK(single.fixed.find("cart.push(item);") != std::string::npos);
}

TEST_CASE("single slice keeps context when the fix touches the same names") {
  SyntaxTree b = parse("a=1;\nb=a;\nc=b;\n");
  SyntaxTree f = parse("a=1;\nb=a;\nc=a;\n");
  auto d = ast_diff(b, f);
  REQUIRE(d.status == DiffStatus::OneNode);
  SlicedPair p = single_slice(b, f, *d.result);
  CHECK(p.buggy_slice.context_lines == p.fixed_slice.context_lines);
  CHECK(p.fixed == "a=1;\nb=a;\nc=a;\n");
}

TEST_CASE("property: slicer matches the dependence oracle on generated programs") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int round = 0; round < 250; ++round) {
    auto prog = testsupport::generate_program(rng, 10);
    SyntaxTree t = parse(prog.source);
    auto idx = resolve_references(t);
    testsupport::SliceOracle oracle(prog);
    for (int line = 1; line <= prog.line_count(); ++line) {
      auto want = oracle.slice(line);
      ContextSlice got = slice_with_fallback(t, line);
      CAPTURE(prog.source);
      CAPTURE(line);
      CHECK(got.context_lines == want.context);
      CHECK(complete_closures(t, got.context_lines) == want.closed);
      CHECK(got.used_fallback == want.fallback);
      CHECK(got.used_control_flow == want.control);
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("property: slices are subsets that contain the criterion and reparse") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 100; ++round) {
    auto prog = testsupport::generate_program(rng, 12);
    SyntaxTree t = parse(prog.source);
    for (int line = 1; line <= prog.line_count(); ++line) {
      ContextSlice s = slice_with_fallback(t, line);
      CHECK(s.context_lines.contains(line));
      CHECK(static_cast<int>(s.context_lines.size()) <= prog.line_count());
      CHECK(s.context_lines == slice_with_fallback(t, line).context_lines);
      CHECK_NOTHROW(reconstruct_statements(t, s.context_lines));
    }
  }
}
