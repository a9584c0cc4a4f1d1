#include <doctest.h>

#include <algorithm>
#include <random>

#include "slicefix/graph.hpp"
#include "support/io.hpp"
#include "support/program_gen.hpp"

using namespace slicefix;

namespace {

int count_edges(const CodeGraph &g, EdgeType t) {
  return static_cast<int>(std::count_if(g.edges.begin(), g.edges.end(),
                                        [&](const GraphEdge &e) { return e.type == t; }));
}

Vocabulary vocab_over(const std::vector<std::string> &sources, int K) {
  std::vector<SyntaxTree> trees;
  for (const auto &s : sources) trees.push_back(parse(s));
  std::vector<const SyntaxTree *> ptrs;
  for (const auto &t : trees) ptrs.push_back(&t);
  return build_vocab_from_trees(ptrs, ptrs, K);
}

std::vector<Datapoint> fixture_points() {
  auto res = filter_pairs(load_pair_directory(testsupport::fixture_path("corpus")));
  auto pts = dedup(res.kept);
  attach_slices(pts, true, true);
  return pts;
}

} // namespace

TEST_CASE("graph of a binary expression") {
  SyntaxTree t = parse("a + b;");
  Vocabulary v = vocab_over({"a + b;"}, 10);
  CodeGraph g = build_graph(t, v);
  CHECK(leaves(t).size() == 3);
  CHECK(count_edges(g, EdgeType::SuccToken) == 2);
  CHECK(count_edges(g, EdgeType::ValueLink) == 3);
  CHECK(g.size() == static_cast<int>(t.size()) + 3);
  CHECK(count_edges(g, EdgeType::AstChild) == static_cast<int>(t.size()) - 1);
  for (int i = 0; i < g.syntax_nodes; ++i) CHECK_FALSE(g.nodes[i].value_id.has_value());
}

TEST_CASE("out-of-vocabulary lexemes map to UNKNOWN") {
  Vocabulary v = vocab_over({"a;"}, 10);
  CodeGraph g = build_graph(parse("zzz;"), v);
  int value_nodes = 0;
  for (const auto &n : g.nodes) {
    if (!n.value_id) continue;
    ++value_nodes;
    CHECK(*n.value_id == Vocabulary::kUnknownValue);
  }
  CHECK(value_nodes == 1);
}

TEST_CASE("vocabulary ranking") {
  Vocabulary v = vocab_over({"item; item;\nitem; object;"}, 1);
  CHECK(v.values == std::vector<std::string>{"<UNKNOWN>", "item"});
  CHECK(v.value_id("object") == Vocabulary::kUnknownValue);
  // Ties are broken lexicographically.
  Vocabulary tie = vocab_over({"b; a; c;"}, 2);
  CHECK(tie.values == std::vector<std::string>{"<UNKNOWN>", "a", "b"});
  Vocabulary none = build_vocab_from_trees({}, {}, 5000);
  CHECK(none.values == std::vector<std::string>{"<UNKNOWN>"});
  CHECK(Vocabulary::from_json(v.to_json()).values == v.values);
  CHECK(Vocabulary::from_json(v.to_json()).hash() == v.hash());
}

TEST_CASE("dual vocabulary picks up fix-side lexemes") {
  Datapoint dp;
  dp.id = "cart";
  dp.buggy_source = "let cart = [];\nlet item = 5;\nlet object = 7;\ncart.push(object);\n";
  dp.fixed_source = "let cart = [];\nlet item = 5;\nlet object = 7;\ncart.push(item);\n";
  auto d = ast_diff(parse(dp.buggy_source), parse(dp.fixed_source));
  REQUIRE(d.status == DiffStatus::OneNode);
  dp.buggy_line = d.result->buggy_line;
  dp.fixed_line = d.result->fixed_line;
  dp.edit = d.result->edit;
  std::vector<Datapoint> pts{dp};
  attach_slices(pts, true, true);
  Vocabulary single = build_vocab(pts, 5000, SliceMode::Single);
  Vocabulary dual = build_vocab(pts, 5000, SliceMode::Dual);
  CHECK(single.value_id("item") == Vocabulary::kUnknownValue);
  CHECK(dual.value_id("item") != Vocabulary::kUnknownValue);

  auto ss = make_sample(pts[0], SliceMode::Single, single);
  auto ds = make_sample(pts[0], SliceMode::Dual, dual);
  REQUIRE(ss);
  REQUIRE(ds);
  CHECK(ss->gold.op == EditOp::RepVal);
  CHECK(ss->gold.value_id == Vocabulary::kUnknownValue);
  CHECK(ds->gold.value_id == dual.value_id("item"));
}

TEST_CASE("indexing the motivating edit") {
  SyntaxTree b = parse(testsupport::read_fixture("motivating/buggy.js"));
  SyntaxTree f = parse(testsupport::read_fixture("motivating/fixed.js"));
  auto d = ast_diff(b, f);
  REQUIRE(d.status == DiffStatus::OneNode);
  Datapoint dp;
  dp.id = "motivating";
  dp.buggy_source = testsupport::read_fixture("motivating/buggy.js");
  dp.fixed_source = testsupport::read_fixture("motivating/fixed.js");
  dp.buggy_line = d.result->buggy_line;
  dp.fixed_line = d.result->fixed_line;
  dp.edit = d.result->edit;
  std::vector<Datapoint> pts{dp};
  attach_slices(pts, true, true);
  Vocabulary v = build_vocab(pts, 5000, SliceMode::Dual);
  auto s = make_sample(pts[0], SliceMode::Dual, v);
  REQUIRE(s);
  CHECK(s->gold.op == EditOp::AddNode);
  REQUIRE(s->gold.value_id.has_value());
  CHECK(*s->gold.value_id == v.value_id("user"));
  CHECK(*s->gold.value_id != Vocabulary::kUnknownValue);
  CHECK(edit_valid(s->gold, s->graph, v));

  // The sliced graphs of Listings 3 and 4 agree away from the criterion line.
  SyntaxTree l3 = parse(testsupport::read_fixture("motivating/listing3.js"));
  SyntaxTree l4 = parse(testsupport::read_fixture("motivating/listing4.js"));
  CodeGraph g3 = build_graph(l3, v), g4 = build_graph(l4, v);
  auto off_line = [](const SyntaxTree &t, const CodeGraph &g) {
    std::vector<std::pair<int, std::optional<int>>> out;
    for (int i = 0; i < g.syntax_nodes; ++i) {
      const Span &sp = t.nodes[i].span;
      if (sp.line != sp.end_line || sp.line == 11) continue;
      std::optional<int> val;
      if (g.value_node[i] >= 0) val = g.nodes[g.value_node[i]].value_id;
      out.push_back({g.nodes[i].kind_id, val});
    }
    return out;
  };
  CHECK(off_line(l3, g3) == off_line(l4, g4));
  CHECK(g4.size() == g3.size() + 2); // one identifier and its value node
}

TEST_CASE("edit indexing corner cases") {
  Vocabulary v = vocab_over({"kittens.pop(name);"}, 10);
  SyntaxTree t = parse("kittens.pop(name);");
  CodeGraph g = build_graph(t, v);
  auto d = ast_diff(t, parse("kittens.pop();"));
  REQUIRE(d.result);
  IndexedEdit del = index_edit(d.result->edit, g, v);
  CHECK(del.op == EditOp::DelNode);
  CHECK_FALSE(del.value_id.has_value());
  CHECK(edit_valid(del, g, v));

  auto rv = ast_diff(t, parse("kittens.pop(other);"));
  IndexedEdit r = index_edit(rv.result->edit, g, v);
  CHECK(r.value_id == Vocabulary::kUnknownValue);
  CHECK(edit_valid(r, g, v));

  GraphEdit far{EditOp::DelNode, 500, -1, {}, {}};
  CHECK_THROWS_AS(index_edit(far, g, v), std::out_of_range);
  // Value nodes are not edit locations.
  GraphEdit on_value{EditOp::DelNode, g.syntax_nodes, -1, {}, {}};
  CHECK_THROWS_AS(index_edit(on_value, g, v), std::out_of_range);
}

TEST_CASE("property: graphs mirror their trees") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 100; ++round) {
    auto prog = testsupport::generate_program(rng, 12);
    SyntaxTree t = parse(prog.source);
    Vocabulary v = vocab_over({prog.source}, 5000);
    CodeGraph g = build_graph(t, v);
    int values = 0;
    for (const auto &n : t.nodes) values += n.value.has_value();
    CHECK(g.size() == static_cast<int>(t.size()) + values);
    int nleaves = static_cast<int>(leaves(t).size());
    CHECK(count_edges(g, EdgeType::SuccToken) == std::max(0, nleaves - 1));
    auto rt = graph_tree(g);
    for (int i = 0; i < g.syntax_nodes; ++i) {
      CHECK(rt[i].children == t.nodes[i].children);
      CHECK(v.kinds[rt[i].kind_id] == kind_name(t.nodes[i].kind));
      if (t.nodes[i].value) CHECK(v.values[*rt[i].value_id] == *t.nodes[i].value);
    }
    CHECK(build_graph(t, v).to_json() == g.to_json());
  }
}

TEST_CASE("fixture corpus samples and vocabulary monotonicity") {
  auto pts = fixture_points();
  Vocabulary single = build_vocab(pts, 5000, SliceMode::Single);
  Vocabulary dual = build_vocab(pts, 5000, SliceMode::Dual);
  for (const auto &val : single.values)
    CHECK(std::find(dual.values.begin(), dual.values.end(), val) != dual.values.end());
  for (SliceMode mode : {SliceMode::Single, SliceMode::Dual, SliceMode::None}) {
    Vocabulary v = build_vocab(pts, 5000, mode);
    auto samples = make_samples(pts, mode, v);
    CHECK(samples.size() == pts.size());
    for (const auto &s : samples) {
      CAPTURE(s.id);
      CHECK(edit_valid(s.gold, s.graph, v));
    }
  }
}
