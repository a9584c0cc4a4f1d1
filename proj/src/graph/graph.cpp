#include "slicefix/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace slicefix {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kEdgeNames[] = {"AstChild", "SuccToken", "ValueLink"};
constexpr std::string_view kModeNames[] = {"single", "dual", "none"};

std::optional<Kind> vocab_kind(const Vocabulary &v, int id) {
  if (id < 2 || id >= v.kind_count()) return std::nullopt;
  return kind_from_name(v.kinds[static_cast<std::size_t>(id)]);
}

} // namespace

std::string_view edge_type_name(EdgeType t) { return kEdgeNames[static_cast<int>(t)]; }

int Vocabulary::kind_id(std::string_view label) const {
  auto it = kind_index_.find(label);
  return it == kind_index_.end() ? kUnknownKind : it->second;
}

int Vocabulary::value_id(std::string_view lexeme) const {
  auto it = value_index_.find(lexeme);
  return it == value_index_.end() ? kUnknownValue : it->second;
}

void Vocabulary::reindex() {
  kind_index_.clear();
  value_index_.clear();
  for (std::size_t i = 0; i < kinds.size(); ++i) kind_index_[kinds[i]] = static_cast<int>(i);
  // The UNKNOWN slot is not a lexeme.
  for (std::size_t i = 1; i < values.size(); ++i) value_index_[values[i]] = static_cast<int>(i);
}

std::string Vocabulary::to_json() const {
  Json j;
  j["kinds"] = kinds;
  j["values"] = values;
  j["K"] = K;
  return j.dump();
}

Vocabulary Vocabulary::from_json(const std::string &text) {
  Json j = Json::parse(text);
  Vocabulary v;
  v.kinds = j.at("kinds").get<std::vector<std::string>>();
  v.values = j.at("values").get<std::vector<std::string>>();
  v.K = j.at("K").get<int>();
  if (v.kinds.size() < 2 || v.values.empty()) throw std::invalid_argument("vocabulary lacks reserved entries");
  v.reindex();
  return v;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : to_json()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Vocabulary empty_vocabulary(int K) {
  Vocabulary v;
  v.K = K;
  v.kinds = {"<unk>", "<value>"};
  v.values = {"<UNKNOWN>"};
  v.reindex();
  return v;
}

Vocabulary build_vocab_from_trees(const std::vector<const SyntaxTree *> &value_sources,
                                  const std::vector<const SyntaxTree *> &kind_sources, int K) {
  if (K < 0) throw std::invalid_argument("K must be non-negative");
  Vocabulary v = empty_vocabulary(K);
  std::unordered_map<std::string, long> counts;
  for (const SyntaxTree *t : value_sources)
    for (const auto &n : t->nodes)
      if (n.value) ++counts[*n.value];
  std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (static_cast<int>(ranked.size()) > K) ranked.resize(static_cast<std::size_t>(K));
  for (auto &[lexeme, _] : ranked) v.values.push_back(lexeme);

  std::vector<bool> seen(kKindCount, false);
  for (const SyntaxTree *t : kind_sources)
    for (const auto &n : t->nodes) seen[static_cast<int>(n.kind)] = true;
  for (int k = 0; k < kKindCount; ++k)
    if (seen[k]) v.kinds.emplace_back(kind_name(static_cast<Kind>(k)));
  v.reindex();
  return v;
}

std::string CodeGraph::to_json() const {
  Json j;
  j["syntax_nodes"] = syntax_nodes;
  Json ns = Json::array();
  for (const auto &n : nodes) {
    Json o;
    o["kind"] = n.kind_id;
    if (n.value_id) o["value"] = *n.value_id;
    ns.push_back(o);
  }
  j["nodes"] = ns;
  Json es = Json::array();
  for (const auto &e : edges) es.push_back(Json::array({e.src, e.dst, edge_type_name(e.type)}));
  j["edges"] = es;
  return j.dump();
}

CodeGraph build_graph(const SyntaxTree &tree, const Vocabulary &vocab) {
  CodeGraph g;
  const int n = static_cast<int>(tree.nodes.size());
  g.syntax_nodes = n;
  g.child_count.resize(n);
  g.has_value.resize(n);
  g.value_node.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const SyntaxNode &s = tree.nodes[i];
    g.nodes.push_back(GraphNode{vocab.kind_id(kind_name(s.kind)), std::nullopt});
    g.child_count[i] = static_cast<int>(s.children.size());
    g.has_value[i] = s.value.has_value();
    for (int c : s.children) g.edges.push_back(GraphEdge{i, c, EdgeType::AstChild});
  }
  std::vector<int> ls = leaves(tree);
  for (std::size_t k = 1; k < ls.size(); ++k)
    g.edges.push_back(GraphEdge{ls[k - 1], ls[k], EdgeType::SuccToken});
  for (int i = 0; i < n; ++i) {
    const SyntaxNode &s = tree.nodes[i];
    if (!s.value) continue;
    int v = static_cast<int>(g.nodes.size());
    g.nodes.push_back(GraphNode{Vocabulary::kValueKind, vocab.value_id(*s.value)});
    g.value_node[i] = v;
    g.edges.push_back(GraphEdge{i, v, EdgeType::ValueLink});
  }
  return g;
}

std::vector<GraphTreeNode> graph_tree(const CodeGraph &g) {
  std::vector<GraphTreeNode> out(static_cast<std::size_t>(g.syntax_nodes));
  for (int i = 0; i < g.syntax_nodes; ++i) out[i].kind_id = g.nodes[i].kind_id;
  for (const auto &e : g.edges) {
    if (e.type == EdgeType::AstChild) out[e.src].children.push_back(e.dst);
    if (e.type == EdgeType::ValueLink) out[e.src].value_id = g.nodes[e.dst].value_id;
  }
  return out;
}

IndexedEdit index_edit(const GraphEdit &edit, const CodeGraph &graph, const Vocabulary &vocab) {
  if (edit.location < 0 || edit.location >= graph.syntax_nodes)
    throw std::out_of_range("edit location " + std::to_string(edit.location) + " outside graph of " +
                            std::to_string(graph.syntax_nodes) + " syntax nodes");
  IndexedEdit e;
  e.op = edit.op;
  e.location = edit.location;
  e.position = edit.position;
  if (edit.kind_label) e.kind_id = vocab.kind_id(*edit.kind_label);
  if (edit.value_token) e.value_id = vocab.value_id(*edit.value_token);
  return e;
}

bool edit_valid(const IndexedEdit &e, const CodeGraph &g, const Vocabulary &vocab) {
  if (e.location < 0 || e.location >= g.syntax_nodes) return false;
  const int loc = e.location;
  switch (e.op) {
  case EditOp::AddNode: {
    if (!e.kind_id) return false;
    auto k = vocab_kind(vocab, *e.kind_id);
    if (!k || kind_has_value(*k) != e.value_id.has_value()) return false;
    return e.position <= g.child_count[loc];
  }
  case EditOp::DelNode:
    return loc != 0 && g.child_count[loc] == 0 && !e.kind_id && !e.value_id;
  case EditOp::RepType: {
    if (!e.kind_id || e.value_id) return false;
    auto k = vocab_kind(vocab, *e.kind_id);
    return k && *e.kind_id != g.nodes[loc].kind_id && kind_has_value(*k) == (g.has_value[loc] != 0);
  }
  case EditOp::RepVal: {
    if (!g.has_value[loc] || !e.value_id || e.kind_id) return false;
    int current = *g.nodes[g.value_node[loc]].value_id;
    return *e.value_id != current || current == Vocabulary::kUnknownValue;
  }
  }
  return false;
}

std::string_view slice_mode_name(SliceMode m) { return kModeNames[static_cast<int>(m)]; }

std::optional<SliceMode> slice_mode_from_name(std::string_view name) {
  for (int i = 0; i < 3; ++i)
    if (kModeNames[i] == name) return static_cast<SliceMode>(i);
  return std::nullopt;
}

std::vector<std::string> vocab_sources(const Datapoint &dp, SliceMode mode) {
  switch (mode) {
  case SliceMode::Single:
    if (dp.sliced_single) return {dp.sliced_single->buggy};
    return {};
  case SliceMode::Dual:
    if (dp.sliced_dual) return {dp.sliced_dual->buggy, dp.sliced_dual->fixed};
    return {};
  case SliceMode::None:
    return {dp.buggy_source};
  }
  return {};
}

Vocabulary build_vocab(const std::vector<Datapoint> &train, int K, SliceMode mode) {
  std::vector<SyntaxTree> trees;
  std::vector<SyntaxTree> fixed;
  for (const auto &dp : train) {
    for (const auto &src : vocab_sources(dp, mode)) {
      try {
        trees.push_back(parse(src));
      } catch (const ParseError &) {
      }
    }
    // Kinds also come from the fix side so that gold kind labels exist.
    std::string fix_side = mode == SliceMode::None  ? dp.fixed_source
                           : mode == SliceMode::Dual ? (dp.sliced_dual ? dp.sliced_dual->fixed : "")
                           : (dp.sliced_single ? dp.sliced_single->fixed : "");
    try {
      fixed.push_back(parse(fix_side));
    } catch (const ParseError &) {
    }
  }
  std::vector<const SyntaxTree *> values, kinds;
  for (const auto &t : trees) {
    values.push_back(&t);
    kinds.push_back(&t);
  }
  for (const auto &t : fixed) kinds.push_back(&t);
  return build_vocab_from_trees(values, kinds, K);
}

std::optional<Sample> make_sample(const Datapoint &dp, SliceMode mode, const Vocabulary &vocab) {
  Sample s;
  s.id = dp.id;
  try {
    SyntaxTree input;
    if (mode == SliceMode::None) {
      input = buggy_tree(dp);
      s.edit = dp.edit;
    } else {
      // The edit on the sliced buggy tree comes from the single-sliced pair,
      // whose fixed side is the same context around the fixed lines. The
      // buggy side of both slicing modes is the same slice.
      if (!dp.sliced_single) return std::nullopt;
      const SlicedPair *side = mode == SliceMode::Single ? &*dp.sliced_single
                               : dp.sliced_dual          ? &*dp.sliced_dual
                                                         : nullptr;
      if (!side) return std::nullopt;
      input = parse(side->buggy);
      auto d = ast_diff(input, parse(dp.sliced_single->fixed));
      if (d.status != DiffStatus::OneNode) return std::nullopt;
      s.edit = d.result->edit;
    }
    s.graph = build_graph(input, vocab);
    s.gold = index_edit(s.edit, s.graph, vocab);
  } catch (const std::exception &) {
    return std::nullopt;
  }
  return s;
}

std::vector<Sample> make_samples(const std::vector<Datapoint> &points, SliceMode mode,
                                 const Vocabulary &vocab) {
  std::vector<std::optional<Sample>> slots(points.size());
  const int n = static_cast<int>(points.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) slots[i] = make_sample(points[i], mode, vocab);
  std::vector<Sample> out;
  for (auto &s : slots)
    if (s) out.push_back(std::move(*s));
  return out;
}

} // namespace slicefix
