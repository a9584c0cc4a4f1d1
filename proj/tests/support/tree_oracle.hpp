// Nested-tree reference model for single-node edits. Edits are enumerated
// exhaustively, so it is only usable on small trees.
#pragma once

#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "slicefix/diff.hpp"
#include "slicefix/syntax.hpp"

namespace testsupport {

struct NTree {
  slicefix::Kind kind = slicefix::Kind::Program;
  std::optional<std::string> value;
  std::vector<NTree> kids;

  friend bool operator==(const NTree &, const NTree &) = default;

  int size() const {
    int n = 1;
    for (const auto &k : kids) n += k.size();
    return n;
  }
};

inline NTree to_nested(const slicefix::SyntaxTree &t, int i = 0) {
  NTree n{t.nodes[i].kind, t.nodes[i].value, {}};
  for (int c : t.nodes[i].children) n.kids.push_back(to_nested(t, c));
  return n;
}

inline void flatten_into(const NTree &n, slicefix::SyntaxTree &t, int parent) {
  int idx = static_cast<int>(t.nodes.size());
  t.nodes.push_back(slicefix::SyntaxNode{n.kind, n.value, {}, parent, {1, 0, 1, 0}});
  if (parent >= 0) t.nodes[parent].children.push_back(idx);
  for (const auto &k : n.kids) flatten_into(k, t, idx);
}

inline slicefix::SyntaxTree to_tree(const NTree &n) {
  slicefix::SyntaxTree t;
  flatten_into(n, t, -1);
  return t;
}

struct OracleEdit {
  slicefix::GraphEdit edit;
  NTree result;
};

// Every single edit of `base` whose labels are drawn from `labels_from`.
inline std::vector<OracleEdit> enumerate_edits(const NTree &base, const NTree &labels_from) {
  using slicefix::EditOp;
  using slicefix::Kind;
  std::set<Kind> kinds;
  std::set<std::string> values;
  std::set<std::pair<Kind, std::optional<std::string>>> leaf_labels;
  std::vector<const NTree *> stack{&labels_from};
  while (!stack.empty()) {
    const NTree *n = stack.back();
    stack.pop_back();
    kinds.insert(n->kind);
    if (n->value) values.insert(*n->value);
    if (n->kids.empty()) leaf_labels.insert({n->kind, n->value});
    for (const auto &k : n->kids) stack.push_back(&k);
  }

  std::vector<OracleEdit> out;
  // Walk in preorder, carrying the preorder index and a mutable path copy.
  int counter = 0;
  std::vector<int> path;
  auto node_at = [](NTree &root, const std::vector<int> &p) -> NTree & {
    NTree *n = &root;
    for (int i : p) n = &n->kids[static_cast<std::size_t>(i)];
    return *n;
  };
  std::vector<std::pair<std::vector<int>, int>> order;
  std::vector<std::vector<int>> todo{{}};
  while (!todo.empty()) {
    std::vector<int> p = todo.back();
    todo.pop_back();
    order.emplace_back(p, counter++);
    NTree copy = base;
    const NTree &n = node_at(copy, p);
    for (int k = static_cast<int>(n.kids.size()) - 1; k >= 0; --k) {
      auto q = p;
      q.push_back(k);
      todo.push_back(q);
    }
  }
  for (const auto &[p, index] : order) {
    NTree probe = base;
    const NTree &n = node_at(probe, p);
    for (Kind k : kinds) {
      if (k == n.kind) continue;
      if (n.value.has_value() != slicefix::kind_has_value(k)) continue;
      NTree r = base;
      node_at(r, p).kind = k;
      slicefix::GraphEdit e{EditOp::RepType, index, -1, std::string(slicefix::kind_name(k)), {}};
      out.push_back({e, r});
    }
    if (slicefix::kind_has_value(n.kind)) {
      for (const auto &v : values) {
        if (n.value == v) continue;
        NTree r = base;
        node_at(r, p).value = v;
        out.push_back({slicefix::GraphEdit{EditOp::RepVal, index, -1, {}, v}, r});
      }
    }
    if (!p.empty() && n.kids.empty()) {
      NTree r = base;
      auto parent_path = p;
      parent_path.pop_back();
      auto &siblings = node_at(r, parent_path).kids;
      siblings.erase(siblings.begin() + p.back());
      out.push_back({slicefix::GraphEdit{EditOp::DelNode, index, -1, {}, {}}, r});
    }
    for (std::size_t slot = 0; slot <= n.kids.size(); ++slot) {
      for (const auto &[k, v] : leaf_labels) {
        if (slicefix::kind_has_value(k) != v.has_value()) continue;
        NTree r = base;
        auto &kids = node_at(r, p).kids;
        kids.insert(kids.begin() + static_cast<long>(slot), NTree{k, v, {}});
        slicefix::GraphEdit e{EditOp::AddNode, index, static_cast<int>(slot),
                              std::string(slicefix::kind_name(k)), v};
        out.push_back({e, r});
      }
    }
  }
  return out;
}

// Canonical order: location, then op, then position.
inline std::optional<slicefix::GraphEdit> oracle_diff(const NTree &buggy, const NTree &fixed) {
  std::optional<slicefix::GraphEdit> best;
  for (const auto &cand : enumerate_edits(buggy, fixed)) {
    if (!(cand.result == fixed)) continue;
    const auto &e = cand.edit;
    auto key = [](const slicefix::GraphEdit &g) {
      return std::make_tuple(g.location, static_cast<int>(g.op), g.position);
    };
    if (!best || key(e) < key(*best)) best = e;
  }
  return best;
}

inline NTree random_ntree(std::mt19937_64 &rng, int max_nodes) {
  using slicefix::Kind;
  auto roll = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  static const Kind internals[] = {Kind::CallExpression, Kind::BinaryExpression, Kind::Block,
                                   Kind::ExpressionStatement, Kind::ArrayExpression};
  static const char *idents[] = {"a", "b", "c"};
  static const char *ops[] = {"+", "-"};
  NTree root{Kind::Program, std::nullopt, {}};
  int budget = roll(1, max_nodes - 1);
  // Grow breadth-first-ish; pointers stay valid because each vector is
  // reserved before children are appended.
  std::vector<NTree *> frontier{&root};
  root.kids.reserve(static_cast<std::size_t>(max_nodes));
  while (budget > 0) {
    NTree *parent = frontier[static_cast<std::size_t>(roll(0, static_cast<int>(frontier.size()) - 1))];
    NTree child;
    int r = roll(0, 9);
    if (r < 3) {
      child = {internals[roll(0, 4)], std::nullopt, {}};
    } else if (r < 7) {
      child = {Kind::Identifier, std::string(idents[roll(0, 2)]), {}};
    } else if (r < 8) {
      child = {Kind::Operator, std::string(ops[roll(0, 1)]), {}};
    } else if (r < 9) {
      child = {Kind::ThisExpression, std::nullopt, {}};
    } else {
      child = {Kind::NullLiteral, std::nullopt, {}};
    }
    bool internal = !child.value && r < 3;
    parent->kids.push_back(std::move(child));
    if (internal) {
      NTree *added = &parent->kids.back();
      added->kids.reserve(static_cast<std::size_t>(max_nodes));
      frontier.push_back(added);
    }
    --budget;
  }
  return root;
}

} // namespace testsupport
