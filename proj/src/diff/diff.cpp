#include "slicefix/diff.hpp"

#include <functional>
#include <stdexcept>

namespace slicefix {

namespace {

constexpr std::string_view kOpNames[] = {"ADD_NODE", "DEL_NODE", "REP_TYPE", "REP_VAL"};

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h * 0xff51afd7ed558ccdULL;
}

std::vector<std::uint64_t> subtree_hashes(const SyntaxTree &t) {
  std::vector<std::uint64_t> h(t.nodes.size());
  for (int i = static_cast<int>(t.nodes.size()) - 1; i >= 0; --i) {
    const SyntaxNode &n = t.nodes[i];
    std::uint64_t x = mix(0x1234, static_cast<std::uint64_t>(n.kind) + 1);
    x = mix(x, n.value ? std::hash<std::string>{}(*n.value) + 1 : 0);
    x = mix(x, n.children.size());
    for (int c : n.children) x = mix(x, h[c]);
    h[i] = x;
  }
  return h;
}

bool same_label(const SyntaxNode &a, const SyntaxNode &b) {
  return a.kind == b.kind && a.value == b.value;
}

struct Insertion {
  int parent = -1; // index in the smaller tree
  int slot = -1;   // child slot in the larger tree's parent
  int leaf = -1;   // index of the extra leaf in the larger tree
};

// Locates the leaf whose insertion into `small` yields `large`, choosing the
// smallest slot when identical siblings make several slots equivalent.
std::optional<Insertion> find_insertion(const SyntaxTree &small, const std::vector<std::uint64_t> &hs,
                                        const SyntaxTree &large, const std::vector<std::uint64_t> &hl) {
  int s = 0, l = 0;
  for (;;) {
    const SyntaxNode &a = small.nodes[s];
    const SyntaxNode &b = large.nodes[l];
    if (!same_label(a, b)) return std::nullopt;
    const auto &ca = a.children;
    const auto &cb = b.children;
    if (cb.size() == ca.size()) {
      int differing = -1;
      for (std::size_t k = 0; k < ca.size(); ++k) {
        if (hs[ca[k]] != hl[cb[k]]) {
          if (differing >= 0) return std::nullopt;
          differing = static_cast<int>(k);
        }
      }
      if (differing < 0) return std::nullopt;
      s = ca[differing];
      l = cb[differing];
      continue;
    }
    if (cb.size() != ca.size() + 1) return std::nullopt;
    // Prefix match length p and suffix match length q; the slot must lie in
    // [n - q, p] where n = ca.size().
    std::size_t p = 0;
    while (p < ca.size() && hs[ca[p]] == hl[cb[p]]) ++p;
    std::size_t q = 0;
    while (q < ca.size() && hs[ca[ca.size() - 1 - q]] == hl[cb[cb.size() - 1 - q]]) ++q;
    std::size_t lo = ca.size() - q;
    if (lo > p) return std::nullopt;
    for (std::size_t slot = lo; slot <= p; ++slot) {
      if (large.nodes[cb[slot]].is_leaf())
        return Insertion{s, static_cast<int>(slot), cb[slot]};
    }
    return std::nullopt;
  }
}

// Line of the sibling next to a slot in `parent`, used to anchor the side
// of an insertion/deletion that has no node of its own.
int anchor_line(const SyntaxTree &t, int parent, int slot) {
  const auto &others = t.nodes[parent].children;
  if (slot > 0 && slot - 1 < static_cast<int>(others.size()))
    return t.nodes[others[slot - 1]].span.end_line;
  if (slot < static_cast<int>(others.size())) return t.nodes[others[slot]].span.line;
  return t.nodes[parent].span.line;
}

void copy_edited(const SyntaxTree &src, int i, SyntaxTree &dst, int parent, const GraphEdit &e) {
  int idx = static_cast<int>(dst.nodes.size());
  SyntaxNode n = src.nodes[i];
  n.parent = parent;
  std::vector<int> kids = std::move(n.children);
  n.children.clear();
  if (i == e.location) {
    if (e.op == EditOp::RepType) n.kind = *kind_from_name(*e.kind_label);
    if (e.op == EditOp::RepVal) n.value = e.value_token;
  }
  dst.nodes.push_back(std::move(n));
  if (parent >= 0) dst.nodes[parent].children.push_back(idx);

  auto add_leaf = [&](std::size_t slot) {
    Span at = dst.nodes[idx].span;
    if (slot > 0) {
      const Span &prev = src.nodes[kids[slot - 1]].span;
      at = Span{prev.end_line, prev.end_col, prev.end_line, prev.end_col};
    } else {
      at.end_line = at.line;
      at.end_col = at.col;
    }
    int leaf = static_cast<int>(dst.nodes.size());
    dst.nodes.push_back(SyntaxNode{*kind_from_name(*e.kind_label), e.value_token, {}, idx, at});
    dst.nodes[idx].children.push_back(leaf);
  };

  for (std::size_t k = 0; k < kids.size(); ++k) {
    if (e.op == EditOp::AddNode && i == e.location && static_cast<int>(k) == e.position) add_leaf(k);
    if (e.op == EditOp::DelNode && kids[k] == e.location) continue;
    copy_edited(src, kids[k], dst, idx, e);
  }
  if (e.op == EditOp::AddNode && i == e.location && e.position == static_cast<int>(kids.size()))
    add_leaf(kids.size());
}

} // namespace

std::string_view op_name(EditOp op) { return kOpNames[static_cast<int>(op)]; }

std::optional<EditOp> op_from_name(std::string_view name) {
  for (int i = 0; i < kEditOpCount; ++i)
    if (kOpNames[i] == name) return static_cast<EditOp>(i);
  return std::nullopt;
}

std::string GraphEdit::check_fields() const {
  switch (op) {
  case EditOp::AddNode: {
    if (!kind_label) return "ADD_NODE needs kind_label";
    auto k = kind_from_name(*kind_label);
    if (!k) return "unknown kind " + *kind_label;
    if (kind_has_value(*k) != value_token.has_value())
      return "ADD_NODE value_token must match the kind";
    if (position < 0) return "ADD_NODE needs a position";
    return {};
  }
  case EditOp::DelNode:
    if (kind_label || value_token || position >= 0) return "DEL_NODE carries no fields";
    return {};
  case EditOp::RepType:
    if (!kind_label || !kind_from_name(*kind_label)) return "REP_TYPE needs a known kind_label";
    if (value_token || position >= 0) return "REP_TYPE carries only kind_label";
    return {};
  case EditOp::RepVal:
    if (!value_token) return "REP_VAL needs value_token";
    if (kind_label || position >= 0) return "REP_VAL carries only value_token";
    return {};
  }
  return "unknown op";
}

std::string edit_problem(const SyntaxTree &tree, const GraphEdit &e) {
  std::string fields = e.check_fields();
  if (!fields.empty()) return fields;
  if (e.location < 0 || e.location >= static_cast<int>(tree.nodes.size()))
    return "location " + std::to_string(e.location) + " outside tree";
  const SyntaxNode &n = tree.nodes[e.location];
  switch (e.op) {
  case EditOp::AddNode:
    if (e.position > static_cast<int>(n.children.size())) return "position outside child list";
    return {};
  case EditOp::DelNode:
    if (e.location == 0) return "cannot delete the root";
    if (!n.is_leaf()) return "DEL_NODE target is not a leaf";
    return {};
  case EditOp::RepType: {
    Kind k = *kind_from_name(*e.kind_label);
    if (k == n.kind) return "REP_TYPE keeps the kind";
    if (n.value.has_value() && !kind_has_value(k))
      return "REP_TYPE would drop the value";
    if (!n.value.has_value() && kind_has_value(k)) return "REP_TYPE would need a value";
    return {};
  }
  case EditOp::RepVal:
    if (!kind_has_value(n.kind)) return "REP_VAL on a node without value";
    if (n.value == e.value_token) return "REP_VAL keeps the value";
    return {};
  }
  return "unknown op";
}

SyntaxTree apply_edit(const SyntaxTree &tree, const GraphEdit &edit) {
  std::string problem = edit_problem(tree, edit);
  if (!problem.empty()) throw std::invalid_argument(problem);
  SyntaxTree out;
  out.nodes.reserve(tree.nodes.size() + 1);
  copy_edited(tree, 0, out, -1, edit);
  return out;
}

DiffOutcome ast_diff(const SyntaxTree &buggy, const SyntaxTree &fixed) {
  DiffOutcome out;
  const std::size_t nb = buggy.nodes.size(), nf = fixed.nodes.size();
  if (nb == nf) {
    int differing = -1;
    for (std::size_t i = 0; i < nb; ++i) {
      const SyntaxNode &a = buggy.nodes[i];
      const SyntaxNode &b = fixed.nodes[i];
      if (a.children != b.children) return out; // shapes differ
      if (!same_label(a, b)) {
        if (differing >= 0) return out;
        differing = static_cast<int>(i);
      }
    }
    if (differing < 0) {
      out.status = DiffStatus::NoDifference;
      return out;
    }
    const SyntaxNode &a = buggy.nodes[differing];
    const SyntaxNode &b = fixed.nodes[differing];
    GraphEdit e;
    e.location = differing;
    if (a.kind != b.kind && a.value == b.value) {
      e.op = EditOp::RepType;
      e.kind_label = std::string(kind_name(b.kind));
    } else if (a.kind == b.kind && kind_has_value(a.kind) && b.value) {
      e.op = EditOp::RepVal;
      e.value_token = b.value;
    } else {
      return out;
    }
    if (!edit_problem(buggy, e).empty()) return out;
    out.status = DiffStatus::OneNode;
    out.result = DiffResult{e, a.span.line, b.span.line};
    return out;
  }

  bool added = nf == nb + 1;
  if (!added && nb != nf + 1) return out;
  const SyntaxTree &small = added ? buggy : fixed;
  const SyntaxTree &large = added ? fixed : buggy;
  auto hs = subtree_hashes(small);
  auto hl = subtree_hashes(large);
  auto ins = find_insertion(small, hs, large, hl);
  if (!ins) return out;
  const SyntaxNode &leaf = large.nodes[ins->leaf];
  GraphEdit e;
  DiffResult r;
  if (added) {
    e.op = EditOp::AddNode;
    e.location = ins->parent;
    e.position = ins->slot;
    e.kind_label = std::string(kind_name(leaf.kind));
    if (kind_has_value(leaf.kind)) e.value_token = leaf.value;
    r.fixed_line = leaf.span.line;
    r.buggy_line = anchor_line(buggy, ins->parent, ins->slot);
  } else {
    e.op = EditOp::DelNode;
    e.location = ins->leaf;
    r.buggy_line = leaf.span.line;
    r.fixed_line = anchor_line(fixed, ins->parent, ins->slot);
  }
  if (!edit_problem(buggy, e).empty()) return out;
  // Hashes steer the search; the verdict is confirmed structurally.
  if (!isomorphic(apply_edit(buggy, e), fixed)) return out;
  r.edit = e;
  out.status = DiffStatus::OneNode;
  out.result = r;
  return out;
}

bool is_one_node(const SyntaxTree &buggy, const SyntaxTree &fixed) {
  return ast_diff(buggy, fixed).status == DiffStatus::OneNode;
}

} // namespace slicefix
