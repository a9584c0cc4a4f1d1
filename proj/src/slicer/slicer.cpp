#include "slicefix/slicer.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace slicefix {

namespace {

bool is_function_node(Kind k) {
  return k == Kind::FunctionDeclaration || k == Kind::FunctionExpression ||
         k == Kind::ArrowFunctionExpression || k == Kind::MethodProperty;
}

bool is_loop(Kind k) {
  return k == Kind::ForStatement || k == Kind::ForInStatement || k == Kind::ForOfStatement ||
         k == Kind::WhileStatement;
}

bool is_control(Kind k) { return k == Kind::IfStatement || is_loop(k); }

bool criterion_excluded(EntityKind k) {
  return k == EntityKind::Variable || k == EntityKind::Function || k == EntityKind::Parameter ||
         k == EntityKind::ImportBinding;
}

class Slicer {
public:
  Slicer(const SyntaxTree &t, const ReferenceIndex &idx) : t_(t), idx_(idx) {
    const int n = static_cast<int>(t.nodes.size());
    end_.assign(n, 0);
    for (int i = n - 1; i >= 0; --i) {
      end_[i] = i + 1;
      if (!t.nodes[i].children.empty()) end_[i] = end_[t.nodes[i].children.back()];
    }
    for (int i = 1; i < n; ++i)
      if (t.nodes[i].span.line < t.nodes[i].span.end_line) multi_line_.push_back(i);
  }

  std::vector<int> occurrences(int line, bool criterion) const {
    std::vector<int> out;
    if (line < 0 || line >= static_cast<int>(idx_.nodes_on_line.size())) return out;
    for (int n : idx_.nodes_on_line[line]) {
      int b = idx_.binding_of_node[n];
      const Reference &r = idx_.refs[b][idx_.ref_of_node[n]];
      const Binding &bind = idx_.bindings[b];
      if (r.declaration) {
        if (criterion && criterion_excluded(bind.kind)) continue;
        if (!criterion && bind.function_valued) continue;
      }
      out.push_back(n);
    }
    return out;
  }

  std::set<int> run(int criterion) {
    criterion_ = criterion;
    context_.insert(criterion);
    pending_.push_back(criterion);
    for (int n : occurrences(criterion, true)) queue_.push_back(n);
    while (!pending_.empty() || !queue_.empty()) {
      while (!pending_.empty()) {
        int line = pending_.front();
        pending_.pop_front();
        if (line != criterion_)
          for (int n : occurrences(line, false)) queue_.push_back(n);
        for (int h : headers(line)) add_line(h);
      }
      if (!queue_.empty()) {
        int n = queue_.front();
        queue_.pop_front();
        follow(n);
      }
    }
    return context_;
  }

  bool used_control_flow(const std::set<int> &lines) const {
    for (int i : multi_line_) {
      const SyntaxNode &n = t_.nodes[i];
      if (!is_control(n.kind)) continue;
      auto it = lines.upper_bound(n.span.line);
      if (it != lines.end() && *it <= n.span.end_line) return true;
    }
    return false;
  }

private:
  bool inside(int node, int ancestor) const { return ancestor <= node && node < end_[ancestor]; }

  int enclosing_function(int n) const {
    const SyntaxNode &nd = t_.nodes[n];
    int a = nd.parent;
    // A function's own name belongs to the surrounding code.
    if (a >= 0 && t_.nodes[a].kind == Kind::FunctionDeclaration && t_.nodes[a].children[0] == n)
      a = t_.nodes[a].parent;
    for (; a >= 0; a = t_.nodes[a].parent)
      if (is_function_node(t_.nodes[a].kind)) return a;
    return -1;
  }

  std::vector<int> headers(int line) const {
    std::vector<int> out;
    for (int i : multi_line_) {
      const Span &s = t_.nodes[i].span;
      if (s.line < line && line <= s.end_line) out.push_back(s.line);
    }
    return out;
  }

  void add_line(int line) {
    if (context_.insert(line).second) pending_.push_back(line);
  }

  // Adds the lines of every reference of the occurrence's binding that the
  // occurrence can depend on.
  void follow(int use) {
    int b = idx_.binding_of_node[use];
    int line = t_.nodes[use].span.line;
    if (!visited_.insert({b, line}).second) return;
    const Binding &bind = idx_.bindings[b];
    int fn = enclosing_function(use);
    int home = bind.kind == EntityKind::ObjectProperty ? bind.owner : bind.decl_node;
    bool declared_outside = fn >= 0 && (home < 0 || !inside(home, fn));
    for (const Reference &r : idx_.refs[b]) {
      bool take = r.declaration;
      if (!take && (r.kind == RefKind::Definition || r.kind == RefKind::Mutation)) {
        take = r.line < line || declared_outside || shares_loop(r.node, use);
      }
      if (!take) continue;
      for (int l = r.first_line; l <= r.last_line; ++l) add_line(l);
    }
  }

  bool shares_loop(int a, int b) const {
    for (int p = t_.nodes[a].parent; p >= 0; p = t_.nodes[p].parent)
      if (is_loop(t_.nodes[p].kind) && inside(b, p)) return true;
    return false;
  }

  const SyntaxTree &t_;
  const ReferenceIndex &idx_;
  std::vector<int> end_;
  std::vector<int> multi_line_;
  int criterion_ = 0;
  std::set<int> context_;
  std::set<std::pair<int, int>> visited_;
  std::deque<int> pending_;
  std::deque<int> queue_;
};

void check_line(const SyntaxTree &tree, int line) {
  if (line < 1 || line > file_line_count(tree))
    throw std::out_of_range("line " + std::to_string(line) + " outside file of " +
                            std::to_string(file_line_count(tree)) + " lines");
}

std::string join_lines(const std::vector<std::string> &lines) {
  std::string out;
  for (const auto &l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

} // namespace

int file_line_count(const SyntaxTree &tree) {
  if (!tree.source_lines.empty()) return static_cast<int>(tree.source_lines.size());
  return tree.nodes.empty() ? 0 : tree.nodes[0].span.end_line;
}

std::set<Entity> get_entities(const SyntaxTree &tree, const ReferenceIndex &index, int line) {
  std::set<Entity> out;
  for (int n : Slicer(tree, index).occurrences(line, true)) {
    int b = index.binding_of_node[n];
    const Binding &bind = index.bindings[b];
    Entity e{bind.name, bind.kind, std::nullopt, b};
    if (bind.decl_node >= 0) e.declaration_site = std::make_pair(tree.nodes[bind.decl_node].span.line, bind.decl_node);
    out.insert(e);
  }
  return out;
}

std::set<Entity> get_entities(const SyntaxTree &tree, int line) {
  return get_entities(tree, resolve_references(tree), line);
}

ContextSlice backward_slice(const SyntaxTree &tree, const ReferenceIndex &index, int line) {
  check_line(tree, line);
  ContextSlice out;
  out.criterion.line = line;
  out.criterion.entities = get_entities(tree, index, line);
  Slicer s(tree, index);
  out.context_lines = s.run(line);
  out.used_control_flow = s.used_control_flow(out.context_lines);
  return out;
}

ContextSlice backward_slice(const SyntaxTree &tree, int line) {
  return backward_slice(tree, resolve_references(tree), line);
}

ContextSlice slice_with_fallback(const SyntaxTree &tree, int line) {
  ContextSlice out = backward_slice(tree, line);
  if (!out.criterion.entities.empty()) return out;
  std::set<int> own = complete_closures(tree, {line});
  if (!std::includes(own.begin(), own.end(), out.context_lines.begin(), out.context_lines.end()))
    return out;
  out.context_lines.clear();
  for (int l = 1; l <= file_line_count(tree); ++l) out.context_lines.insert(l);
  out.used_fallback = true;
  return out;
}

SlicedPair single_slice(const SyntaxTree &buggy, const SyntaxTree &fixed, const DiffResult &diff) {
  SlicedPair out;
  out.buggy_slice = slice_with_fallback(buggy, diff.buggy_line);
  out.buggy = reconstruct_statements(buggy, out.buggy_slice.context_lines);

  // Align the files by their common prefix and suffix; the lines in between
  // are the changed region, which is taken from the fixed file whole.
  const auto &bl = buggy.source_lines;
  const auto &fl = fixed.source_lines;
  const int nb = static_cast<int>(bl.size()), nf = static_cast<int>(fl.size());
  int p = 0;
  while (p < nb && p < nf && bl[p] == fl[p]) ++p;
  int s = 0;
  while (s < nb - p && s < nf - p && bl[nb - 1 - s] == fl[nf - 1 - s]) ++s;
  const int block_end = nb - s; // buggy lines p+1..block_end differ

  std::set<int> closed = complete_closures(buggy, out.buggy_slice.context_lines);
  std::set<int> mapped;
  bool block_done = false;
  auto emit_block = [&] {
    for (int l = p + 1; l <= nf - s; ++l) mapped.insert(l);
    block_done = true;
  };
  for (int l : closed) {
    if (l <= p) {
      mapped.insert(l);
      continue;
    }
    if (!block_done) emit_block();
    if (l > block_end) mapped.insert(l - nb + nf);
  }
  if (!block_done) emit_block();

  std::vector<std::string> lines;
  for (int l : mapped) lines.push_back(fl[static_cast<std::size_t>(l - 1)]);
  out.fixed = join_lines(lines);
  parse(out.fixed);

  out.fixed_slice.criterion.line = diff.fixed_line;
  out.fixed_slice.criterion.entities = get_entities(fixed, diff.fixed_line);
  out.fixed_slice.context_lines = std::move(mapped);
  out.fixed_slice.used_control_flow = out.buggy_slice.used_control_flow;
  out.fixed_slice.used_fallback = out.buggy_slice.used_fallback;
  return out;
}

SlicedPair dual_slice(const SyntaxTree &buggy, const SyntaxTree &fixed, const DiffResult &diff) {
  SlicedPair out;
  out.buggy_slice = slice_with_fallback(buggy, diff.buggy_line);
  out.buggy = reconstruct_statements(buggy, out.buggy_slice.context_lines);
  out.fixed_slice = slice_with_fallback(fixed, diff.fixed_line);
  out.fixed = reconstruct_statements(fixed, out.fixed_slice.context_lines);
  return out;
}

} // namespace slicefix
