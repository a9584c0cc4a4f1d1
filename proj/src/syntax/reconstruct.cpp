#include "slicefix/syntax.hpp"

namespace slicefix {

namespace {

// Line ranges that must be emitted whole: multi-line tokens (template
// literals) and multi-line block comments.
std::vector<std::pair<int, int>> atomic_ranges(const SyntaxTree &tree) {
  std::vector<std::pair<int, int>> out;
  int line = 1;
  for (const Token &t : tree.tokens) {
    const std::string &tr = t.leading_trivia;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (tr[i] == '\n') {
        ++line;
      } else if (tr[i] == '/' && i + 1 < tr.size() && tr[i + 1] == '/') {
        while (i + 1 < tr.size() && tr[i + 1] != '\n') ++i;
      } else if (tr[i] == '/' && i + 1 < tr.size() && tr[i + 1] == '*') {
        int start = line;
        i += 2;
        while (i + 1 < tr.size() && !(tr[i] == '*' && tr[i + 1] == '/')) {
          if (tr[i] == '\n') ++line;
          ++i;
        }
        ++i;
        if (line > start) out.emplace_back(start, line);
      }
    }
    if (t.span.end_line > t.span.line) out.emplace_back(t.span.line, t.span.end_line);
    line = t.span.end_line;
  }
  return out;
}

} // namespace

std::set<int> complete_closures(const SyntaxTree &tree, const std::set<int> &context_lines) {
  std::set<int> lines = context_lines;
  auto ranges = atomic_ranges(tree);
  auto touches = [&](int a, int b) {
    auto it = lines.lower_bound(a);
    return it != lines.end() && *it <= b;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
      const Span &s = tree.nodes[i].span;
      if (s.end_line <= s.line || !touches(s.line, s.end_line)) continue;
      changed |= lines.insert(s.line).second;
      changed |= lines.insert(s.end_line).second;
    }
    for (auto [a, b] : ranges) {
      if (!touches(a, b)) continue;
      for (int l = a; l <= b; ++l) changed |= lines.insert(l).second;
    }
  }
  return lines;
}

std::string reconstruct_statements(const SyntaxTree &tree, const std::set<int> &context_lines) {
  std::set<int> lines = complete_closures(tree, context_lines);
  std::string out;
  for (int l : lines) {
    if (l < 1 || static_cast<std::size_t>(l) > tree.source_lines.size())
      throw std::out_of_range("context line " + std::to_string(l) + " outside file");
    out += tree.source_lines[static_cast<std::size_t>(l - 1)];
    out += '\n';
  }
  // Trees from ESTree documents may use syntax the subset parser rejects.
  if (!tree.tokens.empty()) {
    try {
      parse(std::string_view(out));
    } catch (const ParseError &e) {
      throw ParseError(e.line(), e.col(), "reconstructed slice does not parse: " + e.message());
    }
  }
  return out;
}

} // namespace slicefix
