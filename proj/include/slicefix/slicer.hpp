// Backward slicing over a syntax tree: scope resolution, entity extraction,
// the dependence fixpoint, and single/dual sliced pairs.
#pragma once

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "slicefix/diff.hpp"
#include "slicefix/syntax.hpp"

namespace slicefix {

enum class EntityKind { Variable, Function, ObjectProperty, Parameter, ImportBinding };
enum class RefKind { Definition, Use, Mutation, Call };

std::string_view entity_kind_name(EntityKind kind);

struct Binding {
  std::string name;
  EntityKind kind = EntityKind::Variable;
  int decl_node = -1;  // first declaring node; -1 for implicit globals
  int owner = -1;      // object literal or function owning a property, else -1
  bool function_valued = false;
};

struct Reference {
  int line = 0;
  int node = -1;
  RefKind kind = RefKind::Use;
  bool declaration = false;
  int first_line = 0; // lines pulled in when this reference is selected
  int last_line = 0;
};

struct ReferenceIndex {
  std::vector<Binding> bindings;
  std::vector<std::vector<Reference>> refs;    // per binding, in preorder
  std::vector<int> binding_of_node;            // -1 for nodes that are not references
  std::vector<int> ref_of_node;                // index into refs[binding], -1 if none
  std::vector<std::vector<int>> nodes_on_line; // reference nodes by start line
};

ReferenceIndex resolve_references(const SyntaxTree &tree);

struct Entity {
  std::string name;
  EntityKind kind = EntityKind::Variable;
  std::optional<std::pair<int, int>> declaration_site; // (line, node)
  int binding = -1;

  friend auto operator<=>(const Entity &a, const Entity &b) { return a.binding <=> b.binding; }
  friend bool operator==(const Entity &a, const Entity &b) { return a.binding == b.binding; }
};

/// Entities referenced on `line`, excluding bindings declared on that line
/// (the line is treated as a slicing criterion).
std::set<Entity> get_entities(const SyntaxTree &tree, const ReferenceIndex &index, int line);
std::set<Entity> get_entities(const SyntaxTree &tree, int line);

struct SliceCriterion {
  int line = 1;
  std::set<Entity> entities;
};

struct ContextSlice {
  SliceCriterion criterion;
  std::set<int> context_lines;
  bool used_control_flow = false;
  bool used_fallback = false;
};

/// Number of lines of the file a tree came from.
int file_line_count(const SyntaxTree &tree);

/// Throws std::out_of_range when the line is outside the file.
ContextSlice backward_slice(const SyntaxTree &tree, int line);
ContextSlice backward_slice(const SyntaxTree &tree, const ReferenceIndex &index, int line);
/// As backward_slice, but widens to the whole file when the criterion has no
/// entities and nothing beyond its own enclosing constructs was found.
ContextSlice slice_with_fallback(const SyntaxTree &tree, int line);

struct SlicedPair {
  std::string buggy;
  std::string fixed;
  ContextSlice buggy_slice;
  ContextSlice fixed_slice;
};

/// Buggy side sliced from the buggy line; the fixed side reuses those lines
/// with the changed region taken from the fixed file.
SlicedPair single_slice(const SyntaxTree &buggy, const SyntaxTree &fixed, const DiffResult &diff);
/// Each side sliced from its own changed line.
SlicedPair dual_slice(const SyntaxTree &buggy, const SyntaxTree &fixed, const DiffResult &diff);

} // namespace slicefix
