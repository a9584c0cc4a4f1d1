#include "slicefix/slicer.hpp"

#include <map>

namespace slicefix {

namespace {

const std::set<std::string_view> &mutating_methods() {
  static const std::set<std::string_view> names = {
      "push", "pop",  "shift", "unshift", "splice", "sort",  "reverse",
      "fill", "copyWithin", "set", "add", "delete", "clear",
  };
  return names;
}

bool is_function_value(Kind k) {
  return k == Kind::FunctionExpression || k == Kind::ArrowFunctionExpression;
}

std::string key_name(const SyntaxNode &key) {
  std::string v = key.value.value_or("");
  if (key.kind == Kind::StringLiteral && v.size() >= 2) return v.substr(1, v.size() - 2);
  return v;
}

struct Scope {
  int parent = -1;
  bool function = false;
  std::map<std::string, int> names;
};

class Resolver {
public:
  explicit Resolver(const SyntaxTree &t) : t_(t) {
    const std::size_t n = t.nodes.size();
    idx_.binding_of_node.assign(n, -1);
    idx_.ref_of_node.assign(n, -1);
    scope_of_.assign(n, 0);
    decl_extent_.assign(n, {0, 0});
    is_decl_.assign(n, 0);
  }

  ReferenceIndex run() {
    if (t_.nodes.empty()) return std::move(idx_);
    scopes_.push_back(Scope{-1, true, {}});
    declare(0, 0);
    collect();
    return std::move(idx_);
  }

private:
  const SyntaxNode &node(int i) const { return t_.nodes[i]; }
  int parent(int i) const { return t_.nodes[i].parent; }
  int child(int i, std::size_t k) const { return t_.nodes[i].children[k]; }

  int new_scope(int parent, bool function) {
    scopes_.push_back(Scope{parent, function, {}});
    return static_cast<int>(scopes_.size() - 1);
  }

  int function_scope(int s) const {
    while (!scopes_[s].function) s = scopes_[s].parent;
    return s;
  }

  int new_binding(std::string name, EntityKind kind, int decl_node, int owner) {
    idx_.bindings.push_back(Binding{std::move(name), kind, decl_node, owner, false});
    idx_.refs.emplace_back();
    return static_cast<int>(idx_.bindings.size() - 1);
  }

  void mark_decl(int b, int at, std::pair<int, int> extent, bool function_valued) {
    idx_.binding_of_node[at] = b;
    is_decl_[at] = 1;
    decl_extent_[at] = extent;
    if (idx_.bindings[b].decl_node < 0) idx_.bindings[b].decl_node = at;
    if (function_valued) idx_.bindings[b].function_valued = true;
  }

  void bind(int id_node, int scope, EntityKind kind, std::pair<int, int> extent, bool fv) {
    const std::string &name = *node(id_node).value;
    auto &names = scopes_[scope].names;
    auto it = names.find(name);
    int b = it != names.end() ? it->second : new_binding(name, kind, -1, -1);
    names[name] = b;
    mark_decl(b, id_node, extent, fv);
  }

  int property(int owner, const std::string &name) {
    auto key = std::make_pair(owner, name);
    auto it = props_.find(key);
    if (it != props_.end()) return it->second;
    int b = new_binding(name, EntityKind::ObjectProperty, -1, owner);
    props_[key] = b;
    return b;
  }

  std::pair<int, int> lines_of(int n) const { return {node(n).span.line, node(n).span.end_line}; }

  void declare_params(int params, int s) {
    scope_of_[params] = s;
    for (int p : node(params).children) {
      scope_of_[p] = s;
      int id = p;
      if (node(p).kind == Kind::RestElement) {
        id = child(p, 0);
      } else if (node(p).kind == Kind::AssignmentPattern) {
        id = child(p, 0);
        declare(child(p, 1), s);
        declare(child(p, 2), s);
      }
      scope_of_[id] = s;
      if (node(id).kind == Kind::Identifier) bind(id, s, EntityKind::Parameter, lines_of(p), false);
    }
  }

  void declare_body(int body, int s) {
    scope_of_[body] = s;
    if (node(body).kind == Kind::Block) {
      for (int c : node(body).children) declare(c, s);
    } else {
      declare(body, s);
    }
  }

  void declare(int n, int scope) {
    scope_of_[n] = scope;
    const SyntaxNode &nd = node(n);
    switch (nd.kind) {
    case Kind::FunctionDeclaration:
    case Kind::FunctionExpression: {
      int s = new_scope(scope, true);
      std::size_t k = 0;
      if (node(child(n, 0)).kind == Kind::Identifier) {
        int name = child(n, 0);
        int target = nd.kind == Kind::FunctionDeclaration ? scope : s;
        scope_of_[name] = target;
        bind(name, target, EntityKind::Function, lines_of(n), true);
        k = 1;
      }
      declare_params(child(n, k), s);
      declare_body(child(n, k + 1), s);
      return;
    }
    case Kind::ArrowFunctionExpression: {
      int s = new_scope(scope, true);
      declare_params(child(n, 0), s);
      declare_body(child(n, 1), s);
      return;
    }
    case Kind::MethodProperty: {
      int s = new_scope(scope, true);
      scope_of_[child(n, 0)] = scope;
      declare_params(child(n, 1), s);
      declare_body(child(n, 2), s);
      return;
    }
    case Kind::Block:
    case Kind::ForStatement:
    case Kind::ForInStatement:
    case Kind::ForOfStatement: {
      int s = new_scope(scope, false);
      scope_of_[n] = s;
      for (int c : nd.children) declare(c, s);
      return;
    }
    case Kind::VarDeclaration:
    case Kind::LetDeclaration:
    case Kind::ConstDeclaration: {
      int target = nd.kind == Kind::VarDeclaration ? function_scope(scope) : scope;
      for (int d : nd.children) {
        scope_of_[d] = scope;
        const auto &dk = node(d).children;
        bool fv = dk.size() > 1 && is_function_value(node(dk[1]).kind);
        scope_of_[dk[0]] = target;
        bind(dk[0], target, EntityKind::Variable, lines_of(d), fv);
        if (dk.size() > 1) declare(dk[1], scope);
      }
      return;
    }
    case Kind::ImportDeclaration: {
      for (int spec : nd.children) {
        scope_of_[spec] = scope;
        if (node(spec).kind == Kind::StringLiteral) continue;
        int local = node(spec).children.back();
        scope_of_[local] = 0;
        for (int c : node(spec).children) scope_of_[c] = 0;
        bind(local, 0, EntityKind::ImportBinding, lines_of(n), false);
      }
      return;
    }
    case Kind::ObjectExpression: {
      for (int m : nd.children) {
        scope_of_[m] = scope;
        const SyntaxNode &mn = node(m);
        if (mn.kind == Kind::Property || mn.kind == Kind::MethodProperty) {
          int key = child(m, 0);
          scope_of_[key] = scope;
          bool fv = mn.kind == Kind::MethodProperty ||
                    (mn.kind == Kind::Property && is_function_value(node(child(m, 1)).kind));
          int b = property(n, key_name(node(key)));
          mark_decl(b, key, lines_of(m), fv);
          if (mn.kind == Kind::Property) {
            declare(child(m, 1), scope);
          } else {
            declare(m, scope);
          }
        } else if (mn.kind == Kind::ShorthandProperty) {
          int b = property(n, *node(child(m, 0)).value);
          mark_decl(b, m, lines_of(m), false);
          declare(child(m, 0), scope);
        } else {
          declare(m, scope);
        }
      }
      return;
    }
    default:
      for (int c : nd.children) declare(c, scope);
    }
  }

  int lookup(int n) {
    const std::string &name = *node(n).value;
    for (int s = scope_of_[n]; s >= 0; s = scopes_[s].parent) {
      auto it = scopes_[s].names.find(name);
      if (it != scopes_[s].names.end()) return it->second;
    }
    // Free name: one implicit global binding per name.
    int b = new_binding(name, EntityKind::Variable, -1, -1);
    scopes_[0].names[name] = b;
    return b;
  }

  int this_owner(int member) const {
    for (int a = parent(member); a >= 0; a = parent(a)) {
      Kind k = node(a).kind;
      if (k == Kind::MethodProperty) return parent(a);
      if (k == Kind::FunctionExpression) {
        int p = parent(a);
        if (p >= 0 && node(p).kind == Kind::Property) return parent(p);
        return a;
      }
      if (k == Kind::FunctionDeclaration) return a;
    }
    return 0;
  }

  bool is_operator(int n, std::string_view op) const {
    return node(n).kind == Kind::Operator && node(n).value == op;
  }

  RefKind classify(int e) const {
    int p = parent(e);
    const SyntaxNode &pn = node(p);
    if (pn.kind == Kind::AssignmentExpression && pn.children[0] == e)
      return is_operator(pn.children[1], "=") ? RefKind::Definition : RefKind::Mutation;
    if (pn.kind == Kind::UpdateExpression) return RefKind::Mutation;
    if ((pn.kind == Kind::ForInStatement || pn.kind == Kind::ForOfStatement) && pn.children[0] == e)
      return RefKind::Definition;
    if (pn.kind == Kind::CallExpression && pn.children[0] == e) return RefKind::Call;
    int top = e;
    while (parent(top) >= 0) {
      const SyntaxNode &q = node(parent(top));
      bool object_slot = (q.kind == Kind::MemberExpression ||
                          q.kind == Kind::ComputedMemberExpression) &&
                         q.children[0] == top;
      if (!object_slot) break;
      top = parent(top);
    }
    if (top != e) {
      const SyntaxNode &q = node(parent(top));
      if (q.kind == Kind::AssignmentExpression && q.children[0] == top) return RefKind::Mutation;
      if (q.kind == Kind::UpdateExpression) return RefKind::Mutation;
      if (q.kind == Kind::UnaryExpression && is_operator(q.children[0], "delete"))
        return RefKind::Mutation;
      if (q.kind == Kind::CallExpression && q.children[0] == top &&
          node(top).kind == Kind::MemberExpression) {
        const SyntaxNode &prop = node(node(top).children[1]);
        if (mutating_methods().contains(*prop.value)) return RefKind::Mutation;
      }
    }
    return RefKind::Use;
  }

  // Lines of the innermost simple statement around a reference.
  std::pair<int, int> statement_extent(int n) const {
    for (int a = parent(n); a >= 0; a = parent(a)) {
      switch (node(a).kind) {
      case Kind::ExpressionStatement:
      case Kind::ReturnStatement:
      case Kind::ThrowStatement:
      case Kind::VariableDeclarator:
        return lines_of(a);
      case Kind::IfStatement:
      case Kind::ForStatement:
      case Kind::ForInStatement:
      case Kind::ForOfStatement:
      case Kind::WhileStatement:
      case Kind::Block:
      case Kind::Program:
      case Kind::FunctionDeclaration:
      case Kind::FunctionExpression:
      case Kind::ArrowFunctionExpression:
      case Kind::MethodProperty:
        return {node(n).span.line, node(n).span.line};
      default:
        break;
      }
    }
    return {node(n).span.line, node(n).span.line};
  }

  void add_ref(int b, int n, RefKind kind, bool decl, std::pair<int, int> extent) {
    idx_.binding_of_node[n] = b;
    idx_.ref_of_node[n] = static_cast<int>(idx_.refs[b].size());
    idx_.refs[b].push_back(Reference{node(n).span.line, n, kind, decl, extent.first, extent.second});
    int line = node(n).span.line;
    if (static_cast<int>(idx_.nodes_on_line.size()) <= line) idx_.nodes_on_line.resize(line + 1);
    idx_.nodes_on_line[line].push_back(n);
  }

  void collect() {
    for (std::size_t i = 0; i < t_.nodes.size(); ++i) {
      int n = static_cast<int>(i);
      const SyntaxNode &nd = node(n);
      if (is_decl_[i]) {
        add_ref(idx_.binding_of_node[i], n, RefKind::Definition, true, decl_extent_[i]);
        continue;
      }
      if (nd.kind == Kind::Identifier && nd.value) {
        int b = lookup(n);
        add_ref(b, n, classify(n), false, statement_extent(n));
        continue;
      }
      if (nd.kind == Kind::PropertyName && parent(n) >= 0) {
        int m = parent(n);
        const SyntaxNode &mn = node(m);
        if (mn.kind == Kind::MemberExpression && mn.children[1] == n &&
            node(mn.children[0]).kind == Kind::ThisExpression) {
          int b = property(this_owner(m), *nd.value);
          add_ref(b, n, classify(m), false, statement_extent(m));
        }
      }
    }
  }

  const SyntaxTree &t_;
  ReferenceIndex idx_;
  std::vector<Scope> scopes_;
  std::vector<int> scope_of_;
  std::vector<std::pair<int, int>> decl_extent_;
  std::vector<char> is_decl_;
  std::map<std::pair<int, std::string>, int> props_;
};

} // namespace

std::string_view entity_kind_name(EntityKind kind) {
  switch (kind) {
  case EntityKind::Variable:
    return "variable";
  case EntityKind::Function:
    return "function";
  case EntityKind::ObjectProperty:
    return "object_property";
  case EntityKind::Parameter:
    return "parameter";
  case EntityKind::ImportBinding:
    return "import_binding";
  }
  return "variable";
}

ReferenceIndex resolve_references(const SyntaxTree &tree) { return Resolver(tree).run(); }

} // namespace slicefix
