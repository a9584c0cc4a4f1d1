#include "slicefix/syntax.hpp"

#include <algorithm>

#include <json.hpp>

namespace slicefix {

namespace {

using Json = nlohmann::ordered_json;

class Ingestor {
public:
  SyntaxTree run(const Json &doc) {
    if (!doc.is_object() || !doc.contains("type")) fail("document is not an ESTree node");
    int root = node(doc);
    SyntaxTree tree;
    std::vector<std::pair<int, int>> stack{{root, -1}};
    while (!stack.empty()) {
      auto [old, parent] = stack.back();
      stack.pop_back();
      int idx = static_cast<int>(tree.nodes.size());
      SyntaxNode n = arena_[old];
      n.parent = parent;
      std::vector<int> kids = std::move(n.children);
      n.children.clear();
      tree.nodes.push_back(std::move(n));
      if (parent >= 0) tree.nodes[parent].children.push_back(idx);
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.emplace_back(*it, idx);
    }
    return tree;
  }

private:
  [[noreturn]] static void fail(const std::string &msg, int line = 1, int col = 0) {
    throw ParseError(line, col, msg);
  }

  static Span span_of(const Json &j) {
    if (!j.contains("loc") || !j["loc"].is_object()) fail("node without loc: " + type_of(j));
    const Json &loc = j["loc"];
    try {
      return Span{loc.at("start").at("line").get<int>(), loc.at("start").at("column").get<int>(),
                  loc.at("end").at("line").get<int>(), loc.at("end").at("column").get<int>()};
    } catch (const nlohmann::json::exception &) {
      fail("malformed loc on " + type_of(j));
    }
  }

  static std::string type_of(const Json &j) {
    if (j.contains("type") && j["type"].is_string()) return j["type"].get<std::string>();
    return "<untyped>";
  }

  int make(Kind kind, Span span, std::vector<int> children = {},
           std::optional<std::string> value = std::nullopt) {
    arena_.push_back(SyntaxNode{kind, std::move(value), std::move(children), -1, span});
    return static_cast<int>(arena_.size() - 1);
  }

  const Span &span(int n) const { return arena_[n].span; }

  // Zero-width span at the end of `prev`, or at `fallback` when absent.
  Span gap_after(int prev, const Span &fallback) const {
    if (prev < 0) return Span{fallback.line, fallback.col, fallback.line, fallback.col};
    const Span &p = span(prev);
    return Span{p.end_line, p.end_col, p.end_line, p.end_col};
  }

  // Operator leaves have no ESTree node; they occupy the gap between operands.
  int operator_between(const std::string &op, int left, int right) {
    const Span &l = span(left);
    const Span &r = span(right);
    return make(Kind::Operator, Span{l.end_line, l.end_col, r.line, r.col}, {}, op);
  }

  int optional_child(const Json &j, const char *field) {
    if (!j.contains(field) || j[field].is_null()) return -1;
    return node(j[field]);
  }

  int params(const Json &list, const Span &before, const Span &body) {
    std::vector<int> kids;
    for (const Json &p : list) kids.push_back(node(p));
    Span s;
    if (kids.empty()) {
      s = Span{body.line, body.col, body.line, body.col};
    } else {
      s = Span{span(kids.front()).line, span(kids.front()).col, span(kids.back()).end_line,
               span(kids.back()).end_col};
    }
    (void)before;
    return make(Kind::FormalParameters, s, std::move(kids));
  }

  int property_name(const Json &key) {
    if (type_of(key) == "Identifier")
      return make(Kind::PropertyName, span_of(key), {}, key.at("name").get<std::string>());
    return node(key);
  }

  int function_like(Kind kind, const Json &j, Span s) {
    std::vector<int> kids;
    int id = optional_child(j, "id");
    if (id >= 0) kids.push_back(id);
    Span body_span = span_of(j.at("body"));
    kids.push_back(params(j.at("params"), s, body_span));
    kids.push_back(node(j.at("body")));
    return make(kind, s, std::move(kids));
  }

  int literal(const Json &j, Span s) {
    std::string raw = j.contains("raw") ? j["raw"].get<std::string>() : std::string();
    if (j.contains("regex")) return make(Kind::Foreign, s, {}, "RegExpLiteral");
    if (j.contains("bigint")) return make(Kind::NumericLiteral, s, {}, raw);
    const Json &v = j.contains("value") ? j["value"] : Json();
    if (v.is_string()) return make(Kind::StringLiteral, s, {}, raw);
    if (v.is_number()) return make(Kind::NumericLiteral, s, {}, raw);
    if (v.is_boolean()) return make(Kind::BooleanLiteral, s, {}, raw);
    if (v.is_null()) return make(Kind::NullLiteral, s);
    return make(Kind::Foreign, s, {}, "Literal");
  }

  int foreign(const Json &j, Span s) {
    std::vector<int> kids;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() == "loc" || it.key() == "range") continue;
      const Json &v = it.value();
      if (v.is_object() && v.contains("type")) {
        kids.push_back(node(v));
      } else if (v.is_array()) {
        for (const Json &e : v)
          if (e.is_object() && e.contains("type")) kids.push_back(node(e));
      }
    }
    std::stable_sort(kids.begin(), kids.end(), [&](int a, int b) {
      const Span &x = span(a), &y = span(b);
      return x.line < y.line || (x.line == y.line && x.col < y.col);
    });
    return make(Kind::Foreign, s, std::move(kids), type_of(j));
  }

  int node(const Json &j) {
    if (!j.is_object()) fail("expected an ESTree node");
    const std::string type = type_of(j);
    const Span s = span_of(j);

    if (type == "Program") {
      std::vector<int> kids;
      for (const Json &st : j.at("body")) kids.push_back(node(st));
      return make(Kind::Program, s, std::move(kids));
    }
    if (type == "VariableDeclaration") {
      std::string k = j.at("kind").get<std::string>();
      Kind kind = k == "var" ? Kind::VarDeclaration
                  : k == "let" ? Kind::LetDeclaration
                               : Kind::ConstDeclaration;
      std::vector<int> kids;
      for (const Json &d : j.at("declarations")) kids.push_back(node(d));
      return make(kind, s, std::move(kids));
    }
    if (type == "VariableDeclarator") {
      if (type_of(j.at("id")) != "Identifier") return foreign(j, s);
      std::vector<int> kids{node(j.at("id"))};
      int init = optional_child(j, "init");
      if (init >= 0) kids.push_back(init);
      return make(Kind::VariableDeclarator, s, std::move(kids));
    }
    if (type == "FunctionDeclaration" || type == "FunctionExpression") {
      if (j.value("async", false) || j.value("generator", false)) return foreign(j, s);
      return function_like(type == "FunctionDeclaration" ? Kind::FunctionDeclaration
                                                         : Kind::FunctionExpression,
                           j, s);
    }
    if (type == "ArrowFunctionExpression") {
      if (j.value("async", false)) return foreign(j, s);
      Span body_span = span_of(j.at("body"));
      int p = params(j.at("params"), s, body_span);
      int body = node(j.at("body"));
      return make(Kind::ArrowFunctionExpression, s, {p, body});
    }
    if (type == "RestElement") return make(Kind::RestElement, s, {node(j.at("argument"))});
    if (type == "AssignmentPattern") {
      int left = node(j.at("left"));
      int right = node(j.at("right"));
      int op = operator_between("=", left, right);
      return make(Kind::AssignmentPattern, s, {left, op, right});
    }
    if (type == "ReturnStatement") {
      std::vector<int> kids;
      int arg = optional_child(j, "argument");
      if (arg >= 0) kids.push_back(arg);
      return make(Kind::ReturnStatement, s, std::move(kids));
    }
    if (type == "IfStatement") {
      std::vector<int> kids{node(j.at("test")), node(j.at("consequent"))};
      int alt = optional_child(j, "alternate");
      if (alt >= 0) kids.push_back(alt);
      return make(Kind::IfStatement, s, std::move(kids));
    }
    if (type == "ForStatement") {
      std::vector<int> kids;
      for (const char *field : {"init", "test", "update"}) {
        int c = optional_child(j, field);
        if (c < 0) c = make(Kind::EmptyExpression, gap_after(kids.empty() ? -1 : kids.back(), s));
        kids.push_back(c);
      }
      kids.push_back(node(j.at("body")));
      return make(Kind::ForStatement, s, std::move(kids));
    }
    if (type == "ForInStatement" || type == "ForOfStatement") {
      if (j.value("await", false)) return foreign(j, s);
      Kind kind = type == "ForInStatement" ? Kind::ForInStatement : Kind::ForOfStatement;
      return make(kind, s, {node(j.at("left")), node(j.at("right")), node(j.at("body"))});
    }
    if (type == "WhileStatement")
      return make(Kind::WhileStatement, s, {node(j.at("test")), node(j.at("body"))});
    if (type == "BreakStatement" || type == "ContinueStatement") {
      if (j.contains("label") && !j["label"].is_null()) return foreign(j, s);
      return make(type == "BreakStatement" ? Kind::BreakStatement : Kind::ContinueStatement, s);
    }
    if (type == "ThrowStatement") return make(Kind::ThrowStatement, s, {node(j.at("argument"))});
    if (type == "EmptyStatement") return make(Kind::EmptyStatement, s);
    if (type == "ExpressionStatement")
      return make(Kind::ExpressionStatement, s, {node(j.at("expression"))});
    if (type == "BlockStatement") {
      std::vector<int> kids;
      for (const Json &st : j.at("body")) kids.push_back(node(st));
      return make(Kind::Block, s, std::move(kids));
    }
    if (type == "ImportDeclaration") {
      std::vector<int> kids;
      for (const Json &sp : j.at("specifiers")) kids.push_back(node(sp));
      kids.push_back(node(j.at("source")));
      return make(Kind::ImportDeclaration, s, std::move(kids));
    }
    if (type == "ImportDefaultSpecifier")
      return make(Kind::ImportDefaultSpecifier, s, {node(j.at("local"))});
    if (type == "ImportNamespaceSpecifier")
      return make(Kind::ImportNamespaceSpecifier, s, {node(j.at("local"))});
    if (type == "ImportSpecifier") {
      const Json &imported = j.at("imported");
      const Json &local = j.at("local");
      if (type_of(imported) == "Identifier" && imported.at("name") == local.at("name") &&
          span_of(imported) == span_of(local))
        return make(Kind::ImportSpecifier, s, {node(local)});
      return make(Kind::ImportSpecifier, s, {property_name(imported), node(local)});
    }
    if (type == "ExportDefaultDeclaration")
      return make(Kind::ExportDefaultDeclaration, s, {node(j.at("declaration"))});
    if (type == "ExportNamedDeclaration") {
      if (!j.contains("declaration") || j["declaration"].is_null()) return foreign(j, s);
      return make(Kind::ExportNamedDeclaration, s, {node(j.at("declaration"))});
    }
    if (type == "AssignmentExpression" || type == "BinaryExpression" ||
        type == "LogicalExpression") {
      Kind kind = type == "AssignmentExpression" ? Kind::AssignmentExpression
                  : type == "BinaryExpression"   ? Kind::BinaryExpression
                                                 : Kind::LogicalExpression;
      int left = node(j.at("left"));
      int right = node(j.at("right"));
      int op = operator_between(j.at("operator").get<std::string>(), left, right);
      return make(kind, s, {left, op, right});
    }
    if (type == "UnaryExpression" || type == "AwaitExpression") {
      std::string op = type == "AwaitExpression" ? "await" : j.at("operator").get<std::string>();
      int arg = node(j.at("argument"));
      int o = make(Kind::Operator, Span{s.line, s.col, span(arg).line, span(arg).col}, {}, op);
      return make(Kind::UnaryExpression, s, {o, arg});
    }
    if (type == "UpdateExpression") {
      std::string op = j.at("operator").get<std::string>();
      int arg = node(j.at("argument"));
      if (j.value("prefix", false)) {
        int o = make(Kind::Operator, Span{s.line, s.col, span(arg).line, span(arg).col}, {}, op);
        return make(Kind::UpdateExpression, s, {o, arg});
      }
      int o = make(Kind::Operator, Span{span(arg).end_line, span(arg).end_col, s.end_line, s.end_col},
                   {}, op);
      return make(Kind::UpdateExpression, s, {arg, o});
    }
    if (type == "ConditionalExpression")
      return make(Kind::ConditionalExpression, s,
                  {node(j.at("test")), node(j.at("consequent")), node(j.at("alternate"))});
    if (type == "CallExpression" || type == "NewExpression") {
      if (j.value("optional", false)) return foreign(j, s);
      std::vector<int> kids{node(j.at("callee"))};
      for (const Json &a : j.at("arguments")) kids.push_back(node(a));
      return make(type == "CallExpression" ? Kind::CallExpression : Kind::NewExpression, s,
                  std::move(kids));
    }
    if (type == "MemberExpression") {
      if (j.value("optional", false)) return foreign(j, s);
      int object = node(j.at("object"));
      if (j.value("computed", false))
        return make(Kind::ComputedMemberExpression, s, {object, node(j.at("property"))});
      const Json &prop = j.at("property");
      if (type_of(prop) != "Identifier") return foreign(j, s);
      int p = property_name(prop);
      return make(Kind::MemberExpression, s, {object, p});
    }
    if (type == "ObjectExpression") {
      std::vector<int> kids;
      for (const Json &p : j.at("properties")) kids.push_back(node(p));
      return make(Kind::ObjectExpression, s, std::move(kids));
    }
    if (type == "Property") {
      if (j.value("computed", false) || j.value("kind", std::string("init")) != "init")
        return foreign(j, s);
      const Json &value = j.at("value");
      if (j.value("shorthand", false)) {
        if (type_of(value) != "Identifier") return foreign(j, s);
        return make(Kind::ShorthandProperty, s, {node(value)});
      }
      if (j.value("method", false) &&
          (value.value("async", false) || value.value("generator", false)))
        return foreign(j, s);
      int key = property_name(j.at("key"));
      if (j.value("method", false)) {
        Span body_span = span_of(value.at("body"));
        int p = params(value.at("params"), s, body_span);
        int body = node(value.at("body"));
        return make(Kind::MethodProperty, s, {key, p, body});
      }
      return make(Kind::Property, s, {key, node(value)});
    }
    if (type == "SpreadElement") return make(Kind::SpreadElement, s, {node(j.at("argument"))});
    if (type == "ArrayExpression") {
      std::vector<int> kids;
      for (const Json &e : j.at("elements")) {
        if (e.is_null()) {
          kids.push_back(make(Kind::EmptyExpression, gap_after(kids.empty() ? -1 : kids.back(), s)));
        } else {
          kids.push_back(node(e));
        }
      }
      return make(Kind::ArrayExpression, s, std::move(kids));
    }
    if (type == "Identifier")
      return make(Kind::Identifier, s, {}, j.at("name").get<std::string>());
    if (type == "Literal") return literal(j, s);
    if (type == "TemplateLiteral") {
      const Json &exprs = j.at("expressions");
      if (!exprs.empty()) return foreign(j, s);
      std::string raw = j.at("quasis").at(0).at("value").at("raw").get<std::string>();
      return make(Kind::TemplateLiteral, s, {}, "`" + raw + "`");
    }
    if (type == "ThisExpression") return make(Kind::ThisExpression, s);
    if (type == "ParenthesizedExpression") return node(j.at("expression"));
    return foreign(j, s);
  }

  std::vector<SyntaxNode> arena_;
};

} // namespace

SyntaxTree ingest_estree(std::string_view json) {
  Json doc;
  try {
    doc = Json::parse(json);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(1, 0, std::string("invalid JSON: ") + e.what());
  }
  SyntaxTree tree = Ingestor().run(doc);
  std::string problem = validate(tree);
  if (!problem.empty()) throw ParseError(1, 0, "inconsistent ESTree locations: " + problem);
  return tree;
}

} // namespace slicefix
