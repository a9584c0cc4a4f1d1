// Reference slicer over the facts recorded by ProgramGenerator. It never
// looks at a syntax tree: dependence edges come from the generator's own
// bookkeeping and the fixpoint is computed by naive iteration.
#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "support/program_gen.hpp"

namespace testsupport {

struct OracleSlice {
  std::set<int> context;
  std::set<int> closed;
  bool control = false;
  bool fallback = false;
};

class SliceOracle {
public:
  explicit SliceOracle(const GeneratedProgram &p) : p_(p) {
    // Each header opens a construct running to the last line it encloses.
    for (int l = 1; l <= p.line_count(); ++l)
      for (int h : p.at(l).headers) end_of_[h] = std::max(end_of_[h], l);
  }

  std::set<std::string> entities(int line, bool criterion) const {
    const LineFacts &f = p_.at(line);
    std::set<std::string> out;
    for (const auto *s : {&f.declared, &f.defs, &f.muts, &f.uses}) out.insert(s->begin(), s->end());
    for (const auto &d : f.declared) {
      if (criterion || p_.functions.contains(d)) out.erase(d);
    }
    return out;
  }

  std::set<int> closure(std::set<int> lines) const {
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto [h, e] : end_of_) {
        bool touch = false;
        for (int l = h; l <= e && !touch; ++l) touch = lines.contains(l);
        if (!touch) continue;
        changed |= lines.insert(h).second;
        changed |= lines.insert(e).second;
      }
    }
    return lines;
  }

  OracleSlice slice(int criterion) const {
    std::set<int> context{criterion};
    std::set<std::pair<std::string, int>> work;
    for (const auto &e : entities(criterion, true)) work.insert({e, criterion});
    bool changed = true;
    while (changed) {
      changed = false;
      std::set<int> add;
      for (int l : context) {
        for (int h : p_.at(l).headers) add.insert(h);
        if (l != criterion)
          for (const auto &e : entities(l, false)) work.insert({e, l});
      }
      for (const auto &[name, use] : work)
        for (int l : dependence_lines(name, use)) add.insert(l);
      for (int l : add) changed |= context.insert(l).second;
    }
    OracleSlice out;
    out.context = context;
    // Decided on the dependence slice, before any fallback widening.
    for (int l : out.context)
      for (int h : p_.at(l).headers) {
        LineRole r = p_.at(h).role;
        if (r == LineRole::IfHeader || r == LineRole::ElseHeader || r == LineRole::WhileHeader)
          out.control = true;
      }
    if (entities(criterion, true).empty()) {
      bool within = true;
      std::set<int> own = closure({criterion});
      for (int l : context) within &= own.contains(l);
      if (within) {
        out.fallback = true;
        out.context.clear();
        for (int l = 1; l <= p_.line_count(); ++l) out.context.insert(l);
      }
    }
    out.closed = closure(out.context);
    return out;
  }

private:
  // Lines that the occurrence of `name` on line `use` depends on.
  std::vector<int> dependence_lines(const std::string &name, int use) const {
    std::vector<int> out;
    if (auto f = p_.functions.find(name); f != p_.functions.end()) {
      for (int l = f->second.first; l <= f->second.second; ++l) out.push_back(l);
    } else if (auto d = p_.decl_line.find(name); d != p_.decl_line.end()) {
      out.push_back(d->second);
    }
    const std::string &fn = p_.at(use).function;
    auto param = p_.param_of.find(name);
    bool local = param != p_.param_of.end() && param->second == fn;
    bool outside = !fn.empty() && !local;
    for (int r = 1; r <= p_.line_count(); ++r) {
      const LineFacts &f = p_.at(r);
      if (!f.defs.contains(name) && !f.muts.contains(name)) continue;
      if (f.declared.contains(name)) continue; // covered by the declaration
      bool same_loop = false;
      for (auto [h, c] : p_.loops) same_loop |= h <= r && r <= c && h <= use && use <= c;
      if (r < use || outside || same_loop) out.push_back(r);
    }
    return out;
  }

  const GeneratedProgram &p_;
  std::map<int, int> end_of_;
};

} // namespace testsupport
