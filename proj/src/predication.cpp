// Copyright 2026 The qirq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qirq/predication.hpp"

#include <sstream>
#include <unordered_set>

#include "qirq/textir.hpp"

namespace qirq {

Guard Guard::conj(Guard a, Guard b) {
  if (a.kind == Kind::True) return b;
  if (b.kind == Kind::True) return a;
  return {Kind::And, {}, false, {std::move(a), std::move(b)}};
}

Guard Guard::disj(std::vector<Guard> terms) {
  if (terms.empty()) return negate(truth());
  if (terms.size() == 1) return std::move(terms.front());
  return {Kind::Or, {}, false, std::move(terms)};
}

bool operator==(const Guard &a, const Guard &b) {
  if (a.kind != b.kind || a.block != b.block || a.args != b.args) return false;
  if (a.cond.index() != b.cond.index()) return false;
  if (auto *v = std::get_if<VReg>(&a.cond)) return v->id == std::get<VReg>(b.cond).id;
  return a.cond == b.cond;
}

std::string Guard::to_string(const Function &f) const {
  switch (kind) {
  case Kind::True: return "true";
  case Kind::Block: return "g(" + block + ")";
  case Kind::Cond: return format_operand(f, cond);
  case Kind::Not: return "!" + args[0].to_string(f);
  case Kind::And:
  case Kind::Or: {
    std::string s = "(";
    for (size_t i = 0; i < args.size(); ++i) {
      if (i) s += kind == Kind::And ? " & " : " | ";
      s += args[i].to_string(f);
    }
    return s + ")";
  }
  }
  return "?";
}

Guard expand(const Guard &g, const std::map<std::string, Guard> &guards) {
  if (g.kind == Guard::Kind::Block) return expand(guards.at(g.block), guards);
  Guard out = g;
  for (auto &a : out.args) a = expand(a, guards);
  return out;
}

static Operand branch_cond(const BasicBlock &b) {
  if (auto *br = std::get_if<Branch>(&b.term)) return br->cond;
  return true;
}

std::map<std::string, Guard> compute_guards(const Function &f) {
  Cfg g = Cfg::build(f);
  std::map<std::string, Guard> out;
  for (auto &label : topo_sort(g)) {
    int n = g.index(label);
    if (n == 0) {
      out[label] = Guard::truth();
      continue;
    }
    std::vector<Guard> terms;
    for (int ei : g.pred[n]) {
      const CfgEdge &e = g.edges[ei];
      const std::string &p = g.nodes[e.from];
      Guard base = out.at(p).kind == Guard::Kind::True ? Guard::truth() : Guard::of_block(p);
      Operand c = branch_cond(f.blocks[e.from]);
      Guard edge = e.kind == EdgeKind::Unconditional ? Guard::truth()
                   : e.kind == EdgeKind::TrueArm     ? Guard::of_cond(c)
                                                     : Guard::negate(Guard::of_cond(c));
      terms.push_back(Guard::conj(std::move(base), std::move(edge)));
    }
    out[label] = Guard::disj(std::move(terms));
  }
  return out;
}

static void check_convertible(const Function &f) {
  std::unordered_set<int> defined;
  for (auto p : f.params) defined.insert(p.id);
  auto def = [&](VReg v, const std::string &where) {
    if (!defined.insert(v.id).second)
      throw NonSSA("%" + f.info(v).name + " is defined more than once (block " + where + ")");
  };
  for (auto &b : f.blocks) {
    for (auto &p : b.phis) def(p.dst, b.label);
    for (auto &i : b.body) {
      if (std::holds_alternative<Call>(i))
        throw std::invalid_argument("if-conversion needs a call-free function; block " + b.label +
                                    " still calls @" + std::get<Call>(i).callee);
      if (auto d = defined_vreg(i)) def(*d, b.label);
    }
  }
}

GuardedFunction if_convert(const Function &f) {
  check_convertible(f);
  Cfg g = Cfg::build(f);
  auto order = topo_sort(g);
  auto guards = compute_guards(f);

  GuardedFunction gf;
  gf.vars.name = f.name;
  gf.vars.params = f.params;
  gf.vars.vregs = f.vregs;
  Function &vars = gf.vars;

  std::vector<Operand> guard_reg(g.nodes.size(), true);
  std::vector<Operand> edge_reg(g.edges.size(), true);
  auto is_true = [](const Operand &o) {
    auto *b = std::get_if<bool>(&o);
    return b && *b;
  };

  for (auto &label : order) {
    int n = g.index(label);
    const BasicBlock &src = f.blocks[n];
    GuardedBlock gb;
    gb.label = label;
    gb.guard = guards.at(label);
    if (n != 0) {
      for (int ei : g.pred[n]) {
        const CfgEdge &e = g.edges[ei];
        Operand gp = guard_reg[e.from];
        Operand c = branch_cond(f.blocks[e.from]);
        if (e.kind == EdgeKind::Unconditional) {
          edge_reg[ei] = gp;
        } else if (e.kind == EdgeKind::TrueArm && is_true(gp)) {
          edge_reg[ei] = c;
        } else {
          VReg r = vars.new_vreg("e." + g.nodes[e.from] + "." + label, Type::Bool);
          if (e.kind == EdgeKind::TrueArm) gb.guard_code.push_back(Select{r, c, gp, false});
          else gb.guard_code.push_back(Select{r, c, false, gp});
          edge_reg[ei] = r;
        }
      }
      Operand acc = edge_reg[g.pred[n][0]];
      for (size_t k = 1; k < g.pred[n].size(); ++k) {
        VReg r = vars.new_vreg("g." + label, Type::Bool);
        gb.guard_code.push_back(BinOp{BinOpKind::Or, r, acc, edge_reg[g.pred[n][k]]});
        acc = r;
      }
      if (g.pred[n].empty()) acc = false;
      guard_reg[n] = acc;
    }
    gb.guard_reg = guard_reg[n];

    for (auto &p : src.phis) {
      auto edge_of = [&](const std::string &pred) -> Operand {
        for (int ei : g.pred[n])
          if (g.nodes[g.edges[ei].from] == pred) return edge_reg[ei];
        throw std::invalid_argument("phi in " + label + " names non-predecessor " + pred);
      };
      const auto &in = p.incoming;
      if (in.empty()) throw std::invalid_argument("phi without incoming values in " + label);
      if (in.size() == 1) {
        gb.body.push_back(Select{p.dst, true, in[0].first, in[0].first});
        continue;
      }
      Operand acc = in.back().first;
      for (size_t i = in.size() - 1; i-- > 0;) {
        VReg dst = i == 0 ? p.dst : vars.new_vreg(vars.info(p.dst).name + ".sel", vars.info(p.dst).type);
        gb.body.push_back(Select{dst, edge_of(in[i].second), in[i].first, acc});
        acc = dst;
      }
    }
    gb.body.insert(gb.body.end(), src.body.begin(), src.body.end());
    gf.blocks.push_back(std::move(gb));
  }
  gf.new_vregs = static_cast<int>(vars.vregs.size() - f.vregs.size());
  return gf;
}

GuardedFunction if_convert(const Module &m) {
  GuardedFunction gf = if_convert(m.entry_function());
  gf.required_qubits = m.required_qubits;
  gf.required_results = m.required_results;
  return gf;
}

std::string emit_guarded(const GuardedFunction &gf) {
  std::ostringstream os;
  const Function &f = gf.vars;
  os << "guarded @" << f.name << " required_qubits=" << gf.required_qubits
     << " required_results=" << gf.required_results << "\n";
  for (auto &b : gf.blocks) {
    os << "block " << b.label << " ; guard " << b.guard.to_string(f) << "\n";
    for (auto &i : b.guard_code) os << "  " << emit_instruction(f, i) << "\n";
    os << "  if " << format_operand(f, b.guard_reg) << " {\n";
    for (auto &i : b.body) os << "    " << emit_instruction(f, i) << "\n";
    os << "  }\n";
  }
  return os.str();
}

} // namespace qirq
