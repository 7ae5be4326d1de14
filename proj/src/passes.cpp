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

#include "qirq/passes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "qirq/gates.hpp"

namespace qirq {

// --- CFG cleanup ------------------------------------------------------------------

static void for_each_target(Terminator &t, const std::function<void(std::string &)> &f) {
  if (auto *j = std::get_if<Jump>(&t)) f(j->target);
  if (auto *b = std::get_if<Branch>(&t)) {
    f(b->if_true);
    f(b->if_false);
  }
}

static void prune_phis(Function &f) {
  std::unordered_map<std::string, std::set<std::string>> preds;
  for (auto &b : f.blocks)
    for (auto &s : successors(b.term)) preds[s].insert(b.label);
  for (auto &b : f.blocks) {
    auto &ps = preds[b.label];
    for (auto &p : b.phis)
      std::erase_if(p.incoming, [&](auto &in) { return !ps.count(in.second); });
  }
}

bool remove_unreachable(Function &f) {
  if (f.blocks.empty()) return false;
  std::unordered_set<std::string> seen{f.blocks[0].label};
  std::vector<std::string> work{f.blocks[0].label};
  while (!work.empty()) {
    auto *b = f.find_block(work.back());
    work.pop_back();
    if (!b) continue;
    for (auto &s : successors(b->term))
      if (seen.insert(s).second) work.push_back(s);
  }
  size_t before = f.blocks.size();
  std::erase_if(f.blocks, [&](const BasicBlock &b) { return !seen.count(b.label); });
  size_t phis_before = 0, phis_after = 0;
  for (auto &b : f.blocks)
    for (auto &p : b.phis) phis_before += p.incoming.size();
  prune_phis(f);
  for (auto &b : f.blocks)
    for (auto &p : b.phis) phis_after += p.incoming.size();
  return before != f.blocks.size() || phis_before != phis_after;
}

// --- constant folding ------------------------------------------------------------

static bool same_literal(const Operand &a, const Operand &b) {
  if (a.index() != b.index()) return false;
  if (auto *x = std::get_if<double>(&a))
    return std::bit_cast<uint64_t>(*x) == std::bit_cast<uint64_t>(std::get<double>(b));
  if (auto *v = std::get_if<VReg>(&a)) return v->id == std::get<VReg>(b).id;
  return a == b;
}

bool fold_function(Function &f) {
  bool any = false;
  for (bool changed = true; changed;) {
    changed = false;
    std::unordered_map<int, Operand> subst;
    auto resolve = [&](Operand &o) {
      for (int guard = 0; guard < 64; ++guard) {
        auto *v = std::get_if<VReg>(&o);
        if (!v) return;
        auto it = subst.find(v->id);
        if (it == subst.end()) return;
        o = it->second;
      }
    };

    for (auto &b : f.blocks) {
      for (auto it = b.phis.begin(); it != b.phis.end();) {
        for (auto &in : it->incoming) resolve(in.first);
        bool uniform = !it->incoming.empty();
        for (auto &in : it->incoming)
          uniform = uniform && same_literal(in.first, it->incoming.front().first);
        if (uniform && !same_literal(it->incoming.front().first, it->dst)) {
          subst[it->dst.id] = it->incoming.front().first;
          it = b.phis.erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
      for (auto it = b.body.begin(); it != b.body.end();) {
        for_each_operand(*it, resolve);
        std::optional<Operand> value;
        if (auto *op = std::get_if<BinOp>(&*it)) {
          auto l = as_literal(op->lhs), r = as_literal(op->rhs);
          if (l && r) {
            try {
              value = to_operand(eval_binop(op->op, *l, *r));
            } catch (const std::runtime_error &) {
            }
          }
        } else if (auto *c = std::get_if<Cmp>(&*it)) {
          auto l = as_literal(c->lhs), r = as_literal(c->rhs);
          if (l && r) value = Operand{eval_cmp(c->op, *l, *r)};
        } else if (auto *s = std::get_if<Select>(&*it)) {
          if (auto c = as_literal(s->cond)) value = truthy(*c) ? s->if_true : s->if_false;
        }
        if (value) {
          subst[defined_vreg(*it)->id] = *value;
          it = b.body.erase(it);
          changed = true;
        } else {
          ++it;
        }
      }
      for_each_operand(b.term, resolve);
      if (auto *br = std::get_if<Branch>(&b.term)) {
        if (auto c = as_literal(br->cond)) {
          b.term = Jump{truthy(*c) ? br->if_true : br->if_false};
          changed = true;
        }
      }
    }
    // Late substitutions may feed uses that were visited earlier.
    if (!subst.empty()) {
      for (auto &b : f.blocks) {
        for (auto &p : b.phis)
          for (auto &in : p.incoming) resolve(in.first);
        for (auto &ins : b.body) for_each_operand(ins, resolve);
        for_each_operand(b.term, resolve);
      }
    }
    if (remove_unreachable(f)) changed = true;
    any = any || changed;
  }
  return any;
}

Module fold_constants(const Module &m) {
  Module out = m;
  for (auto &f : out.functions) fold_function(f);
  return out;
}

// --- flatten -----------------------------------------------------------------------

namespace {

class Namer {
public:
  explicit Namer(Function &f) : f_(f) {
    for (auto &v : f.vregs) vnames_.insert(v.name);
    for (auto &b : f.blocks) labels_.insert(b.label);
  }

  VReg vreg(const std::string &base, Type t) {
    std::string n = uniq(vnames_, base);
    f_.vregs.push_back({n, t});
    return VReg{static_cast<int>(f_.vregs.size()) - 1};
  }
  std::string label(const std::string &base) { return uniq(labels_, base); }

private:
  Function &f_;
  std::unordered_set<std::string> vnames_, labels_;
  std::unordered_map<std::string, int> next_;

  std::string uniq(std::unordered_set<std::string> &set, const std::string &base) {
    std::string n = base;
    int &k = next_[base];
    while (set.count(n)) n = base + "." + std::to_string(++k);
    set.insert(n);
    return n;
  }
};

// Rewrites labels and vregs of copied code.
struct Remap {
  std::unordered_map<int, Operand> vals;
  std::unordered_map<int, QubitRef> qubits;
  std::unordered_map<std::string, std::string> labels;

  void operand(Operand &o) const {
    if (auto *v = std::get_if<VReg>(&o)) {
      auto it = vals.find(v->id);
      if (it != vals.end()) o = it->second;
    }
  }
  void qubit(QubitRef &q) const {
    if (!q.param) return;
    auto it = qubits.find(q.index);
    if (it != qubits.end()) q = it->second;
  }
  void label(std::string &l) const {
    auto it = labels.find(l);
    if (it != labels.end()) l = it->second;
  }
  void vreg(VReg &v) const {
    Operand o = v;
    operand(o);
    v = std::get<VReg>(o);
  }

  void instruction(Instruction &ins) const {
    for_each_operand(ins, [&](Operand &o) { operand(o); });
    std::visit(
        [&](auto &i) {
          using T = std::decay_t<decltype(i)>;
          if constexpr (std::is_same_v<T, QGate>) {
            for (auto &q : i.qubits) qubit(q);
          } else if constexpr (std::is_same_v<T, Measure> || std::is_same_v<T, Reset>) {
            qubit(i.qubit);
          } else if constexpr (std::is_same_v<T, Call>) {
            for (auto &a : i.args)
              if (a.is_qubit) qubit(a.qubit);
          }
          if constexpr (std::is_same_v<T, ReadResult> || std::is_same_v<T, BinOp> ||
                        std::is_same_v<T, Cmp> || std::is_same_v<T, Select>)
            vreg(i.dst);
        },
        ins);
  }

  void block(BasicBlock &b) const {
    label(b.label);
    for (auto &p : b.phis) {
      vreg(p.dst);
      for (auto &in : p.incoming) {
        operand(in.first);
        label(in.second);
      }
    }
    for (auto &i : b.body) instruction(i);
    for_each_operand(b.term, [&](Operand &o) { operand(o); });
    for_each_target(b.term, [&](std::string &l) { label(l); });
  }
};

// Gives every vreg defined in `code` a fresh name in `f`.
void fresh_defs(const Function &src, const std::vector<BasicBlock> &code,
                const std::vector<Instruction> &extra, Namer &namer, Remap &r) {
  auto def = [&](VReg v) {
    VRegInfo info = src.info(v);
    r.vals[v.id] = namer.vreg(info.name, info.type);
  };
  for (auto &b : code) {
    for (auto &p : b.phis) def(p.dst);
    for (auto &i : b.body)
      if (auto d = defined_vreg(i)) def(*d);
  }
  for (auto &i : extra)
    if (auto d = defined_vreg(i)) def(*d);
}

class Flattener {
public:
  Flattener(const Module &m, const FlattenConfig &cfg)
      : m_(m), cfg_(cfg), f_(m.entry_function()), namer_(f_) {
    for (auto &b : f_.blocks) depth_[b.label] = 0;
  }

  Function run() {
    for (;;) {
      fold_function(f_);
      Cfg g = Cfg::build(f_);
      auto back = g.back_edges();
      if (!back.empty()) {
        peel(g, back.front().to);
        continue;
      }
      if (!inline_first_call()) break;
    }
    return std::move(f_);
  }

private:
  const Module &m_;
  FlattenConfig cfg_;
  Function f_;
  Namer namer_;
  std::unordered_map<std::string, int> depth_;
  std::unordered_map<std::string, int> peels_;
  int counter_ = 0;

  void peel(const Cfg &g, int h) {
    const std::string header = g.nodes[h];
    // n trips need n+1 peels: the last one exposes the failing exit test.
    if (++peels_[header] > cfg_.max_unroll + 1)
      throw BudgetExceeded("loop at " + header + " exceeds max_unroll=" +
                           std::to_string(cfg_.max_unroll));
    // Natural loop of all back edges into h.
    std::set<int> body{h};
    std::vector<int> work;
    std::set<int> latches;
    for (auto &e : g.back_edges())
      if (e.to == h) {
        latches.insert(e.from);
        if (body.insert(e.from).second) work.push_back(e.from);
      }
    while (!work.empty()) {
      int n = work.back();
      work.pop_back();
      for (int e : g.pred[n]) {
        int p = g.edges[e].from;
        if (body.insert(p).second) work.push_back(p);
      }
    }
    std::set<std::string> members;
    for (int n : body) members.insert(g.nodes[n]);

    std::vector<BasicBlock> orig;
    for (auto &b : f_.blocks)
      if (members.count(b.label)) orig.push_back(b);
    Remap r;
    fresh_defs(f_, orig, {}, namer_, r);
    const int k = ++counter_;
    for (auto &b : orig) r.labels[b.label] = namer_.label(b.label + ".p" + std::to_string(k));
    const std::string new_header = r.labels.at(header);

    // Escaping values would need SSA repair; generated loops never have them.
    std::unordered_set<int> loop_defs;
    for (auto &[id, v] : r.vals) loop_defs.insert(id);
    for (auto &b : f_.blocks) {
      if (members.count(b.label)) continue;
      for (auto &ins : b.body)
        for (auto &o : used_operands(ins))
          if (auto *v = std::get_if<VReg>(&o); v && loop_defs.count(v->id))
            throw std::runtime_error("value defined in loop at " + header +
                                     " is used outside the loop");
    }

    std::vector<BasicBlock> copies;
    for (auto &b : orig) {
      BasicBlock c = b;
      if (b.label == header) {
        for (auto &p : c.phis)
          std::erase_if(p.incoming, [&](auto &in) { return members.count(in.second); });
      }
      r.block(c);
      // Back edges of the copy continue into the remaining loop.
      for_each_target(c.term, [&](std::string &t) {
        if (t == new_header) t = header;
      });
      copies.push_back(std::move(c));
    }

    for (auto &b : f_.blocks) {
      if (members.count(b.label)) {
        if (b.label == header) {
          for (auto &p : b.phis) {
            std::vector<std::pair<Operand, std::string>> in;
            for (auto &x : p.incoming)
              if (members.count(x.second)) in.push_back(x);
            for (auto &x : p.incoming)
              if (members.count(x.second) && latches.count(g.index(x.second))) {
                Operand v = x.first;
                r.operand(v);
                in.push_back({v, r.labels.at(x.second)});
              }
            p.incoming = std::move(in);
          }
        }
        continue;
      }
      for_each_target(b.term, [&](std::string &t) {
        if (t == header) t = new_header;
      });
      // Exits gain an edge from the copied exiting block.
      for (auto &p : b.phis) {
        std::vector<std::pair<Operand, std::string>> add;
        for (auto &x : p.incoming)
          if (members.count(x.second)) {
            Operand v = x.first;
            r.operand(v);
            add.push_back({v, r.labels.at(x.second)});
          }
        p.incoming.insert(p.incoming.end(), add.begin(), add.end());
      }
    }
    int pos = f_.block_index(header);
    int d = depth_[header];
    for (auto &c : copies) depth_[c.label] = d;
    f_.blocks.insert(f_.blocks.begin() + pos, copies.begin(), copies.end());
  }

  bool inline_first_call() {
    for (size_t bi = 0; bi < f_.blocks.size(); ++bi)
      for (size_t ii = 0; ii < f_.blocks[bi].body.size(); ++ii)
        if (std::holds_alternative<Call>(f_.blocks[bi].body[ii])) {
          inline_call(bi, ii);
          return true;
        }
    return false;
  }

  void inline_call(size_t bi, size_t ii) {
    const Call call = std::get<Call>(f_.blocks[bi].body[ii]);
    const Function *callee = m_.find(call.callee);
    if (!callee) throw std::runtime_error("call to undefined @" + call.callee);
    if (callee->params.size() != call.args.size())
      throw std::runtime_error("wrong argument count for @" + call.callee);
    const std::string site = f_.blocks[bi].label;
    const int d = depth_[site] + 1;
    if (d > cfg_.max_inline_depth)
      throw BudgetExceeded("call chain through @" + call.callee + " exceeds max_inline_depth=" +
                           std::to_string(cfg_.max_inline_depth));
    const int k = ++counter_;

    // Callee copy.
    Remap rc;
    for (size_t i = 0; i < callee->params.size(); ++i) {
      int pid = callee->params[i].id;
      if (call.args[i].is_qubit) rc.qubits[pid] = call.args[i].qubit;
      else rc.vals[pid] = call.args[i].value;
    }
    {
      // Fresh vregs for callee-defined values; names come from the callee.
      auto def = [&](VReg v) {
        VRegInfo info = callee->info(v);
        rc.vals[v.id] = namer_.vreg(info.name, info.type);
      };
      for (auto &b : callee->blocks) {
        for (auto &p : b.phis) def(p.dst);
        for (auto &i : b.body)
          if (auto dv = defined_vreg(i)) def(*dv);
      }
    }
    const std::string prefix = call.callee + "." + std::to_string(k) + ".";
    for (auto &b : callee->blocks) rc.labels[b.label] = namer_.label(prefix + b.label);
    std::vector<BasicBlock> body;
    std::vector<size_t> rets;
    for (auto &b : callee->blocks) {
      BasicBlock c = b;
      rc.block(c);
      if (std::holds_alternative<Return>(c.term)) rets.push_back(body.size());
      body.push_back(std::move(c));
    }
    for (auto &c : body) depth_[c.label] = d;

    // Split the call site.
    BasicBlock &B = f_.blocks[bi];
    std::vector<Instruction> post(B.body.begin() + static_cast<long>(ii) + 1, B.body.end());
    B.body.resize(ii);
    Terminator term = B.term;
    B.term = Jump{body.front().label};

    // Continuation region: everything reachable from the split block's
    // successors. Snapshot before edges are renamed.
    std::set<std::string> region;
    {
      std::vector<std::string> work = successors(term);
      for (auto &s : work) region.insert(s);
      while (!work.empty()) {
        auto *b = f_.find_block(work.back());
        work.pop_back();
        if (!b) continue;
        for (auto &s : successors(b->term))
          if (region.insert(s).second) work.push_back(s);
      }
    }
    std::vector<BasicBlock> region_blocks;
    for (auto &b : f_.blocks)
      if (region.count(b.label)) region_blocks.push_back(b);

    std::vector<std::vector<BasicBlock>> extra(body.size());
    for (size_t r = 0; r < rets.size(); ++r) {
      BasicBlock &ret = body[rets[r]];
      if (r == 0) {
        ret.body.insert(ret.body.end(), post.begin(), post.end());
        ret.term = term;
        for (auto &b : f_.blocks)
          if (region.count(b.label))
            for (auto &p : b.phis)
              for (auto &in : p.incoming)
                if (in.second == site) in.second = ret.label;
        continue;
      }
      // Every further return gets its own copy of the continuation.
      Remap rr;
      fresh_defs(f_, region_blocks, post, namer_, rr);
      for (auto &b : region_blocks)
        rr.labels[b.label] = namer_.label(b.label + ".c" + std::to_string(k) + "_" + std::to_string(r));
      for (auto i : post) {
        rr.instruction(i);
        ret.body.push_back(std::move(i));
      }
      Terminator t = term;
      for_each_operand(t, [&](Operand &o) { rr.operand(o); });
      for_each_target(t, [&](std::string &l) { rr.label(l); });
      ret.term = t;
      for (auto &b : region_blocks) {
        BasicBlock c = b;
        for (auto &p : c.phis)
          std::erase_if(p.incoming, [&](auto &in) {
            return in.second != site && !region.count(in.second);
          });
        for (auto &p : c.phis)
          for (auto &in : p.incoming)
            if (in.second == site) in.second = ret.label;
        rr.block(c);
        depth_[c.label] = depth_[b.label];
        extra[rets[r]].push_back(std::move(c));
      }
    }

    std::vector<BasicBlock> inserted;
    for (size_t i = 0; i < body.size(); ++i) {
      inserted.push_back(std::move(body[i]));
      for (auto &c : extra[i]) inserted.push_back(std::move(c));
    }
    f_.blocks.insert(f_.blocks.begin() + static_cast<long>(bi) + 1,
                     std::make_move_iterator(inserted.begin()),
                     std::make_move_iterator(inserted.end()));
  }
};

} // namespace

Module flatten(const Module &m, const FlattenConfig &cfg) {
  Module out;
  out.name = m.name;
  out.entry = m.entry;
  out.required_qubits = m.required_qubits;
  out.required_results = m.required_results;
  out.functions.push_back(Flattener(m, cfg).run());
  return out;
}

// --- peephole ----------------------------------------------------------------------

namespace {

using Mat4 = std::array<cplx, 16>;

Mat4 identity4() {
  Mat4 m{};
  for (int i = 0; i < 4; ++i) m[i * 4 + i] = 1;
  return m;
}

Mat4 mul4(const Mat4 &a, const Mat4 &b) {
  Mat4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) r[i * 4 + j] += a[i * 4 + k] * b[k * 4 + j];
  return r;
}

// Two-qubit embedding; qubit variable v is bit v of the basis index.
Mat4 embed(const GateTemplate &g, const std::vector<double> &angles, bool replacement) {
  Mat4 m{};
  if (g.name == "cx") {
    int c = g.qvars[0], t = g.qvars[1];
    for (int i = 0; i < 4; ++i) {
      int j = ((i >> c) & 1) ? i ^ (1 << t) : i;
      m[j * 4 + i] = 1;
    }
    return m;
  }
  double a = 0;
  if (replacement)
    for (int v : g.angle_vars) a += angles[v];
  else if (!g.angle_vars.empty())
    a = angles[g.angle_vars[0]];
  Mat2 u = gate_matrix(g.name, a);
  int q = g.qvars[0];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (((i >> (1 - q)) & 1) != ((j >> (1 - q)) & 1)) continue;
      int bi = (i >> q) & 1, bj = (j >> q) & 1;
      m[i * 4 + j] = u[bi * 2 + bj];
    }
  return m;
}

Mat4 sequence(const std::vector<GateTemplate> &gs, const std::vector<double> &angles,
              bool replacement) {
  Mat4 m = identity4();
  for (auto &g : gs) m = mul4(embed(g, angles, replacement), m);
  return m;
}

bool equal_up_to_phase(const Mat4 &a, const Mat4 &b) {
  int k = 0;
  for (int i = 1; i < 16; ++i)
    if (std::abs(a[i]) > std::abs(a[k])) k = i;
  if (std::abs(b[k]) < 1e-12) return false;
  cplx phase = a[k] / b[k];
  if (std::abs(std::abs(phase) - 1) > 1e-9) return false;
  for (int i = 0; i < 16; ++i)
    if (std::abs(a[i] - phase * b[i]) > 1e-9) return false;
  return true;
}

} // namespace

RewriteRule make_rule(std::string name, std::vector<GateTemplate> pattern,
                      std::vector<GateTemplate> replacement) {
  if (pattern.empty()) throw InvalidRule(name + ": empty pattern");
  if (replacement.size() >= pattern.size())
    throw InvalidRule(name + ": replacement must be shorter than the pattern");
  int nangles = 0;
  std::set<int> first(pattern[0].qvars.begin(), pattern[0].qvars.end());
  auto check_gate = [&](const GateTemplate &g, bool in_pattern) {
    auto gi = gate_info(g.name);
    if (!gi) throw InvalidRule(name + ": unknown gate " + g.name);
    if (static_cast<int>(g.qvars.size()) != gi->arity)
      throw InvalidRule(name + ": arity mismatch for " + g.name);
    for (int q : g.qvars) {
      if (q < 0 || q > 1) throw InvalidRule(name + ": rules act on at most two qubits");
      if (!first.count(q)) throw InvalidRule(name + ": qubit variables must appear in the first gate");
    }
    if (gi->has_angle) {
      if (in_pattern && g.angle_vars.size() != 1)
        throw InvalidRule(name + ": pattern rotations take one angle variable");
      if (!in_pattern && g.angle_vars.empty())
        throw InvalidRule(name + ": replacement rotation needs an angle");
    } else if (!g.angle_vars.empty()) {
      throw InvalidRule(name + ": " + g.name + " takes no angle");
    }
    for (int v : g.angle_vars) nangles = std::max(nangles, v + 1);
  };
  for (auto &g : pattern) check_gate(g, true);
  for (auto &g : replacement) check_gate(g, false);

  const double samples[][3] = {{0.3711, -1.234, 2.5}, {1.9, 0.05, -0.7}, {-2.8, 3.1, 0.9}};
  for (auto &s : samples) {
    std::vector<double> angles(std::max(nangles, 3));
    for (int i = 0; i < 3; ++i) angles[i] = s[i];
    if (!equal_up_to_phase(sequence(pattern, angles, false), sequence(replacement, angles, true)))
      throw InvalidRule(name + ": pattern and replacement are not unitarily equivalent");
  }
  return RewriteRule{std::move(name), std::move(pattern), std::move(replacement)};
}

const std::vector<RewriteRule> &default_rules() {
  static const std::vector<RewriteRule> rules = [] {
    auto one = [](const char *g) { return GateTemplate{g, {0}, {}}; };
    std::vector<RewriteRule> r;
    r.push_back(make_rule("hh", {one("h"), one("h")}, {}));
    r.push_back(make_rule("xx", {one("x"), one("x")}, {}));
    r.push_back(make_rule("zz", {one("z"), one("z")}, {}));
    r.push_back(make_rule("tt", {one("t"), one("t")}, {one("s")}));
    r.push_back(make_rule("ss", {one("s"), one("s")}, {one("z")}));
    r.push_back(make_rule("t_tdg", {one("t"), one("tdg")}, {}));
    r.push_back(make_rule("tdg_t", {one("tdg"), one("t")}, {}));
    r.push_back(make_rule("s_sdg", {one("s"), one("sdg")}, {}));
    r.push_back(make_rule("sdg_s", {one("sdg"), one("s")}, {}));
    r.push_back(make_rule("rz_merge", {{"rz", {0}, {0}}, {"rz", {0}, {1}}}, {{"rz", {0}, {0, 1}}}));
    r.push_back(make_rule("cx_cx", {{"cx", {0, 1}, {}}, {"cx", {0, 1}, {}}}, {}));
    return r;
  }();
  return rules;
}

namespace {

// Next instruction after `i` that touches any of `qs`; calls touch everything.
std::optional<size_t> next_touching(const std::vector<Instruction> &body, size_t i,
                                    const std::vector<QubitRef> &qs) {
  for (size_t j = i + 1; j < body.size(); ++j) {
    if (std::holds_alternative<Call>(body[j])) return j;
    for (auto &q : qubits_of(body[j]))
      if (std::find(qs.begin(), qs.end(), q) != qs.end()) return j;
  }
  return std::nullopt;
}

struct Match {
  std::vector<size_t> at;
  std::vector<QubitRef> qv;
  std::vector<double> angles;
};

bool bind(const GateTemplate &t, const Instruction &ins, Match &m) {
  auto *g = std::get_if<QGate>(&ins);
  if (!g || g->name != t.name || g->qubits.size() != t.qvars.size()) return false;
  for (size_t k = 0; k < t.qvars.size(); ++k) {
    QubitRef &slot = m.qv[t.qvars[k]];
    if (slot.index < 0) slot = g->qubits[k];
    else if (!(slot == g->qubits[k])) return false;
  }
  for (size_t k = 0; k < g->qubits.size(); ++k)
    for (size_t l = k + 1; l < g->qubits.size(); ++l)
      if (g->qubits[k] == g->qubits[l]) return false;
  if (!t.angle_vars.empty()) {
    if (!g->angle) return false;
    auto *d = std::get_if<double>(&*g->angle);
    if (!d) return false;
    m.angles[t.angle_vars[0]] = *d;
  }
  return true;
}

std::optional<Match> match_at(const std::vector<Instruction> &body, size_t i,
                              const RewriteRule &r) {
  Match m;
  m.qv.assign(2, QubitRef{-1, false});
  m.angles.assign(4, 0.0);
  if (!bind(r.pattern[0], body[i], m)) return std::nullopt;
  m.at.push_back(i);
  std::vector<QubitRef> qs = std::get<QGate>(body[i]).qubits;
  size_t cur = i;
  for (size_t k = 1; k < r.pattern.size(); ++k) {
    auto j = next_touching(body, cur, qs);
    if (!j || !bind(r.pattern[k], body[*j], m)) return std::nullopt;
    m.at.push_back(*j);
    cur = *j;
  }
  return m;
}

std::vector<Instruction> instantiate(const RewriteRule &r, const Match &m) {
  std::vector<Instruction> out;
  for (auto &t : r.replacement) {
    QGate g;
    g.name = t.name;
    for (int q : t.qvars) g.qubits.push_back(m.qv[q]);
    if (!t.angle_vars.empty()) {
      double a = 0;
      for (int v : t.angle_vars) a += m.angles[v];
      g.angle = a;
    }
    out.emplace_back(std::move(g));
  }
  return out;
}

} // namespace

Module peephole(const Module &m, const std::vector<RewriteRule> &rules, PeepholeStats *stats) {
  Module out = m;
  PeepholeStats st;
  for (auto &f : out.functions)
    for (auto &b : f.blocks) {
      int iterations = 0;
      for (bool changed = true; changed;) {
        changed = false;
        for (size_t i = 0; i < b.body.size(); ++i) {
          for (auto &r : rules) {
            auto mt = match_at(b.body, i, r);
            if (!mt) continue;
            auto repl = instantiate(r, *mt);
            // Remove later matched gates first, then splice the replacement
            // in place of the first one.
            for (size_t k = mt->at.size(); k-- > 1;)
              b.body.erase(b.body.begin() + static_cast<long>(mt->at[k]));
            b.body.erase(b.body.begin() + static_cast<long>(i));
            b.body.insert(b.body.begin() + static_cast<long>(i), repl.begin(), repl.end());
            ++st.rewrites;
            changed = true;
            break;
          }
        }
        if (changed) ++iterations;
      }
      st.max_block_iterations = std::max(st.max_block_iterations, iterations);
    }
  if (stats) *stats = st;
  return out;
}

} // namespace qirq
