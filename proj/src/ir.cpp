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

#include "qirq/ir.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

namespace qirq {

const char *type_name(Type t) {
  switch (t) {
  case Type::Int: return "int";
  case Type::Bool: return "bool";
  case Type::Float: return "float";
  case Type::Qubit: return "qubit";
  }
  return "?";
}

std::optional<Literal> as_literal(const Operand &o) {
  if (auto *i = std::get_if<int64_t>(&o)) return Literal{*i};
  if (auto *d = std::get_if<double>(&o)) return Literal{*d};
  if (auto *b = std::get_if<bool>(&o)) return Literal{*b};
  return std::nullopt;
}

Operand to_operand(const Literal &l) {
  return std::visit([](auto v) -> Operand { return v; }, l);
}

bool truthy(const Literal &l) {
  return std::visit([](auto v) { return v != 0; }, l);
}

static const char *const kBinOps[] = {"add", "sub", "mul", "and", "or", "xor"};
static const char *const kCmps[] = {"eq", "ne", "lt", "le", "gt", "ge"};
static const char *const kOutputs[] = {"array_start", "array_end", "tuple_start",
                                       "tuple_end", "result"};

const char *binop_name(BinOpKind k) { return kBinOps[static_cast<int>(k)]; }
const char *cmp_name(CmpKind k) { return kCmps[static_cast<int>(k)]; }
const char *output_name(OutputKind k) { return kOutputs[static_cast<int>(k)]; }

std::optional<BinOpKind> parse_binop(std::string_view s) {
  for (int i = 0; i < 6; ++i)
    if (s == kBinOps[i]) return static_cast<BinOpKind>(i);
  return std::nullopt;
}
std::optional<CmpKind> parse_cmp(std::string_view s) {
  for (int i = 0; i < 6; ++i)
    if (s == kCmps[i]) return static_cast<CmpKind>(i);
  return std::nullopt;
}
std::optional<OutputKind> parse_output(std::string_view s) {
  for (int i = 0; i < 5; ++i)
    if (s == kOutputs[i]) return static_cast<OutputKind>(i);
  return std::nullopt;
}

// --- Function / Module ---------------------------------------------------------

VReg Function::new_vreg(const std::string &base, Type t) {
  std::string name = base;
  auto taken = [&](const std::string &n) {
    return std::any_of(vregs.begin(), vregs.end(),
                       [&](const VRegInfo &v) { return v.name == n; });
  };
  for (int k = 1; taken(name); ++k) name = base + "." + std::to_string(k);
  vregs.push_back({name, t});
  return VReg{static_cast<int>(vregs.size()) - 1};
}

int Function::block_index(const std::string &label) const {
  for (size_t i = 0; i < blocks.size(); ++i)
    if (blocks[i].label == label) return static_cast<int>(i);
  return -1;
}

const BasicBlock *Function::find_block(const std::string &label) const {
  int i = block_index(label);
  return i < 0 ? nullptr : &blocks[i];
}

BasicBlock *Function::find_block(const std::string &label) {
  int i = block_index(label);
  return i < 0 ? nullptr : &blocks[i];
}

const Function *Module::find(const std::string &fn) const {
  for (auto &f : functions)
    if (f.name == fn) return &f;
  return nullptr;
}

Function *Module::find(const std::string &fn) {
  for (auto &f : functions)
    if (f.name == fn) return &f;
  return nullptr;
}

const Function &Module::entry_function() const {
  const Function *f = find(entry);
  if (!f) throw std::runtime_error("entry function @" + entry + " not found");
  return *f;
}

// --- structural equality -------------------------------------------------------

namespace {

struct EqCtx {
  const Function &fa, &fb;

  bool vreg(VReg a, VReg b) const {
    if (a.id < 0 || b.id < 0) return a.id == b.id;
    const auto &ia = fa.info(a), &ib = fb.info(b);
    return ia.name == ib.name && ia.type == ib.type;
  }
  bool operand(const Operand &a, const Operand &b) const {
    if (a.index() != b.index()) return false;
    if (auto *va = std::get_if<VReg>(&a)) return vreg(*va, std::get<VReg>(b));
    if (auto *da = std::get_if<double>(&a))
      return std::bit_cast<uint64_t>(*da) == std::bit_cast<uint64_t>(std::get<double>(b));
    return a == b;
  }
  bool qubit(const QubitRef &a, const QubitRef &b) const {
    if (a.param != b.param) return false;
    return a.param ? vreg(VReg{a.index}, VReg{b.index}) : a.index == b.index;
  }
  bool qubits(const std::vector<QubitRef> &a, const std::vector<QubitRef> &b) const {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
      if (!qubit(a[i], b[i])) return false;
    return true;
  }

  bool instr(const Instruction &a, const Instruction &b) const {
    if (a.index() != b.index()) return false;
    return std::visit(
        [&](const auto &x) -> bool {
          using T = std::decay_t<decltype(x)>;
          const T &y = std::get<T>(b);
          if constexpr (std::is_same_v<T, QGate>) {
            if (x.name != y.name || !qubits(x.qubits, y.qubits)) return false;
            if (x.angle.has_value() != y.angle.has_value()) return false;
            return !x.angle || operand(*x.angle, *y.angle);
          } else if constexpr (std::is_same_v<T, Measure>) {
            return qubit(x.qubit, y.qubit) && x.slot == y.slot;
          } else if constexpr (std::is_same_v<T, Reset>) {
            return qubit(x.qubit, y.qubit);
          } else if constexpr (std::is_same_v<T, ReadResult>) {
            return vreg(x.dst, y.dst) && x.slot == y.slot;
          } else if constexpr (std::is_same_v<T, BinOp> || std::is_same_v<T, Cmp>) {
            return x.op == y.op && vreg(x.dst, y.dst) && operand(x.lhs, y.lhs) &&
                   operand(x.rhs, y.rhs);
          } else if constexpr (std::is_same_v<T, Select>) {
            return vreg(x.dst, y.dst) && operand(x.cond, y.cond) &&
                   operand(x.if_true, y.if_true) && operand(x.if_false, y.if_false);
          } else if constexpr (std::is_same_v<T, Output>) {
            return x.kind == y.kind && (x.kind != OutputKind::Result || x.slot == y.slot);
          } else {
            if (x.callee != y.callee || x.args.size() != y.args.size()) return false;
            for (size_t i = 0; i < x.args.size(); ++i) {
              const auto &p = x.args[i], &q = y.args[i];
              if (p.is_qubit != q.is_qubit) return false;
              if (p.is_qubit ? !qubit(p.qubit, q.qubit) : !operand(p.value, q.value))
                return false;
            }
            return true;
          }
        },
        a);
  }

  bool term(const Terminator &a, const Terminator &b) const {
    if (a.index() != b.index()) return false;
    if (auto *j = std::get_if<Jump>(&a)) return j->target == std::get<Jump>(b).target;
    if (auto *br = std::get_if<Branch>(&a)) {
      const auto &bb = std::get<Branch>(b);
      return operand(br->cond, bb.cond) && br->if_true == bb.if_true &&
             br->if_false == bb.if_false;
    }
    return true;
  }
};

} // namespace

bool structurally_equal(const Function &a, const Function &b) {
  if (a.name != b.name || a.params.size() != b.params.size() ||
      a.blocks.size() != b.blocks.size())
    return false;
  EqCtx c{a, b};
  for (size_t i = 0; i < a.params.size(); ++i)
    if (!c.vreg(a.params[i], b.params[i])) return false;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    const auto &x = a.blocks[i], &y = b.blocks[i];
    if (x.label != y.label || x.phis.size() != y.phis.size() ||
        x.body.size() != y.body.size())
      return false;
    for (size_t k = 0; k < x.phis.size(); ++k) {
      const auto &p = x.phis[k], &q = y.phis[k];
      if (!c.vreg(p.dst, q.dst) || p.incoming.size() != q.incoming.size()) return false;
      for (size_t j = 0; j < p.incoming.size(); ++j)
        if (!c.operand(p.incoming[j].first, q.incoming[j].first) ||
            p.incoming[j].second != q.incoming[j].second)
          return false;
    }
    for (size_t k = 0; k < x.body.size(); ++k)
      if (!c.instr(x.body[k], y.body[k])) return false;
    if (!c.term(x.term, y.term)) return false;
  }
  return true;
}

bool structurally_equal(const Module &a, const Module &b) {
  if (a.name != b.name || a.entry != b.entry || a.required_qubits != b.required_qubits ||
      a.required_results != b.required_results || a.functions.size() != b.functions.size())
    return false;
  for (size_t i = 0; i < a.functions.size(); ++i)
    if (!structurally_equal(a.functions[i], b.functions[i])) return false;
  return true;
}

// --- instruction helpers -----------------------------------------------------------

std::optional<VReg> defined_vreg(const Instruction &ins) {
  return std::visit(
      [](const auto &i) -> std::optional<VReg> {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, ReadResult> || std::is_same_v<T, BinOp> ||
                      std::is_same_v<T, Cmp> || std::is_same_v<T, Select>)
          return i.dst;
        else
          return std::nullopt;
      },
      ins);
}

std::vector<Operand> used_operands(const Instruction &ins) {
  std::vector<Operand> out;
  Instruction copy = ins;
  for_each_operand(copy, [&](Operand &o) { out.push_back(o); });
  return out;
}

bool is_quantum(const Instruction &ins) {
  return std::holds_alternative<QGate>(ins) || std::holds_alternative<Measure>(ins) ||
         std::holds_alternative<Reset>(ins);
}

std::vector<QubitRef> qubits_of(const Instruction &ins) {
  if (auto *g = std::get_if<QGate>(&ins)) return g->qubits;
  if (auto *m = std::get_if<Measure>(&ins)) return {m->qubit};
  if (auto *r = std::get_if<Reset>(&ins)) return {r->qubit};
  if (auto *c = std::get_if<Call>(&ins)) {
    std::vector<QubitRef> q;
    for (auto &a : c->args)
      if (a.is_qubit) q.push_back(a.qubit);
    return q;
  }
  return {};
}

std::vector<std::string> successors(const Terminator &t) {
  if (auto *j = std::get_if<Jump>(&t)) return {j->target};
  if (auto *b = std::get_if<Branch>(&t)) return {b->if_true, b->if_false};
  return {};
}

std::optional<GateInfo> gate_info(std::string_view name) {
  static const std::map<std::string, GateInfo, std::less<>> table = {
      {"x", {1, false}},   {"y", {1, false}},  {"z", {1, false}},  {"h", {1, false}},
      {"s", {1, false}},   {"sdg", {1, false}}, {"t", {1, false}},  {"tdg", {1, false}},
      {"rx", {1, true}},   {"ry", {1, true}},  {"rz", {1, true}},  {"cx", {2, false}}};
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

Type literal_type(const Literal &l) {
  if (std::holds_alternative<int64_t>(l)) return Type::Int;
  if (std::holds_alternative<double>(l)) return Type::Float;
  return Type::Bool;
}

static double as_double(const Literal &l) {
  return std::visit([](auto v) { return static_cast<double>(v); }, l);
}

static int64_t as_int(const Literal &l) {
  if (auto *d = std::get_if<double>(&l)) return static_cast<int64_t>(*d);
  return std::visit([](auto v) { return static_cast<int64_t>(v); }, l);
}

Type binop_result_type(BinOpKind op, Type a, Type b) {
  switch (op) {
  case BinOpKind::Add:
  case BinOpKind::Sub:
  case BinOpKind::Mul:
    return (a == Type::Float || b == Type::Float) ? Type::Float : Type::Int;
  default:
    return (a == Type::Bool && b == Type::Bool) ? Type::Bool : Type::Int;
  }
}

Literal eval_binop(BinOpKind op, const Literal &a, const Literal &b) {
  bool fp = std::holds_alternative<double>(a) || std::holds_alternative<double>(b);
  switch (op) {
  case BinOpKind::Add:
  case BinOpKind::Sub:
  case BinOpKind::Mul:
    if (fp) {
      double x = as_double(a), y = as_double(b);
      return op == BinOpKind::Add ? x + y : op == BinOpKind::Sub ? x - y : x * y;
    } else {
      // Two's-complement wraparound, computed unsigned to stay defined.
      auto x = static_cast<uint64_t>(as_int(a)), y = static_cast<uint64_t>(as_int(b));
      uint64_t r = op == BinOpKind::Add ? x + y : op == BinOpKind::Sub ? x - y : x * y;
      return static_cast<int64_t>(r);
    }
  default: break;
  }
  if (fp) throw std::runtime_error(std::string("bitwise ") + binop_name(op) + " on float");
  if (std::holds_alternative<bool>(a) && std::holds_alternative<bool>(b)) {
    bool x = std::get<bool>(a), y = std::get<bool>(b);
    return op == BinOpKind::And ? (x && y) : op == BinOpKind::Or ? (x || y) : (x != y);
  }
  int64_t x = as_int(a), y = as_int(b);
  return op == BinOpKind::And ? (x & y) : op == BinOpKind::Or ? (x | y) : (x ^ y);
}

bool eval_cmp(CmpKind op, const Literal &a, const Literal &b) {
  bool fp = std::holds_alternative<double>(a) || std::holds_alternative<double>(b);
  auto cmp = [op](auto x, auto y) {
    switch (op) {
    case CmpKind::Eq: return x == y;
    case CmpKind::Ne: return x != y;
    case CmpKind::Lt: return x < y;
    case CmpKind::Le: return x <= y;
    case CmpKind::Gt: return x > y;
    case CmpKind::Ge: return x >= y;
    }
    return false;
  };
  return fp ? cmp(as_double(a), as_double(b)) : cmp(as_int(a), as_int(b));
}

// --- CFG -------------------------------------------------------------------------

Cfg Cfg::build(const Function &f) {
  Cfg g;
  std::unordered_map<std::string, int> idx;
  for (auto &b : f.blocks) {
    idx.emplace(b.label, static_cast<int>(g.nodes.size()));
    g.nodes.push_back(b.label);
  }
  g.succ.resize(g.nodes.size());
  g.pred.resize(g.nodes.size());
  auto add = [&](int from, const std::string &to, EdgeKind k) {
    auto it = idx.find(to);
    if (it == idx.end()) return;
    g.succ[from].push_back(static_cast<int>(g.edges.size()));
    g.pred[it->second].push_back(static_cast<int>(g.edges.size()));
    g.edges.push_back({from, it->second, k});
  };
  for (size_t i = 0; i < f.blocks.size(); ++i) {
    const auto &t = f.blocks[i].term;
    int from = static_cast<int>(i);
    if (auto *j = std::get_if<Jump>(&t)) {
      add(from, j->target, EdgeKind::Unconditional);
    } else if (auto *br = std::get_if<Branch>(&t)) {
      add(from, br->if_true, EdgeKind::TrueArm);
      add(from, br->if_false, EdgeKind::FalseArm);
    }
  }
  return g;
}

int Cfg::index(const std::string &label) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == label) return static_cast<int>(i);
  return -1;
}

std::vector<CfgEdge> Cfg::back_edges() const {
  std::vector<CfgEdge> out;
  if (nodes.empty()) return out;
  enum : uint8_t { White, Grey, Black };
  std::vector<uint8_t> color(nodes.size(), White);
  // Iterative DFS: (node, next successor position).
  std::vector<std::pair<int, size_t>> stack{{0, 0}};
  color[0] = Grey;
  while (!stack.empty()) {
    auto &[n, k] = stack.back();
    if (k == succ[n].size()) {
      color[n] = Black;
      stack.pop_back();
      continue;
    }
    const CfgEdge &e = edges[succ[n][k++]];
    if (color[e.to] == Grey) {
      out.push_back(e);
    } else if (color[e.to] == White) {
      color[e.to] = Grey;
      stack.push_back({e.to, 0});
    }
  }
  return out;
}

bool Cfg::acyclic() const {
  try {
    topo_sort(*this);
    return true;
  } catch (const CycleDetected &) {
    return false;
  }
}

std::vector<Terminator> reconstruct_terminators(const Cfg &cfg) {
  std::vector<Terminator> out;
  for (size_t n = 0; n < cfg.nodes.size(); ++n) {
    const auto &es = cfg.succ[n];
    if (es.empty()) {
      out.emplace_back(Return{});
    } else if (es.size() == 1 && cfg.edges[es[0]].kind == EdgeKind::Unconditional) {
      out.emplace_back(Jump{cfg.nodes[cfg.edges[es[0]].to]});
    } else {
      Branch b{VReg{}, "", ""};
      for (int e : es) {
        const auto &edge = cfg.edges[e];
        (edge.kind == EdgeKind::TrueArm ? b.if_true : b.if_false) = cfg.nodes[edge.to];
      }
      out.emplace_back(b);
    }
  }
  return out;
}

std::vector<std::string> topo_sort(const Cfg &cfg) {
  size_t n = cfg.nodes.size();
  std::vector<int> indeg(n, 0);
  for (auto &e : cfg.edges) ++indeg[e.to];
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push(static_cast<int>(i));
  std::vector<std::string> order;
  while (!ready.empty()) {
    int u = ready.top();
    ready.pop();
    order.push_back(cfg.nodes[u]);
    for (int e : cfg.succ[u])
      if (--indeg[cfg.edges[e].to] == 0) ready.push(cfg.edges[e].to);
  }
  if (order.size() != n) throw CycleDetected("control-flow graph contains a cycle");
  return order;
}

std::vector<int> dominators(const Cfg &cfg) {
  size_t n = cfg.nodes.size();
  std::vector<int> idom(n, -1);
  if (n == 0) return idom;
  // Reverse postorder from the entry.
  std::vector<int> post;
  std::vector<bool> seen(n, false);
  std::vector<std::pair<int, size_t>> stack{{0, 0}};
  seen[0] = true;
  while (!stack.empty()) {
    auto &[u, k] = stack.back();
    if (k == cfg.succ[u].size()) {
      post.push_back(u);
      stack.pop_back();
      continue;
    }
    int v = cfg.edges[cfg.succ[u][k++]].to;
    if (!seen[v]) {
      seen[v] = true;
      stack.push_back({v, 0});
    }
  }
  std::vector<int> rpo_num(n, -1);
  for (size_t i = 0; i < post.size(); ++i)
    rpo_num[post[i]] = static_cast<int>(post.size() - 1 - i);
  std::vector<int> rpo(post.rbegin(), post.rend());
  idom[0] = 0;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (rpo_num[a] > rpo_num[b]) a = idom[a];
      while (rpo_num[b] > rpo_num[a]) b = idom[b];
    }
    return a;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (int b : rpo) {
      if (b == 0) continue;
      int nd = -1;
      for (int e : cfg.pred[b]) {
        int p = cfg.edges[e].from;
        if (idom[p] < 0) continue;
        nd = nd < 0 ? p : intersect(p, nd);
      }
      if (nd != idom[b]) {
        idom[b] = nd;
        changed = true;
      }
    }
  }
  return idom;
}

// --- validation ---------------------------------------------------------------------

bool Diagnostics::has_errors() const {
  return std::any_of(items.begin(), items.end(),
                     [](const Diagnostic &d) { return d.severity == Severity::Error; });
}

bool Diagnostics::has(const std::string &code) const {
  return std::any_of(items.begin(), items.end(),
                     [&](const Diagnostic &d) { return d.code == code; });
}

std::string Diagnostics::to_string() const {
  std::ostringstream os;
  for (auto &d : items) {
    os << (d.severity == Severity::Error ? "error" : "warning") << " " << d.code;
    if (!d.function.empty()) os << " @" << d.function;
    if (!d.block.empty()) os << ":" << d.block;
    if (d.instr >= 0) os << "#" << d.instr;
    os << ": " << d.message << "\n";
  }
  return os.str();
}

namespace {

class Validator {
public:
  Validator(const Module &m, Strictness s) : m_(m), strict_(s == Strictness::Strict) {}

  Diagnostics run() {
    if (!m_.find(m_.entry))
      add(Severity::Error, "MISSING_ENTRY", "entry function @" + m_.entry + " not found");
    std::set<std::string> names;
    for (auto &f : m_.functions) {
      if (!names.insert(f.name).second)
        add(Severity::Error, "DUPLICATE_FUNCTION", "function @" + f.name + " defined twice");
      function(f);
    }
    return std::move(d_);
  }

private:
  const Module &m_;
  bool strict_;
  Diagnostics d_;
  const Function *fn_ = nullptr;
  std::string block_;
  int instr_ = -1;

  void add(Severity s, std::string code, std::string msg) {
    d_.items.push_back({s, std::move(code), std::move(msg), fn_ ? fn_->name : "", block_,
                        instr_});
  }

  void qubit(const QubitRef &q) {
    if (q.param) {
      if (q.index < 0 || q.index >= static_cast<int>(fn_->vregs.size()) ||
          fn_->info(VReg{q.index}).type != Type::Qubit)
        add(Severity::Error, "TYPE", "qubit operand is not a qubit parameter");
      return;
    }
    if (q.index < 0 || q.index >= m_.required_qubits)
      add(Severity::Error, "QUBIT_RANGE",
          "qubit q" + std::to_string(q.index) + " outside required_qubits=" +
              std::to_string(m_.required_qubits));
  }

  void slot(int s) {
    if (s < 0 || s >= m_.required_results)
      add(Severity::Error, "RESULT_RANGE",
          "result r" + std::to_string(s) + " outside required_results=" +
              std::to_string(m_.required_results));
  }

  void instruction(const Instruction &ins) {
    if (auto *g = std::get_if<QGate>(&ins)) {
      auto gi = gate_info(g->name);
      if (!gi) {
        add(Severity::Error, "UNKNOWN_GATE", "unknown gate '" + g->name + "'");
      } else {
        if (static_cast<int>(g->qubits.size()) != gi->arity)
          add(Severity::Error, "GATE_ARITY", g->name + " takes " +
                                                 std::to_string(gi->arity) + " qubit(s)");
        if (gi->has_angle != g->angle.has_value())
          add(Severity::Error, "GATE_ANGLE",
              g->name + (gi->has_angle ? " requires an angle" : " takes no angle"));
        if (g->qubits.size() == 2 && g->qubits[0] == g->qubits[1])
          add(Severity::Error, "GATE_ARITY", g->name + " operands must be distinct");
      }
      for (auto &q : g->qubits) qubit(q);
    } else if (auto *ms = std::get_if<Measure>(&ins)) {
      qubit(ms->qubit);
      slot(ms->slot);
    } else if (auto *r = std::get_if<Reset>(&ins)) {
      qubit(r->qubit);
    } else if (auto *rr = std::get_if<ReadResult>(&ins)) {
      slot(rr->slot);
    } else if (auto *o = std::get_if<Output>(&ins)) {
      if (o->kind == OutputKind::Result) slot(o->slot);
    } else if (auto *c = std::get_if<Call>(&ins)) {
      const Function *callee = m_.find(c->callee);
      if (!callee) {
        add(Severity::Error, "UNRESOLVED_CALL", "call to undefined @" + c->callee);
      } else {
        if (callee->params.size() != c->args.size())
          add(Severity::Error, "CALL_ARITY", "wrong argument count for @" + c->callee);
        if (strict_)
          add(Severity::Error, "CALL", "call to @" + c->callee + " must be flattened");
      }
      for (auto &a : c->args)
        if (a.is_qubit) qubit(a.qubit);
    }
  }

  void function(const Function &f) {
    fn_ = &f;
    block_.clear();
    instr_ = -1;
    if (f.blocks.empty()) {
      add(Severity::Error, "EMPTY_FUNCTION", "function has no blocks");
      fn_ = nullptr;
      return;
    }
    std::set<std::string> labels;
    for (auto &b : f.blocks)
      if (!labels.insert(b.label).second) {
        block_ = b.label;
        add(Severity::Error, "DUPLICATE_LABEL", "block label defined twice");
      }
    block_.clear();

    Cfg cfg = Cfg::build(f);
    for (auto &b : f.blocks) {
      block_ = b.label;
      instr_ = -1;
      for (auto &t : successors(b.term))
        if (!labels.count(t)) add(Severity::Error, "BAD_TARGET", "unknown target " + t);
      if (auto *br = std::get_if<Branch>(&b.term)) {
        if (br->if_true == br->if_false)
          add(Severity::Error, "DUPLICATE_TARGET", "branch arms are identical");
        auto *v = std::get_if<VReg>(&br->cond);
        if (!v || v->id < 0 || v->id >= static_cast<int>(f.vregs.size()) ||
            f.info(*v).type != Type::Bool)
          add(Severity::Error, "BRANCH_COND", "branch condition must be a bool vreg");
      }
    }
    block_.clear();
    for (auto &e : cfg.back_edges()) {
      block_ = cfg.nodes[e.from];
      add(strict_ ? Severity::Error : Severity::Warning, "BACK_EDGE",
          "back edge " + cfg.nodes[e.from] + " -> " + cfg.nodes[e.to]);
    }

    // Phi incoming labels must be exactly the CFG predecessors.
    for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
      const auto &b = f.blocks[bi];
      block_ = b.label;
      std::multiset<std::string> preds;
      for (int e : cfg.pred[bi]) preds.insert(cfg.nodes[cfg.edges[e].from]);
      for (auto &p : b.phis) {
        std::multiset<std::string> in;
        for (auto &[v, l] : p.incoming) in.insert(l);
        if (in != preds)
          add(Severity::Error, "PHI_PREDS",
              "phi %" + f.info(p.dst).name + " incoming labels differ from predecessors");
      }
    }

    for (auto &b : f.blocks) {
      block_ = b.label;
      for (size_t i = 0; i < b.body.size(); ++i) {
        instr_ = static_cast<int>(i);
        instruction(b.body[i]);
      }
    }
    instr_ = -1;
    block_.clear();
    ssa(f, cfg);
    fn_ = nullptr;
  }

  // Definition sites: block index and position (-2 params, -1 phis).
  void ssa(const Function &f, const Cfg &cfg) {
    const int nv = static_cast<int>(f.vregs.size());
    std::vector<std::pair<int, int>> def(nv, {-1, 0});
    std::vector<int> ndefs(nv, 0);
    auto define = [&](VReg v, int b, int pos) {
      if (v.id < 0 || v.id >= nv) return;
      if (ndefs[v.id]++ == 1)
        add(Severity::Error, "DOUBLE_DEF", "%" + f.info(v).name + " defined more than once");
      def[v.id] = {b, pos};
    };
    for (auto p : f.params) define(p, 0, -2);
    for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
      const auto &b = f.blocks[bi];
      block_ = b.label;
      for (auto &p : b.phis) define(p.dst, static_cast<int>(bi), -1);
      for (size_t i = 0; i < b.body.size(); ++i) {
        instr_ = static_cast<int>(i);
        if (auto d = defined_vreg(b.body[i])) define(*d, static_cast<int>(bi), static_cast<int>(i));
      }
      instr_ = -1;
    }

    std::vector<int> idom = dominators(cfg);
    auto dominates = [&](int a, int b) {
      if (idom[b] < 0) return false;
      for (int x = b;; x = idom[x]) {
        if (x == a) return true;
        if (x == idom[x]) return false;
      }
    };
    auto check = [&](const Operand &o, int b, int pos, bool at_end_of_pred) {
      auto *v = std::get_if<VReg>(&o);
      if (!v) return;
      if (v->id < 0 || v->id >= nv) {
        add(Severity::Error, "USE_BEFORE_DEF", "reference to unknown vreg");
        return;
      }
      auto [db, dp] = def[v->id];
      bool ok;
      if (db < 0) ok = false;
      else if (db == b) ok = at_end_of_pred || dp < pos;
      else ok = dominates(db, b);
      if (!ok)
        add(Severity::Error, "USE_BEFORE_DEF",
            "%" + f.info(*v).name + " used where its definition does not dominate");
    };

    for (size_t bi = 0; bi < f.blocks.size(); ++bi) {
      if (idom[bi] < 0) continue; // unreachable
      const auto &b = f.blocks[bi];
      block_ = b.label;
      for (auto &p : b.phis)
        for (auto &[val, lbl] : p.incoming) {
          int pi = cfg.index(lbl);
          if (pi >= 0 && idom[pi] >= 0) check(val, pi, 0, true);
        }
      for (size_t i = 0; i < b.body.size(); ++i) {
        instr_ = static_cast<int>(i);
        for (auto &o : used_operands(b.body[i])) check(o, static_cast<int>(bi), static_cast<int>(i), false);
        for (auto &q : qubits_of(b.body[i]))
          if (q.param) check(VReg{q.index}, static_cast<int>(bi), static_cast<int>(i), false);
      }
      instr_ = -1;
      Terminator t = b.term;
      for_each_operand(t, [&](Operand &o) {
        check(o, static_cast<int>(bi), static_cast<int>(b.body.size()), false);
      });
    }
    block_.clear();
  }
};

} // namespace

Diagnostics validate_profile(const Module &m, Strictness s) { return Validator(m, s).run(); }

} // namespace qirq
