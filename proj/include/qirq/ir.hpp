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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qirq {

enum class Type : uint8_t { Int, Bool, Float, Qubit };

const char *type_name(Type t);

struct VReg {
  int id = -1;
  friend bool operator==(VReg, VReg) = default;
};

// Runtime value of a classical register. Bools are kept distinct from ints so
// that folding and printing preserve the literal kind.
using Literal = std::variant<int64_t, double, bool>;
using Operand = std::variant<VReg, int64_t, double, bool>;

inline bool is_vreg(const Operand &o) { return std::holds_alternative<VReg>(o); }
std::optional<Literal> as_literal(const Operand &o);
Operand to_operand(const Literal &l);
bool truthy(const Literal &l);

// A qubit operand is a static index, or a qubit-typed parameter of the
// enclosing function (only meaningful before inlining).
struct QubitRef {
  int index = 0;
  bool param = false;
  friend bool operator==(const QubitRef &, const QubitRef &) = default;
};

enum class BinOpKind : uint8_t { Add, Sub, Mul, And, Or, Xor };
enum class CmpKind : uint8_t { Eq, Ne, Lt, Le, Gt, Ge };
enum class OutputKind : uint8_t { ArrayStart, ArrayEnd, TupleStart, TupleEnd, Result };

const char *binop_name(BinOpKind k);
const char *cmp_name(CmpKind k);
const char *output_name(OutputKind k);
std::optional<BinOpKind> parse_binop(std::string_view s);
std::optional<CmpKind> parse_cmp(std::string_view s);
std::optional<OutputKind> parse_output(std::string_view s);

struct QGate {
  std::string name;
  std::vector<QubitRef> qubits;
  std::optional<Operand> angle;
};
struct Measure {
  QubitRef qubit;
  int slot = 0;
};
struct Reset {
  QubitRef qubit;
};
struct ReadResult {
  VReg dst;
  int slot = 0;
};
struct BinOp {
  BinOpKind op = BinOpKind::Add;
  VReg dst;
  Operand lhs, rhs;
};
struct Cmp {
  CmpKind op = CmpKind::Eq;
  VReg dst;
  Operand lhs, rhs;
};
struct Select {
  VReg dst;
  Operand cond, if_true, if_false;
};
struct Output {
  OutputKind kind = OutputKind::ArrayStart;
  int slot = 0;
};
struct CallArg {
  bool is_qubit = false;
  QubitRef qubit;
  Operand value = int64_t{0};
};
struct Call {
  std::string callee;
  std::vector<CallArg> args;
};

using Instruction =
    std::variant<QGate, Measure, Reset, ReadResult, BinOp, Cmp, Select, Output, Call>;

struct Phi {
  VReg dst;
  std::vector<std::pair<Operand, std::string>> incoming;
};

struct Jump {
  std::string target;
};
struct Branch {
  Operand cond;
  std::string if_true, if_false;
};
struct Return {};
using Terminator = std::variant<Jump, Branch, Return>;

struct BasicBlock {
  std::string label;
  std::vector<Phi> phis;
  std::vector<Instruction> body;
  Terminator term = Return{};
};

struct VRegInfo {
  std::string name;
  Type type = Type::Int;
};

struct Function {
  std::string name;
  std::vector<VReg> params;
  std::vector<VRegInfo> vregs;
  std::vector<BasicBlock> blocks;

  VReg new_vreg(const std::string &base, Type t);
  const VRegInfo &info(VReg v) const { return vregs.at(v.id); }
  int block_index(const std::string &label) const;
  const BasicBlock *find_block(const std::string &label) const;
  BasicBlock *find_block(const std::string &label);
};

struct Module {
  std::string name = "main";
  std::vector<Function> functions;
  std::string entry;
  int required_qubits = 0;
  int required_results = 0;

  const Function *find(const std::string &fn) const;
  Function *find(const std::string &fn);
  const Function &entry_function() const;
};

// Structural equality. Virtual registers compare by name, so two modules
// built with different vreg numbering but identical text are equal.
bool structurally_equal(const Module &a, const Module &b);
bool structurally_equal(const Function &a, const Function &b);

// --- instruction helpers ---------------------------------------------------

std::optional<VReg> defined_vreg(const Instruction &ins);
std::vector<Operand> used_operands(const Instruction &ins);
// Applies f to every operand slot (including angles and call values).
template <typename F> void for_each_operand(Instruction &ins, F &&f);
template <typename F> void for_each_operand(Terminator &t, F &&f);
bool is_quantum(const Instruction &ins);
std::vector<QubitRef> qubits_of(const Instruction &ins);
std::vector<std::string> successors(const Terminator &t);

struct GateInfo {
  int arity;
  bool has_angle;
};
std::optional<GateInfo> gate_info(std::string_view name);

Literal eval_binop(BinOpKind op, const Literal &a, const Literal &b);
bool eval_cmp(CmpKind op, const Literal &a, const Literal &b);
Type binop_result_type(BinOpKind op, Type a, Type b);
Type literal_type(const Literal &l);

// --- CFG ---------------------------------------------------------------------

enum class EdgeKind : uint8_t { Unconditional, TrueArm, FalseArm };

struct CfgEdge {
  int from = 0, to = 0;
  EdgeKind kind = EdgeKind::Unconditional;
  friend bool operator==(const CfgEdge &, const CfgEdge &) = default;
};

struct Cfg {
  std::vector<std::string> nodes;
  std::vector<CfgEdge> edges;
  std::vector<std::vector<int>> succ, pred; // edge indices

  static Cfg build(const Function &f);
  int index(const std::string &label) const;
  bool acyclic() const;
  // Edges u->v where v is an ancestor of u in a DFS from the entry.
  std::vector<CfgEdge> back_edges() const;
};

// Terminator shapes recovered from the edge set alone; branch conditions are
// not part of the CFG, so Branch entries carry a placeholder condition.
std::vector<Terminator> reconstruct_terminators(const Cfg &cfg);

class CycleDetected : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> topo_sort(const Cfg &cfg);

// Immediate dominators by block index; idom[entry] == entry, -1 if unreachable.
std::vector<int> dominators(const Cfg &cfg);

// --- validation ----------------------------------------------------------

enum class Severity : uint8_t { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::string function;
  std::string block;
  int instr = -1;
};

struct Diagnostics {
  std::vector<Diagnostic> items;
  bool has_errors() const;
  bool has(const std::string &code) const;
  std::string to_string() const;
};

enum class Strictness : uint8_t { Lenient, Strict };

Diagnostics validate_profile(const Module &m, Strictness s = Strictness::Strict);

// --- template definitions ---------------------------------------------------

template <typename F> void for_each_operand(Instruction &ins, F &&f) {
  std::visit(
      [&](auto &i) {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, QGate>) {
          if (i.angle) f(*i.angle);
        } else if constexpr (std::is_same_v<T, BinOp> || std::is_same_v<T, Cmp>) {
          f(i.lhs);
          f(i.rhs);
        } else if constexpr (std::is_same_v<T, Select>) {
          f(i.cond);
          f(i.if_true);
          f(i.if_false);
        } else if constexpr (std::is_same_v<T, Call>) {
          for (auto &a : i.args)
            if (!a.is_qubit) f(a.value);
        }
      },
      ins);
}

template <typename F> void for_each_operand(Terminator &t, F &&f) {
  if (auto *b = std::get_if<Branch>(&t)) f(b->cond);
}

} // namespace qirq
