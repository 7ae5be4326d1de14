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

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qirq/ir.hpp"

namespace qirq {

// Boolean predicate over block guards and branch conditions. A Block node
// stands for the named guard register of that block, which keeps guard
// expressions linear in size.
struct Guard {
  enum class Kind : uint8_t { True, Block, Cond, And, Or, Not };
  Kind kind = Kind::True;
  std::string block;
  Operand cond = false;
  std::vector<Guard> args;

  static Guard truth() { return {}; }
  static Guard of_block(std::string label) { return {Kind::Block, std::move(label), false, {}}; }
  static Guard of_cond(Operand c) { return {Kind::Cond, {}, c, {}}; }
  static Guard conj(Guard a, Guard b);
  static Guard disj(std::vector<Guard> terms);
  static Guard negate(Guard a) { return {Kind::Not, {}, false, {std::move(a)}}; }

  std::string to_string(const Function &f) const;
  friend bool operator==(const Guard &, const Guard &);
};

// Substitutes every Block node by that block's guard, recursively.
Guard expand(const Guard &g, const std::map<std::string, Guard> &guards);

std::map<std::string, Guard> compute_guards(const Function &f);

class NonSSA : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct GuardedBlock {
  std::string label;
  Guard guard;
  // Executed unconditionally before the guard check.
  std::vector<Instruction> guard_code;
  // Register (or `true`) tested before the body runs.
  Operand guard_reg = true;
  std::vector<Instruction> body;
};

// `vars` carries the function name, params and vreg table; its block list is
// empty.
struct GuardedFunction {
  Function vars;
  std::vector<GuardedBlock> blocks;
  int required_qubits = 0;
  int required_results = 0;
  int new_vregs = 0;
};

GuardedFunction if_convert(const Function &f);
// Converts the entry function and carries the module attributes.
GuardedFunction if_convert(const Module &m);

std::string emit_guarded(const GuardedFunction &gf);

} // namespace qirq
