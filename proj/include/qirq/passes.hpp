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

#include <stdexcept>
#include <string>
#include <vector>

#include "qirq/ir.hpp"

namespace qirq {

// Replaces literal-only BinOp/Cmp/Select results by their values, resolves
// branches on literal conditions, and drops blocks that become unreachable.
Module fold_constants(const Module &m);
bool fold_function(Function &f);

// Deletes blocks unreachable from the entry and prunes phi incomings whose
// edge no longer exists. Returns true if anything changed.
bool remove_unreachable(Function &f);

struct FlattenConfig {
  int max_inline_depth = 64;
  int max_unroll = 64;
};

class BudgetExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Inlines every call and peels every loop of the entry function until the
// CFG is call-free and acyclic. Returned module holds only the entry function.
Module flatten(const Module &m, const FlattenConfig &cfg = {});

// Gate template over pattern-local qubit variables. In a pattern each
// rotation carries one angle variable; in a replacement the angle is the sum
// of the listed variables.
struct GateTemplate {
  std::string name;
  std::vector<int> qvars;
  std::vector<int> angle_vars;
};

struct RewriteRule {
  std::string name;
  std::vector<GateTemplate> pattern;
  std::vector<GateTemplate> replacement;
};

class InvalidRule : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Checks shape constraints and unitary equivalence (up to global phase) of
// pattern and replacement with a small matrix oracle; throws InvalidRule.
RewriteRule make_rule(std::string name, std::vector<GateTemplate> pattern,
                      std::vector<GateTemplate> replacement);

const std::vector<RewriteRule> &default_rules();

struct PeepholeStats {
  int rewrites = 0;
  int max_block_iterations = 0;
};

Module peephole(const Module &m, const std::vector<RewriteRule> &rules = default_rules(),
                PeepholeStats *stats = nullptr);

} // namespace qirq
