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
#include <set>
#include <stdexcept>
#include <vector>

#include "qirq/predication.hpp"

namespace qirq {

// Half-open interval over the linearized guarded sequence.
struct LiveRange {
  int begin = 0;
  int end = 0;
  bool empty() const { return end <= begin; }
  bool overlaps(const LiveRange &o) const {
    return !empty() && !o.empty() && begin < o.end && o.begin < end;
  }
  friend bool operator==(const LiveRange &, const LiveRange &) = default;
};

// Position layout per block: each guard_code instruction, then the guard
// check, then each body instruction. Function parameters are defined at 0 and
// the first block starts at 1. A block's guard register counts as used at the
// check and at every body position.
std::vector<LiveRange> compute_liveness(const GuardedFunction &gf);

struct InterferenceGraph {
  std::vector<int> nodes; // ascending vreg ids
  std::map<int, std::set<int>> adj;

  bool has_edge(int a, int b) const;
  size_t edge_count() const;
};

InterferenceGraph build_interference(const std::vector<LiveRange> &ranges);

struct RegFile {
  int k = 0;
  std::map<int, int> assignment;
  int colors_used() const;
};

class RegisterPressureExceeded : public std::runtime_error {
public:
  RegisterPressureExceeded(int k, int needed_hint);
  int k() const { return k_; }
  int needed_hint() const { return needed_hint_; }

private:
  int k_, needed_hint_;
};

RegFile color(const InterferenceGraph &g, int k);

// Renames every vreg to its register ("R<c>") and drops classical
// instructions whose result is never read.
GuardedFunction rewrite(const GuardedFunction &gf, const RegFile &rf);

struct Allocation {
  GuardedFunction code;
  RegFile regs;
};

Allocation allocate_registers(const GuardedFunction &gf, int k = 64);

} // namespace qirq
