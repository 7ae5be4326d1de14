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

#include "qirq/regalloc.hpp"

#include <algorithm>
#include <functional>
#include <string>

namespace qirq {

std::vector<LiveRange> compute_liveness(const GuardedFunction &gf) {
  const size_t n = gf.vars.vregs.size();
  std::vector<int> def(n, -1), last(n, -1);
  for (auto p : gf.vars.params) def[p.id] = 0;
  auto use = [&](const Operand &o, int pos) {
    if (auto *v = std::get_if<VReg>(&o)) last[v->id] = std::max(last[v->id], pos);
  };
  auto visit = [&](const Instruction &ins, int pos) {
    for (auto &o : used_operands(ins)) use(o, pos);
    if (auto d = defined_vreg(ins)) def[d->id] = pos;
  };
  int pos = 1;
  for (auto &b : gf.blocks) {
    for (auto &i : b.guard_code) visit(i, pos++);
    use(b.guard_reg, pos++);
    for (auto &i : b.body) {
      use(b.guard_reg, pos);
      visit(i, pos++);
    }
  }
  std::vector<LiveRange> out(n);
  for (size_t v = 0; v < n; ++v) {
    if (def[v] < 0) continue;
    out[v].begin = def[v];
    out[v].end = std::max(def[v], last[v]);
  }
  return out;
}

bool InterferenceGraph::has_edge(int a, int b) const {
  auto it = adj.find(a);
  return it != adj.end() && it->second.count(b);
}

size_t InterferenceGraph::edge_count() const {
  size_t e = 0;
  for (auto &[v, s] : adj) e += s.size();
  return e / 2;
}

InterferenceGraph build_interference(const std::vector<LiveRange> &ranges) {
  InterferenceGraph g;
  for (size_t v = 0; v < ranges.size(); ++v)
    if (!ranges[v].empty()) {
      g.nodes.push_back(static_cast<int>(v));
      g.adj[static_cast<int>(v)];
    }
  // Sweep in order of range start; only ranges still open can overlap.
  std::vector<int> order = g.nodes;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return ranges[a].begin < ranges[b].begin; });
  std::vector<int> open;
  for (int v : order) {
    std::erase_if(open, [&](int u) { return ranges[u].end <= ranges[v].begin; });
    for (int u : open) {
      g.adj[u].insert(v);
      g.adj[v].insert(u);
    }
    open.push_back(v);
  }
  return g;
}

int RegFile::colors_used() const {
  std::set<int> c;
  for (auto &[v, col] : assignment) c.insert(col);
  return static_cast<int>(c.size());
}

RegisterPressureExceeded::RegisterPressureExceeded(int k, int needed_hint)
    : std::runtime_error("register pressure exceeds real-time register file: " +
                         std::to_string(k) + " registers available, a clique of " +
                         std::to_string(needed_hint) + " simultaneously live values was found"),
      k_(k), needed_hint_(needed_hint) {}

static int greedy_clique(const InterferenceGraph &g, const std::set<int> &alive) {
  int best = alive.empty() ? 0 : 1;
  for (int seed : alive) {
    std::vector<int> clique{seed};
    for (int v : g.adj.at(seed)) {
      if (!alive.count(v)) continue;
      bool all = std::all_of(clique.begin(), clique.end(),
                             [&](int u) { return g.adj.at(u).count(v) > 0; });
      if (all) clique.push_back(v);
    }
    best = std::max(best, static_cast<int>(clique.size()));
  }
  return best;
}

RegFile color(const InterferenceGraph &g, int k) {
  if (k < 1) throw std::invalid_argument("register file needs at least one register");
  std::set<int> alive(g.nodes.begin(), g.nodes.end());
  std::map<int, int> degree;
  for (int v : g.nodes) degree[v] = static_cast<int>(g.adj.at(v).size());
  std::vector<int> stack;
  while (!alive.empty()) {
    auto it = std::find_if(alive.begin(), alive.end(), [&](int v) { return degree[v] < k; });
    if (it == alive.end()) throw RegisterPressureExceeded(k, greedy_clique(g, alive));
    int v = *it;
    alive.erase(it);
    stack.push_back(v);
    for (int u : g.adj.at(v))
      if (alive.count(u)) --degree[u];
  }
  RegFile rf;
  rf.k = k;
  for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
    std::vector<bool> taken(k, false);
    for (int u : g.adj.at(*it)) {
      auto c = rf.assignment.find(u);
      if (c != rf.assignment.end()) taken[c->second] = true;
    }
    int c = 0;
    while (taken[c]) ++c;
    rf.assignment[*it] = c;
  }
  return rf;
}

GuardedFunction rewrite(const GuardedFunction &gf, const RegFile &rf) {
  GuardedFunction out;
  out.vars.name = gf.vars.name;
  for (int c = 0; c < rf.k; ++c) out.vars.vregs.push_back({"R" + std::to_string(c), Type::Int});
  out.required_qubits = gf.required_qubits;
  out.required_results = gf.required_results;
  out.new_vregs = gf.new_vregs;

  auto reg = [&](VReg v) {
    auto it = rf.assignment.find(v.id);
    if (it == rf.assignment.end())
      throw std::logic_error("no register assigned to %" + gf.vars.info(v).name);
    return VReg{it->second};
  };
  auto map_op = [&](Operand &o) {
    if (auto *v = std::get_if<VReg>(&o)) *v = reg(*v);
  };
  auto map_list = [&](const std::vector<Instruction> &in) {
    std::vector<Instruction> res;
    for (auto ins : in) {
      if (auto d = defined_vreg(ins); d && !rf.assignment.count(d->id)) continue;
      for_each_operand(ins, map_op);
      std::visit(
          [&](auto &i) {
            using T = std::decay_t<decltype(i)>;
            if constexpr (std::is_same_v<T, ReadResult> || std::is_same_v<T, BinOp> ||
                          std::is_same_v<T, Cmp> || std::is_same_v<T, Select>)
              i.dst = reg(i.dst);
          },
          ins);
      res.push_back(std::move(ins));
    }
    return res;
  };
  std::function<void(Guard &)> map_guard = [&](Guard &g) {
    if (auto *v = std::get_if<VReg>(&g.cond); v && rf.assignment.count(v->id)) map_op(g.cond);
    for (auto &a : g.args) map_guard(a);
  };
  for (auto &b : gf.blocks) {
    GuardedBlock nb;
    nb.label = b.label;
    nb.guard = b.guard;
    map_guard(nb.guard);
    nb.guard_reg = b.guard_reg;
    map_op(nb.guard_reg);
    nb.guard_code = map_list(b.guard_code);
    nb.body = map_list(b.body);
    out.blocks.push_back(std::move(nb));
  }
  return out;
}

Allocation allocate_registers(const GuardedFunction &gf, int k) {
  auto ranges = compute_liveness(gf);
  RegFile rf = color(build_interference(ranges), k);
  return {rewrite(gf, rf), rf};
}

} // namespace qirq
