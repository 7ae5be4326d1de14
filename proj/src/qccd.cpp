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

#include "qirq/qccd.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "qirq/textir.hpp"

namespace qirq {

// --- trap and placement --------------------------------------------------------------

TrapLayout TrapLayout::default_for(int qubits) {
  TrapLayout t;
  t.slots = std::max(qubits, 4);
  int z = std::min(t.slots / 2, 5);
  for (int i = 0; i < z; ++i) t.zones.emplace_back(2 * i, 2 * i + 1);
  return t;
}

void TrapLayout::check() const {
  if (slots < 1) throw std::invalid_argument("trap needs at least one slot");
  std::set<int> used;
  for (auto [a, b] : zones) {
    if (a < 0 || b >= slots || b != a + 1)
      throw std::invalid_argument("gate zone (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") is not an adjacent slot pair inside the trap");
    if (!used.insert(a).second || !used.insert(b).second)
      throw std::invalid_argument("gate zones overlap");
  }
  if (zones.empty()) throw std::invalid_argument("trap has no gate zone");
}

TrapLayout TrapLayout::from_json(const nlohmann::json &j) {
  TrapLayout t;
  t.slots = j.at("slots").get<int>();
  if (j.contains("zones")) {
    for (auto &z : j.at("zones")) t.zones.emplace_back(z.at(0).get<int>(), z.at(1).get<int>());
  } else {
    t.zones = default_for(t.slots).zones;
  }
  t.check();
  return t;
}

nlohmann::json TrapLayout::to_json() const {
  nlohmann::json z = nlohmann::json::array();
  for (auto [a, b] : zones) z.push_back({a, b});
  return {{"slots", slots}, {"zones", z}};
}

int TrapLayout::zone_of_slot(int slot) const {
  for (size_t i = 0; i < zones.size(); ++i)
    if (zones[i].first == slot || zones[i].second == slot) return static_cast<int>(i);
  return -1;
}

Placement Placement::from_order(const std::vector<int> &order, int slots) {
  Placement p;
  p.slot_of.assign(order.size(), -1);
  p.qubit_at.assign(slots, -1);
  for (size_t s = 0; s < order.size(); ++s) {
    p.slot_of[order[s]] = static_cast<int>(s);
    p.qubit_at[s] = order[s];
  }
  return p;
}

void Placement::swap_right(int s) {
  std::swap(qubit_at[s], qubit_at[s + 1]);
  if (qubit_at[s] >= 0) slot_of[qubit_at[s]] = s;
  if (qubit_at[s + 1] >= 0) slot_of[qubit_at[s + 1]] = s + 1;
}

bool Placement::is_bijection() const {
  for (size_t q = 0; q < slot_of.size(); ++q) {
    int s = slot_of[q];
    if (s < 0 || s >= static_cast<int>(qubit_at.size()) || qubit_at[s] != static_cast<int>(q))
      return false;
  }
  int ions = 0;
  for (int q : qubit_at)
    if (q >= 0) ++ions;
  return ions == static_cast<int>(slot_of.size());
}

void apply_step(Placement &p, const TransportStep &step) {
  int last = -2;
  for (int s : step) {
    if (s <= last + 1 || s < 0 || s + 1 >= static_cast<int>(p.qubit_at.size()))
      throw std::invalid_argument("transport step swaps are not disjoint adjacent pairs");
    p.swap_right(s);
    last = s;
  }
}

// --- Sugiyama placement ----------------------------------------------------------------

std::vector<std::vector<std::pair<int, int>>>
interaction_layers(const std::vector<std::pair<int, int>> &pairs) {
  std::unordered_map<int, int> ready;
  std::vector<std::vector<std::pair<int, int>>> layers;
  for (auto [a, b] : pairs) {
    int l = std::max(ready[a], ready[b]);
    if (l >= static_cast<int>(layers.size())) layers.resize(l + 1);
    layers[l].emplace_back(a, b);
    ready[a] = ready[b] = l + 1;
  }
  return layers;
}

long count_crossings(const std::vector<std::vector<std::pair<int, int>>> &layers,
                     const std::vector<std::vector<int>> &orders) {
  long total = 0;
  for (size_t t = 0; t < layers.size(); ++t) {
    const auto &up = orders[t], &down = orders[t + 1];
    std::vector<int> pu(up.size()), pd(down.size());
    for (size_t i = 0; i < up.size(); ++i) pu[up[i]] = static_cast<int>(i);
    for (size_t i = 0; i < down.size(); ++i) pd[down[i]] = static_cast<int>(i);
    std::vector<std::pair<int, int>> segs;
    for (size_t q = 0; q < up.size(); ++q) segs.emplace_back(pu[q], pd[q]);
    for (auto [a, b] : layers[t]) {
      segs.emplace_back(pu[a], pd[b]);
      segs.emplace_back(pu[b], pd[a]);
    }
    for (size_t i = 0; i < segs.size(); ++i)
      for (size_t j = i + 1; j < segs.size(); ++j) {
        long dx = segs[i].first - segs[j].first, dy = segs[i].second - segs[j].second;
        if (dx * dy < 0) ++total;
      }
  }
  return total;
}

long count_crossings(const std::vector<std::vector<std::pair<int, int>>> &layers,
                     const std::vector<int> &order) {
  return count_crossings(layers, std::vector<std::vector<int>>(layers.size() + 1, order));
}

std::vector<int> sugiyama_order(int qubits, const std::vector<std::pair<int, int>> &pairs,
                                int sweeps) {
  std::vector<int> identity(qubits);
  std::iota(identity.begin(), identity.end(), 0);
  auto layers = interaction_layers(pairs);
  if (layers.empty()) return identity;
  const int n = static_cast<int>(layers.size());
  std::vector<std::vector<int>> orders(n + 1, identity);

  // partner[t][q]: q's partner in gate layer t, or -1.
  std::vector<std::vector<int>> partner(n, std::vector<int>(qubits, -1));
  for (int t = 0; t < n; ++t)
    for (auto [a, b] : layers[t]) {
      partner[t][a] = b;
      partner[t][b] = a;
    }
  auto reorder = [&](int target, int ref, int gate_layer) {
    std::vector<int> pos(qubits);
    for (int i = 0; i < qubits; ++i) pos[orders[ref][i]] = i;
    std::vector<double> bary(qubits);
    for (int q = 0; q < qubits; ++q) {
      int p = partner[gate_layer][q];
      bary[q] = p >= 0 ? pos[p] : pos[q];
    }
    auto &o = orders[target];
    std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return bary[a] < bary[b]; });
  };

  std::vector<int> best = identity;
  long best_cost = count_crossings(layers, identity);
  auto consider = [&] {
    for (auto &o : orders) {
      long c = count_crossings(layers, o);
      if (c < best_cost) {
        best_cost = c;
        best = o;
      }
    }
  };
  for (int s = 0; s < sweeps; ++s) {
    if (s % 2 == 0)
      for (int t = 1; t <= n; ++t) reorder(t, t - 1, t - 1);
    else
      for (int t = n - 1; t >= 0; --t) reorder(t, t + 1, t);
    consider();
  }
  return best;
}

static int static_qubit(const QubitRef &q) {
  if (q.param) throw std::invalid_argument("qubit parameter left in code handed to the backend");
  return q.index;
}

static int qubit_count(const GuardedFunction &gf) {
  int n = gf.required_qubits;
  for (auto &b : gf.blocks)
    for (auto &i : b.body)
      for (auto &q : qubits_of(i)) n = std::max(n, static_qubit(q) + 1);
  return n;
}

Placement place_initial(const GuardedFunction &gf, const TrapLayout &trap) {
  int nq = qubit_count(gf);
  if (nq > trap.slots)
    throw std::invalid_argument("trap has " + std::to_string(trap.slots) + " slots for " +
                                std::to_string(nq) + " qubits");
  std::vector<std::pair<int, int>> pairs;
  for (auto &b : gf.blocks)
    for (auto &i : b.body) {
      auto qs = qubits_of(i);
      if (qs.size() == 2) pairs.emplace_back(static_qubit(qs[0]), static_qubit(qs[1]));
    }
  return Placement::from_order(sugiyama_order(nq, pairs), trap.slots);
}

// --- layer scheduling -------------------------------------------------------------------

std::vector<GateLayer> schedule_layers(const std::vector<Instruction> &ops,
                                       const TrapLayout &trap, const Placement &canonical) {
  std::vector<GateLayer> layers;
  std::vector<std::vector<bool>> busy; // [layer][zone]
  std::unordered_map<int, int> ready, slot_ready;
  const int nz = static_cast<int>(trap.zones.size());
  for (auto &op : ops) {
    std::vector<int> qs;
    for (auto &q : qubits_of(op)) qs.push_back(static_qubit(q));
    if (qs.empty() || qs.size() > 2) throw std::invalid_argument("not a schedulable quantum op");
    int l = 0;
    for (int q : qs) l = std::max(l, ready[q]);
    const auto *m = std::get_if<Measure>(&op);
    if (m) l = std::max(l, slot_ready[m->slot]);
    for (;; ++l) {
      if (l == static_cast<int>(layers.size())) {
        layers.emplace_back();
        busy.emplace_back(nz, false);
      }
      if (std::find(busy[l].begin(), busy[l].end(), false) != busy[l].end()) break;
    }
    int best_zone = -1, best_slot = -1, best_cost = std::numeric_limits<int>::max();
    for (int z = 0; z < nz; ++z) {
      if (busy[l][z]) continue;
      auto [z0, z1] = trap.zones[z];
      if (qs.size() == 2) {
        int a = canonical.slot_of[qs[0]], b = canonical.slot_of[qs[1]];
        int cost = std::min(std::abs(a - z0) + std::abs(b - z1), std::abs(a - z1) + std::abs(b - z0));
        if (cost < best_cost) {
          best_cost = cost;
          best_zone = z;
        }
      } else {
        int s = canonical.slot_of[qs[0]];
        for (int slot : {z0, z1}) {
          int cost = std::abs(s - slot);
          if (cost < best_cost) {
            best_cost = cost;
            best_zone = z;
            best_slot = slot;
          }
        }
      }
    }
    busy[l][best_zone] = true;
    layers[l].ops.push_back({op, best_zone, qs.size() == 2 ? -1 : best_slot});
    for (int q : qs) ready[q] = l + 1;
    if (m) slot_ready[m->slot] = l + 1;
  }
  return layers;
}

// --- transport planning ---------------------------------------------------------------

bool layer_satisfied(const Placement &p, const GateLayer &layer, const TrapLayout &trap) {
  for (auto &op : layer.ops) {
    auto qs = qubits_of(op.op);
    if (op.slot >= 0) {
      if (p.slot_of[qs[0].index] != op.slot) return false;
    } else {
      auto [z0, z1] = trap.zones[op.zone];
      for (auto &q : qs) {
        int s = p.slot_of[q.index];
        if (s != z0 && s != z1) return false;
      }
    }
  }
  return true;
}

namespace {

// All nonempty sets of disjoint adjacent swaps, lexicographically ordered.
const std::vector<TransportStep> &actions_for(int slots) {
  static std::unordered_map<int, std::vector<TransportStep>> cache;
  static std::mutex mu;
  std::lock_guard lock(mu);
  auto it = cache.find(slots);
  if (it != cache.end()) return it->second;
  std::vector<TransportStep> out;
  TransportStep cur;
  std::function<void(int)> rec = [&](int from) {
    for (int s = from; s + 1 < slots; ++s) {
      cur.push_back(s);
      out.push_back(cur);
      rec(s + 2);
      cur.pop_back();
    }
  };
  rec(0);
  return cache.emplace(slots, std::move(out)).first->second;
}

template <typename Goal>
TransportPlan bfs(const Placement &start, const Goal &goal) {
  if (goal(start)) return {{}, start};
  const int slots = static_cast<int>(start.qubit_at.size());
  const auto &actions = actions_for(slots);
  auto key = [](const Placement &p) {
    return std::string(p.qubit_at.begin(), p.qubit_at.end());
  };
  struct Node {
    Placement p;
    int parent;
    int action;
  };
  std::vector<Node> nodes{{start, -1, -1}};
  std::unordered_set<std::string> seen{key(start)};
  for (size_t head = 0; head < nodes.size(); ++head) {
    for (size_t a = 0; a < actions.size(); ++a) {
      const Placement &cur = nodes[head].p;
      bool useful = true;
      for (int s : actions[a])
        if (cur.qubit_at[s] < 0 && cur.qubit_at[s + 1] < 0) useful = false;
      if (!useful) continue;
      Placement next = cur;
      apply_step(next, actions[a]);
      if (!seen.insert(key(next)).second) continue;
      nodes.push_back({next, static_cast<int>(head), static_cast<int>(a)});
      if (goal(next)) {
        TransportPlan plan;
        plan.result = next;
        for (int n = static_cast<int>(nodes.size()) - 1; nodes[n].parent >= 0; n = nodes[n].parent)
          plan.steps.push_back(actions[nodes[n].action]);
        std::reverse(plan.steps.begin(), plan.steps.end());
        return plan;
      }
    }
  }
  throw Unreachable("no transport sequence reaches the requested arrangement");
}

// Odd-even transposition toward a full target arrangement. target[s] is the
// slot the current occupant of s must reach; empties carry targets too.
TransportPlan odd_even(const Placement &start, std::vector<int> target) {
  TransportPlan plan{{}, start};
  const int slots = static_cast<int>(target.size());
  for (int round = 0, idle = 0; idle < 2; ++round) {
    TransportStep step;
    bool moved = false;
    for (int s = round % 2; s + 1 < slots; s += 2)
      if (target[s] > target[s + 1]) {
        if (plan.result.qubit_at[s] >= 0 || plan.result.qubit_at[s + 1] >= 0) step.push_back(s);
        std::swap(target[s], target[s + 1]);
        moved = true;
      }
    idle = moved ? 0 : idle + 1;
    if (!step.empty()) {
      apply_step(plan.result, step);
      plan.steps.push_back(std::move(step));
    }
  }
  return plan;
}

} // namespace

TransportPlan plan_transport(const Placement &current, const GateLayer &layer,
                             const TrapLayout &trap) {
  if (static_cast<int>(current.qubit_at.size()) <= kExactSlots)
    return bfs(current, [&](const Placement &p) { return layer_satisfied(p, layer, trap); });

  // Pin layer operands, then keep everyone else in relative order.
  const int slots = static_cast<int>(current.qubit_at.size());
  std::vector<int> dest(current.slot_of.size(), -1);
  std::vector<bool> taken(slots, false);
  for (auto &op : layer.ops) {
    auto qs = qubits_of(op.op);
    if (op.slot >= 0) {
      dest[qs[0].index] = op.slot;
      taken[op.slot] = true;
    } else {
      auto [z0, z1] = trap.zones[op.zone];
      int a = qs[0].index, b = qs[1].index;
      if (current.slot_of[a] > current.slot_of[b]) std::swap(a, b);
      dest[a] = z0;
      dest[b] = z1;
      taken[z0] = taken[z1] = true;
    }
  }
  std::vector<int> target(slots, -1);
  int free = 0;
  for (int s = 0; s < slots; ++s) {
    int q = current.qubit_at[s];
    if (q >= 0 && dest[q] >= 0) {
      target[s] = dest[q];
      continue;
    }
    while (taken[free]) ++free;
    target[s] = free++;
  }
  return odd_even(current, target);
}

TransportPlan plan_restore(const Placement &current, const Placement &target,
                           const TrapLayout &) {
  if (static_cast<int>(current.qubit_at.size()) <= kExactSlots)
    return bfs(current, [&](const Placement &p) { return p.qubit_at == target.qubit_at; });
  const int slots = static_cast<int>(current.qubit_at.size());
  std::vector<int> t(slots, -1);
  std::vector<int> empties_to;
  for (int s = 0; s < slots; ++s)
    if (target.qubit_at[s] < 0) empties_to.push_back(s);
  size_t e = 0;
  for (int s = 0; s < slots; ++s) {
    int q = current.qubit_at[s];
    t[s] = q >= 0 ? target.slot_of[q] : empties_to[e++];
  }
  return odd_even(current, t);
}

// --- lowering -------------------------------------------------------------------------

int ExecBlock::transport_steps() const {
  int n = static_cast<int>(epilogue.size());
  for (auto &s : steps)
    if (auto *l = std::get_if<LayerStep>(&s)) n += static_cast<int>(l->transport.size());
  return n;
}

int ExecProgram::block_count() const {
  int n = 0;
  for (auto &i : items) n += std::holds_alternative<ExecBlock>(i);
  return n;
}

long ExecProgram::planned_transport() const {
  long n = 0;
  for (auto &i : items)
    if (auto *b = std::get_if<ExecBlock>(&i)) n += b->transport_steps();
  return n;
}

static bool is_backend_quantum(const Instruction &i) {
  return std::holds_alternative<QGate>(i) || std::holds_alternative<Measure>(i) ||
         std::holds_alternative<Reset>(i);
}

ExecProgram lower(const GuardedFunction &gf, const TrapLayout &trap, TransportMode mode) {
  trap.check();
  ExecProgram prog;
  prog.registers = static_cast<int>(gf.vars.vregs.size());
  prog.num_qubits = qubit_count(gf);
  prog.num_results = gf.required_results;
  prog.conditional_transport = mode == TransportMode::Conditional;
  prog.trap = trap;
  prog.canonical = place_initial(gf, trap);
  prog.vars = gf.vars;
  prog.vars.blocks.clear();

  std::set<int> regs;
  auto note = [&](const Instruction &i) {
    if (auto d = defined_vreg(i)) regs.insert(d->id);
  };
  for (auto &b : gf.blocks) {
    for (auto &i : b.guard_code) {
      note(i);
      prog.items.emplace_back(i);
    }
    ExecBlock eb;
    eb.label = b.label;
    eb.guard = b.guard_reg;
    Placement cur = prog.canonical;
    std::vector<Instruction> run;
    auto flush = [&] {
      if (run.empty()) return;
      for (auto &layer : schedule_layers(run, trap, prog.canonical)) {
        auto plan = plan_transport(cur, layer, trap);
        cur = plan.result;
        eb.steps.emplace_back(LayerStep{std::move(plan.steps), std::move(layer)});
      }
      run.clear();
    };
    for (auto &i : b.body) {
      if (std::holds_alternative<Call>(i))
        throw std::invalid_argument("call left in code handed to the backend");
      if (is_backend_quantum(i)) {
        run.push_back(i);
        continue;
      }
      flush();
      note(i);
      eb.steps.emplace_back(i);
    }
    flush();
    eb.epilogue = plan_restore(cur, prog.canonical, trap).steps;
    prog.items.emplace_back(std::move(eb));
  }
  prog.colors_used = static_cast<int>(regs.size());
  return prog;
}

nlohmann::json ExecProgram::to_json() const {
  using nlohmann::json;
  auto op_text = [&](const Instruction &i) { return emit_instruction(vars, i); };
  auto steps_json = [](const std::vector<TransportStep> &steps) {
    json a = json::array();
    for (auto &s : steps) a.push_back(s);
    return a;
  };
  json items_json = json::array();
  for (auto &item : items) {
    if (auto *i = std::get_if<Instruction>(&item)) {
      items_json.push_back({{"op", op_text(*i)}});
      continue;
    }
    const auto &b = std::get<ExecBlock>(item);
    json steps_arr = json::array();
    for (auto &s : b.steps) {
      if (auto *l = std::get_if<LayerStep>(&s)) {
        json ops = json::array();
        for (auto &op : l->layer.ops)
          ops.push_back({{"op", op_text(op.op)}, {"zone", op.zone}, {"slot", op.slot}});
        steps_arr.push_back({{"transport", steps_json(l->transport)}, {"layer", ops}});
      } else {
        steps_arr.push_back({{"op", op_text(std::get<Instruction>(s))}});
      }
    }
    items_json.push_back({{"block", b.label},
                          {"guard", format_operand(vars, b.guard)},
                          {"steps", steps_arr},
                          {"epilogue", steps_json(b.epilogue)}});
  }
  return {{"registers", registers},
          {"colors_used", colors_used},
          {"qubits", num_qubits},
          {"results", num_results},
          {"conditional_transport", conditional_transport},
          {"trap", trap.to_json()},
          {"canonical", canonical.slot_of},
          {"blocks", block_count()},
          {"planned_transport", planned_transport()},
          {"items", items_json}};
}

} // namespace qirq
