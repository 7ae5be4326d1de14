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

#include "transport_oracle.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

namespace qirq::testing {

namespace {

Instruction cx(int a, int b) { return QGate{"cx", {{a}, {b}}, {}}; }

// Every nonempty set of disjoint adjacent swaps.
void swap_sets(int slots, int from, std::vector<int> &cur, std::vector<std::vector<int>> &out) {
  for (int s = from; s + 1 < slots; ++s) {
    cur.push_back(s);
    out.push_back(cur);
    swap_sets(slots, s + 2, cur, out);
    cur.pop_back();
  }
}

} // namespace

bool goal_met(const std::vector<int> &slot_of, const GateLayer &layer, const TrapLayout &trap) {
  for (auto &op : layer.ops) {
    auto [z0, z1] = trap.zones[op.zone];
    for (auto &q : qubits_of(op.op)) {
      int s = slot_of[q.index];
      if (op.slot >= 0 ? s != op.slot : (s != z0 && s != z1)) return false;
    }
  }
  return true;
}

int brute_force_steps(const std::vector<int> &qubit_at,
                      const std::function<bool(const std::vector<int> &)> &goal) {
  int slots = static_cast<int>(qubit_at.size());
  std::vector<std::vector<int>> moves;
  std::vector<int> cur;
  swap_sets(slots, 0, cur, moves);
  auto slot_of = [&](const std::vector<int> &at) {
    int ions = 0;
    for (int q : at) ions = std::max(ions, q + 1);
    std::vector<int> so(ions, -1);
    for (int s = 0; s < slots; ++s)
      if (at[s] >= 0) so[at[s]] = s;
    return so;
  };
  std::set<std::vector<int>> seen{qubit_at};
  std::deque<std::pair<std::vector<int>, int>> queue{{qubit_at, 0}};
  while (!queue.empty()) {
    auto [at, d] = queue.front();
    queue.pop_front();
    if (goal(slot_of(at))) return d;
    for (auto &m : moves) {
      auto next = at;
      for (int s : m) std::swap(next[s], next[s + 1]);
      if (seen.insert(next).second) queue.push_back({next, d + 1});
    }
  }
  return -1;
}

TransportGoal random_transport_goal(std::mt19937_64 &rng, int max_ions) {
  int ions = std::uniform_int_distribution<int>(2, max_ions)(rng);
  int slots = std::uniform_int_distribution<int>(std::max(ions, 4), std::max(ions, 6))(rng);
  TransportGoal g{TrapLayout::default_for(slots), {}, {}};
  std::vector<int> order(ions);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  g.start = Placement::from_order(order, slots);
  for (int k = 0; k < 3; ++k) apply_step(g.start, {static_cast<int>(rng() % (slots - 1))});
  std::vector<int> free(ions);
  std::iota(free.begin(), free.end(), 0);
  std::shuffle(free.begin(), free.end(), rng);
  for (int z = 0; z < static_cast<int>(g.trap.zones.size()) && !free.empty(); ++z) {
    if (rng() % 3 == 0) continue;
    if (free.size() >= 2 && rng() % 2) {
      g.layer.ops.push_back({cx(free[0], free[1]), z, -1});
      free.erase(free.begin(), free.begin() + 2);
    } else {
      int slot = rng() % 2 ? g.trap.zones[z].first : g.trap.zones[z].second;
      g.layer.ops.push_back({QGate{"h", {{free[0]}}, {}}, z, slot});
      free.erase(free.begin());
    }
  }
  return g;
}

} // namespace qirq::testing
