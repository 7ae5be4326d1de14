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

#include <functional>
#include <random>
#include <vector>

#include "qirq/qccd.hpp"

namespace qirq::testing {

// True when every op of `layer` can run with qubit q at slot_of[q].
bool goal_met(const std::vector<int> &slot_of, const GateLayer &layer, const TrapLayout &trap);

// Fewest parallel swap layers from `qubit_at` to an arrangement satisfying
// `goal`, by breadth-first search over every arrangement; -1 if unreachable.
int brute_force_steps(const std::vector<int> &qubit_at,
                      const std::function<bool(const std::vector<int> &)> &goal);

struct TransportGoal {
  TrapLayout trap;
  Placement start;
  GateLayer layer;
};

// A scattered placement of 2..max_ions ions on a default trap of up to six
// slots and a random layer of zone-disjoint one- and two-qubit ops.
TransportGoal random_transport_goal(std::mt19937_64 &rng, int max_ions = 5);

} // namespace qirq::testing
