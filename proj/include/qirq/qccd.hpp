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

#include <json.hpp>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qirq/predication.hpp"

namespace qirq {

struct TrapLayout {
  int slots = 4;
  std::vector<std::pair<int, int>> zones;

  // S = max(qubits, 4); zones (2i, 2i+1) for i < min(S/2, 5).
  static TrapLayout default_for(int qubits);
  static TrapLayout from_json(const nlohmann::json &j);
  nlohmann::json to_json() const;
  // Throws std::invalid_argument on overlapping, non-adjacent or out-of-range zones.
  void check() const;
  int zone_of_slot(int slot) const;
};

// Ion positions on the linear trap. Slots without an ion hold -1.
struct Placement {
  std::vector<int> slot_of;
  std::vector<int> qubit_at;

  static Placement from_order(const std::vector<int> &order, int slots);
  // Swaps the contents of slots s and s+1.
  void swap_right(int s);
  bool is_bijection() const;
  friend bool operator==(const Placement &, const Placement &) = default;
};

// Left slot indices s of the simultaneous swaps (s, s+1).
using TransportStep = std::vector<int>;

void apply_step(Placement &p, const TransportStep &step);

// --- placement ---------------------------------------------------------------------

// ASAP layers of two-qubit interactions.
std::vector<std::vector<std::pair<int, int>>>
interaction_layers(const std::vector<std::pair<int, int>> &pairs);

// Crossings of the layered interaction graph: node layer t holds every qubit
// in order orders[t]; edges are wires q_t -> q_{t+1} and, for every gate (a,b)
// in gate layer t, a_t -> b_{t+1} and b_t -> a_{t+1}.
long count_crossings(const std::vector<std::vector<std::pair<int, int>>> &layers,
                     const std::vector<std::vector<int>> &orders);
// Same with one order shared by all layers.
long count_crossings(const std::vector<std::vector<std::pair<int, int>>> &layers,
                     const std::vector<int> &order);

// Barycenter sweeps over the layered interaction graph; returns a qubit order.
std::vector<int> sugiyama_order(int qubits, const std::vector<std::pair<int, int>> &pairs,
                                int sweeps = 4);

Placement place_initial(const GuardedFunction &gf, const TrapLayout &trap);

// --- scheduling ---------------------------------------------------------------------

struct ScheduledOp {
  Instruction op;
  int zone = 0;
  // Required slot for one-qubit operations; -1 for two-qubit gates, whose
  // operands may occupy the zone in either order.
  int slot = -1;
};

struct GateLayer {
  std::vector<ScheduledOp> ops;
};

// `ops` must be quantum instructions on static qubit indices.
std::vector<GateLayer> schedule_layers(const std::vector<Instruction> &ops,
                                       const TrapLayout &trap, const Placement &canonical);

class Unreachable : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

struct TransportPlan {
  std::vector<TransportStep> steps;
  Placement result;
};

bool layer_satisfied(const Placement &p, const GateLayer &layer, const TrapLayout &trap);

// Minimum-step plan (breadth-first, lexicographically smallest steps) when
// the trap has at most kExactSlots slots; odd-even routing otherwise.
inline constexpr int kExactSlots = 8;
TransportPlan plan_transport(const Placement &current, const GateLayer &layer,
                             const TrapLayout &trap);
TransportPlan plan_restore(const Placement &current, const Placement &target,
                           const TrapLayout &trap);

// --- executable form -----------------------------------------------------------------

enum class TransportMode : uint8_t { Conditional, Always };

struct LayerStep {
  std::vector<TransportStep> transport;
  GateLayer layer;
};

// Classical and output instructions inside a block stay as Instructions.
using BlockStep = std::variant<LayerStep, Instruction>;

struct ExecBlock {
  std::string label;
  Operand guard = true;
  std::vector<BlockStep> steps;
  std::vector<TransportStep> epilogue;

  int transport_steps() const;
};

using ExecItem = std::variant<Instruction, ExecBlock>;

struct ExecProgram {
  int registers = 0;
  int colors_used = 0;
  int num_qubits = 0;
  int num_results = 0;
  bool conditional_transport = true;
  TrapLayout trap;
  Placement canonical;
  std::vector<ExecItem> items;
  // Register names for printing; empty entries print as R<i>.
  Function vars;

  int block_count() const;
  long planned_transport() const;
  nlohmann::json to_json() const;
};

ExecProgram lower(const GuardedFunction &gf, const TrapLayout &trap, TransportMode mode);

} // namespace qirq
