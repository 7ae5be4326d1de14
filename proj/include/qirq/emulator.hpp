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
#include <functional>
#include <json.hpp>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qirq/gates.hpp"
#include "qirq/qccd.hpp"

namespace qirq {

// Qubit k is bit k of the amplitude index.
class StateVector {
public:
  explicit StateVector(int n);

  int size() const { return n_; }
  const std::vector<cplx> &amplitudes() const { return amp_; }
  std::vector<cplx> &amplitudes() { return amp_; }

  void apply(const Mat2 &m, int q);
  void apply_cx(int control, int target);
  // 'X', 'Y' or 'Z'.
  void apply_pauli(int q, char p);
  double prob_one(int q) const;
  // Projects q onto `bit`; `p` is that outcome's probability.
  void collapse(int q, bool bit, double p);
  double norm() const;
  // Reduced single-qubit Bloch vector of q.
  std::array<double, 3> bloch(int q) const;

private:
  int n_;
  std::vector<cplx> amp_;
};

struct NoiseModel {
  double p1 = 0, p2 = 0, p_meas = 0, p_reset = 0, p_transport = 0, p_idle = 0;
  double prep_overrotation = 0;

  // Synthetic placeholder values, not device data.
  static NoiseModel synthetic_default();
  static NoiseModel from_json(const nlohmann::json &j);
  nlohmann::json to_json() const;
  void check() const;
};

class ZoneViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

class TooManyBranches : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Counters {
  long transport_steps = 0;
  long gates = 0;
  long skipped_blocks = 0;
  friend bool operator==(const Counters &, const Counters &) = default;
};

struct OutputEvent {
  OutputKind kind = OutputKind::Result;
  bool bit = false;
  friend bool operator==(const OutputEvent &, const OutputEvent &) = default;
};

struct MeasureEvent {
  int qubit = 0;
  int slot = 0;
  bool bit = false;
  friend bool operator==(const MeasureEvent &, const MeasureEvent &) = default;
};

// "[", "]", "(", ")" for delimiters and '0'/'1' for recorded results.
std::string outcome_key(const std::vector<OutputEvent> &out);

struct ShotResult {
  std::vector<OutputEvent> outputs;
  std::vector<bool> results;
  Counters counters;
  uint64_t seed = 0;
  std::vector<MeasureEvent> log;

  std::string record() const { return outcome_key(outputs); }
  // Bits of the recorded `result` outputs, in order.
  std::vector<int> result_bits() const;
};

uint64_t shot_seed(uint64_t master, uint64_t index);

ShotResult run_shot(const ExecProgram &prog, const NoiseModel &noise, uint64_t seed);

std::vector<ShotResult> run_shots(const ExecProgram &prog, const NoiseModel &noise, int shots,
                                  uint64_t master_seed, int parallelism = 1);

// Called before every noiseless measurement along every explored path.
using MeasureHook =
    std::function<void(const StateVector &, const Measure &, const std::vector<bool> &results)>;

inline constexpr double kPruneProbability = 1e-14;
inline constexpr int kMaxEnumeratedMeasurements = 20;

// Exact noiseless output distribution by depth-first branching on every
// measurement and reset.
std::map<std::string, double> enumerate_outcomes(const ExecProgram &prog,
                                                 const MeasureHook &hook = {});

// Same distribution computed by interpreting the IR directly (calls, loops
// and phis included); the reference side of the equivalence oracles.
std::map<std::string, double> enumerate_module(const Module &m, const MeasureHook &hook = {});

} // namespace qirq
