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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qirq/emulator.hpp"
#include "qirq/experiments.hpp"
#include "qirq/textir.hpp"
#include "random_programs.hpp"

namespace qirq {
namespace {

ExecProgram exec_of(const std::string &body, int qubits = 1, int results = 1, bool peephole = true) {
  CompileOptions o;
  o.peephole = peephole;
  return compile(parse("module t\nattrs required_qubits=" + std::to_string(qubits) +
                       " required_results=" + std::to_string(results) +
                       "\nentry @main\nfunc @main() {\nblock entry:\n" + body + "  ret\n}\n"),
                 o)
      .exec;
}

std::string outputs_of(int results) {
  std::string s = "  output array_start\n";
  for (int r = 0; r < results; ++r) s += "  output result r" + std::to_string(r) + "\n";
  return s + "  output array_end\n";
}

// --- state vector -------------------------------------------------------------------

TEST(StateVector, HadamardMakesEqualSuperposition) {
  StateVector sv(1);
  sv.apply(gate_matrix("h", 0), 0);
  EXPECT_NEAR(sv.prob_one(0), 0.5, 1e-15);
  auto b = sv.bloch(0);
  EXPECT_NEAR(b[0], 1, 1e-15);
  EXPECT_NEAR(b[2], 0, 1e-15);
}

TEST(StateVector, CxFlipsTargetWhenControlSet) {
  StateVector sv(2);
  sv.apply(gate_matrix("x", 0), 0);
  sv.apply_cx(0, 1);
  // Little-endian: qubit k is bit k of the basis index, so |q1 q0> = |11> is index 3.
  EXPECT_NEAR(std::norm(sv.amplitudes()[3]), 1, 1e-15);
  sv.apply_cx(1, 0);
  EXPECT_NEAR(std::norm(sv.amplitudes()[2]), 1, 1e-15);
}

TEST(StateVector, RzRotatesEquator) {
  StateVector sv(1);
  sv.apply(gate_matrix("h", 0), 0);
  sv.apply(gate_matrix("rz", M_PI / 2), 0);
  auto b = sv.bloch(0);
  EXPECT_NEAR(b[0], 0, 1e-12);
  EXPECT_NEAR(b[1], 1, 1e-12);
}

TEST(StateVector, CollapseRenormalizes) {
  StateVector sv(2);
  sv.apply(gate_matrix("ry", 1.0), 0);
  sv.apply_cx(0, 1);
  double p = sv.prob_one(0);
  EXPECT_NEAR(p, std::pow(std::sin(0.5), 2), 1e-15);
  sv.collapse(0, true, p);
  EXPECT_NEAR(sv.norm(), 1, 1e-14);
  EXPECT_NEAR(sv.prob_one(1), 1, 1e-14);
}

TEST(StateVectorProperty, RandomCircuitsPreserveNorm) {
  std::mt19937_64 rng(8);
  const char *gates[] = {"h", "x", "y", "z", "s", "sdg", "t", "tdg", "rx", "ry", "rz"};
  for (int t = 0; t < 100; ++t) {
    StateVector sv(4);
    for (int g = 0; g < 40; ++g) {
      int q = static_cast<int>(rng() % 4);
      if (rng() % 4 == 0) sv.apply_cx(q, (q + 1 + rng() % 3) % 4);
      else sv.apply(gate_matrix(gates[rng() % 11], std::uniform_real_distribution<double>(-4, 4)(rng)), q);
    }
    ASSERT_NEAR(sv.norm(), 1, 1e-12);
  }
}

// --- shots and enumeration -----------------------------------------------------------

TEST(Shots, NoiselessBellPairsAgree) {
  ExecProgram p = exec_of("  h q0\n  cx q0, q1\n  mz q0 -> r0\n  mz q1 -> r1\n" + outputs_of(2), 2, 2);
  auto dist = enumerate_outcomes(p);
  EXPECT_EQ(dist.size(), 2u);
  EXPECT_NEAR(dist.at("[00]"), 0.5, 1e-12);
  EXPECT_NEAR(dist.at("[11]"), 0.5, 1e-12);
  for (auto &s : run_shots(p, NoiseModel{}, 500, 3)) EXPECT_TRUE(s.record() == "[00]" || s.record() == "[11]");
}

TEST(Shots, EnumerationSumsToOne) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    auto dist = enumerate_module(testing::random_program(rng));
    double total = 0;
    for (auto &[k, p] : dist) total += p;
    EXPECT_NEAR(total, 1, 1e-12);
  }
}

TEST(Shots, DeterministicAcrossParallelism) {
  ExecProgram p = compile(build_msd({3, Basis::X})).exec;
  NoiseModel n = NoiseModel::synthetic_default();
  auto a = run_shots(p, n, 400, 99, 1);
  auto b = run_shots(p, n, 400, 99, 8);
  ASSERT_EQ(a.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].outputs, b[i].outputs);
    EXPECT_EQ(a[i].counters, b[i].counters);
    EXPECT_EQ(a[i].log, b[i].log);
  }
  EXPECT_NE(shot_seed(99, 0), shot_seed(99, 1));
  EXPECT_NE(shot_seed(99, 0), shot_seed(100, 0));
}

TEST(Shots, SamplingMatchesEnumerationWithinFourSigma) {
  ExecProgram p = exec_of("  ry(1.1) q0\n  h q1\n  cx q0, q1\n  mz q0 -> r0\n  mz q1 -> r1\n" + outputs_of(2),
                          2, 2);
  auto dist = enumerate_outcomes(p);
  const int n = 20000;
  std::map<std::string, int> counts;
  for (auto &s : run_shots(p, NoiseModel{}, n, 5)) ++counts[s.record()];
  for (auto &[k, prob] : dist) {
    double sigma = std::sqrt(prob * (1 - prob) / n);
    EXPECT_NEAR(static_cast<double>(counts[k]) / n, prob, 4 * sigma + 1e-12) << k;
  }
}

TEST(Shots, TooManyBranchesIsReported) {
  std::string body;
  for (int k = 0; k < 21; ++k) body += "  h q0\n  mz q0 -> r0\n";
  EXPECT_THROW(enumerate_outcomes(exec_of(body)), TooManyBranches);
}

TEST(Shots, DeterministicMeasurementsDoNotBranch) {
  std::string body;
  for (int k = 0; k < kMaxEnumeratedMeasurements; ++k) body += "  x q0\n  mz q0 -> r0\n";
  auto dist = enumerate_outcomes(exec_of(body + outputs_of(1)));
  EXPECT_EQ(dist.size(), 1u);
  EXPECT_NEAR(dist.at("[0]"), 1, 1e-12);
}

TEST(Shots, MsdSingleAttemptSucceedsOneSixth) {
  auto dist = enumerate_outcomes(compile(build_msd({1, Basis::Z})).exec);
  double ok = 0;
  for (auto &[k, p] : dist)
    if (k.substr(1, 4) == "0000") ok += p;
  EXPECT_NEAR(ok, 1.0 / 6, 1e-9);
}

// --- noise --------------------------------------------------------------------------

// Average Bloch vector of q0 across sampled shots, read by measuring in the
// chosen basis.
double sampled_expectation(const std::string &prep, const std::string &unprep, const NoiseModel &n,
                           int shots) {
  ExecProgram p = exec_of(prep + unprep + "  mz q0 -> r0\n" + outputs_of(1), 1, 1, false);
  double sum = 0;
  for (auto &s : run_shots(p, n, shots, 17)) sum += s.result_bits()[0] ? -1 : 1;
  return sum / shots;
}

TEST(Noise, ZeroProbabilitiesAreNoiseless) {
  NoiseModel n;
  EXPECT_DOUBLE_EQ(sampled_expectation("  h q0\n", "  h q0\n", n, 2000), 1.0);
}

TEST(Noise, TransportDephasingShrinksX) {
  NoiseModel n;
  n.p_transport = 0.1;
  // On a four-slot trap the cx needs q3 moved next to q0 while q0 sits on
  // the equator; q3 stays |0> so the cx itself is the identity.
  ExecProgram p = exec_of("  h q0\n  cx q3, q0\n  h q0\n  mz q0 -> r0\n" + outputs_of(1), 4, 1);
  long steps = 0;
  for (auto &st : std::get<ExecBlock>(p.items.at(0)).steps)
    if (auto *l = std::get_if<LayerStep>(&st))
      for (auto &op : l->layer.ops)
        if (std::get_if<QGate>(&op.op) && std::get<QGate>(op.op).name == "cx") steps = l->transport.size();
  ASSERT_GT(steps, 0);
  auto shots = run_shots(p, n, 100000, 23);
  double sum = 0;
  for (auto &s : shots) sum += s.result_bits()[0] ? -1 : 1;
  // Each step flips Z on q0 with probability p.
  EXPECT_NEAR(sum / shots.size(), std::pow(1 - 2 * n.p_transport, steps), 0.01);
}

TEST(Noise, DepolarizingScalesBlochVector) {
  NoiseModel n;
  n.p1 = 0.15;
  // Each single-qubit gate is followed by a uniformly random Pauli with
  // probability p1, scaling every Bloch component by 1 - 4 p1 / 3 per gate.
  double shrink = 1 - 4 * n.p1 / 3;
  EXPECT_NEAR(sampled_expectation("", "  z q0\n", n, 100000), shrink, 0.01);
  EXPECT_NEAR(sampled_expectation("  h q0\n", "  h q0\n", n, 100000), shrink * shrink, 0.01);
  EXPECT_NEAR(sampled_expectation("  h q0\n  s q0\n", "  sdg q0\n  h q0\n", n, 100000),
              std::pow(shrink, 4), 0.01);
}

TEST(Noise, MeasurementFlipRate) {
  NoiseModel n;
  n.p_meas = 0.2;
  EXPECT_NEAR(sampled_expectation("", "", n, 100000), 1 - 2 * n.p_meas, 0.01);
}

TEST(Noise, OverrotationTiltsPreparation) {
  NoiseModel n;
  n.prep_overrotation = 0.3;
  EXPECT_NEAR(sampled_expectation("  ry(0.0) q0\n", "", n, 100000), std::cos(0.3), 0.01);
}

TEST(Noise, JsonRoundTripAndChecks) {
  NoiseModel n = NoiseModel::synthetic_default();
  EXPECT_EQ(NoiseModel::from_json(n.to_json()).to_json(), n.to_json());
  n.p2 = 1.5;
  EXPECT_THROW(n.check(), std::invalid_argument);
  EXPECT_THROW(run_shot(exec_of(""), n, 1), std::invalid_argument);
}

// --- transport accounting -------------------------------------------------------------

TEST(Counters, SkippedBlocksSkipTransportOnlyWhenConditional) {
  Module m = parse(R"(module t
attrs required_qubits=4 required_results=1
entry @main
func @main() {
block entry:
  mz q0 -> r0
  %c = read_result r0
  br %c, far, out
block far:
  cx q0, q3
  jmp out
block out:
  ret
}
)");
  CompileOptions always;
  always.mode = TransportMode::Always;
  ExecProgram cond = compile(m).exec;
  ExecProgram alw = compile(m, always).exec;
  ShotResult a = run_shot(cond, NoiseModel{}, 1);
  ShotResult b = run_shot(alw, NoiseModel{}, 1);
  EXPECT_EQ(a.counters.skipped_blocks, 1);
  EXPECT_EQ(a.counters.transport_steps, 0);
  EXPECT_EQ(b.counters.transport_steps, alw.planned_transport());
  EXPECT_GT(b.counters.transport_steps, 0);
  EXPECT_EQ(a.counters.gates, b.counters.gates);
}

TEST(CountersProperty, AlwaysModeNeverCheaper) {
  std::mt19937_64 rng(41);
  CompileOptions always;
  always.mode = TransportMode::Always;
  for (int i = 0; i < 60; ++i) {
    Module m = testing::random_program(rng);
    auto a = run_shots(compile(m).exec, NoiseModel{}, 20, i);
    auto b = run_shots(compile(m, always).exec, NoiseModel{}, 20, i);
    for (size_t k = 0; k < a.size(); ++k) {
      EXPECT_LE(a[k].counters.transport_steps, b[k].counters.transport_steps);
      EXPECT_EQ(a[k].outputs, b[k].outputs);
    }
  }
}

// --- repeat until success ------------------------------------------------------------------

TEST(Rus, SuccessfulPathsLeaveTargetExact) {
  for (auto style : {RusStyle::Loop, RusStyle::Recursion}) {
    Module m = build_rus({3, Basis::X, style});
    // Failed paths reach the final measurement too; only successful ones
    // must leave the target exact.
    double worst = 1;
    int checked = 0;
    MeasureHook ok_hook = [&](const StateVector &sv, const Measure &ms, const std::vector<bool> &res) {
      if (ms.slot != 2 || res[0] || res[1]) return;
      ++checked;
      worst = std::min(worst, (1 + sv.bloch(ms.qubit.index)[2]) / 2);
    };
    enumerate_outcomes(compile(m).exec, ok_hook);
    EXPECT_GT(checked, 0);
    EXPECT_GE(worst, 1 - 1e-9) << style_name(style);
  }
}

TEST(Rus, InterpreterAgreesWithCompiledProgram) {
  for (int n = 1; n <= 3; ++n)
    for (auto style : {RusStyle::Loop, RusStyle::Recursion}) {
      Module m = build_rus({n, Basis::Y, style});
      EXPECT_LE(testing::max_distribution_gap(enumerate_module(m), enumerate_outcomes(compile(m).exec)),
                1e-12);
    }
}

} // namespace
} // namespace qirq
