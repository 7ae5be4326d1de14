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

#include "qirq/emulator.hpp"
#include "qirq/passes.hpp"
#include "qirq/predication.hpp"
#include "qirq/textir.hpp"
#include "random_programs.hpp"

namespace qirq {
namespace {

Module prog(const std::string &blocks, int qubits = 3, int results = 3) {
  return parse("module t\nattrs required_qubits=" + std::to_string(qubits) +
               " required_results=" + std::to_string(results) + "\nentry @main\nfunc @main() {\n" +
               blocks + "}\n");
}

// Evaluates an expanded guard with branch conditions looked up by vreg name.
bool eval(const Guard &g, const Function &f, const std::map<std::string, bool> &env) {
  switch (g.kind) {
  case Guard::Kind::True: return true;
  case Guard::Kind::Block: throw std::logic_error("unexpanded guard");
  case Guard::Kind::Cond:
    if (auto *v = std::get_if<VReg>(&g.cond)) return env.at(f.info(*v).name);
    return std::get<bool>(g.cond);
  case Guard::Kind::Not: return !eval(g.args[0], f, env);
  case Guard::Kind::And:
    for (auto &a : g.args)
      if (!eval(a, f, env)) return false;
    return true;
  case Guard::Kind::Or:
    for (auto &a : g.args)
      if (eval(a, f, env)) return true;
    return false;
  }
  return false;
}

// A nested conditional: the rotation runs only when `cond` holds and the
// inner measurement returns One.
const char *kNested = R"(block entry:
  h q0
  mz q0 -> r0
  %cond = read_result r0
  br %cond, body, done
block body:
  h q1
  mz q1 -> r1
  %r1 = read_result r1
  br %r1, rot, done
block rot:
  rz(0.5) q2
  h q2
  jmp done
block done:
  mz q2 -> r2
  output array_start
  output result r2
  output array_end
  ret
)";

TEST(Guards, EntryTrueAndChainTrue) {
  Module m = prog("block a:\n  x q0\n  jmp b\nblock b:\n  jmp c\nblock c:\n  ret\n");
  auto g = compute_guards(m.entry_function());
  for (auto &[label, guard] : g) EXPECT_EQ(expand(guard, g), Guard::truth()) << label;
}

TEST(Guards, TriangleMergeIsOrOfEdges) {
  Module m = prog(R"(block entry:
  mz q0 -> r0
  %c = read_result r0
  br %c, then, merge
block then:
  x q1
  jmp merge
block merge:
  ret
)");
  const Function &f = m.entry_function();
  auto g = compute_guards(f);
  EXPECT_EQ(g.at("then").to_string(f), "%c");
  EXPECT_EQ(g.at("merge").to_string(f), "(!%c | g(then))");
  for (bool c : {false, true}) {
    EXPECT_EQ(eval(expand(g.at("then"), g), f, {{"c", c}}), c);
    EXPECT_TRUE(eval(expand(g.at("merge"), g), f, {{"c", c}}));
  }
}

TEST(Guards, NestedBlockGuardIsConjunction) {
  Module m = prog(kNested);
  const Function &f = m.entry_function();
  auto g = compute_guards(f);
  Guard rot = expand(g.at("rot"), g);
  for (bool c : {false, true})
    for (bool r : {false, true}) EXPECT_EQ(eval(rot, f, {{"cond", c}, {"r1", r}}), c && r);
  // Block references keep the stored guard linear in size.
  EXPECT_EQ(g.at("rot").to_string(f), "(g(body) & %r1)");
}

TEST(IfConvert, NestedProgramLinearizesInTopoOrder) {
  Module m = prog(kNested);
  GuardedFunction gf = if_convert(m);
  std::vector<std::string> labels;
  for (auto &b : gf.blocks) labels.push_back(b.label);
  EXPECT_EQ(labels, (std::vector<std::string>{"entry", "body", "rot", "done"}));
  // The rotation block is the last block carrying gates, under cond & r1.
  EXPECT_TRUE(std::any_of(gf.blocks[2].body.begin(), gf.blocks[2].body.end(), [](auto &i) {
    auto *q = std::get_if<QGate>(&i);
    return q && q->name == "rz";
  }));
  EXPECT_FALSE(std::any_of(gf.blocks[3].body.begin(), gf.blocks[3].body.end(),
                           [](auto &i) { return std::holds_alternative<QGate>(i); }));
  auto dist = enumerate_outcomes(
      lower(gf, TrapLayout::default_for(3), TransportMode::Conditional));
  EXPECT_LE(testing::max_distribution_gap(dist, enumerate_module(m)), 1e-12);
}

TEST(IfConvert, SingleBlockIsUnchanged) {
  Module m = prog("block entry:\n  h q0\n  cx q0, q1\n  mz q1 -> r0\n  ret\n");
  GuardedFunction gf = if_convert(m);
  ASSERT_EQ(gf.blocks.size(), 1u);
  EXPECT_EQ(gf.blocks[0].guard, Guard::truth());
  EXPECT_TRUE(gf.blocks[0].guard_code.empty());
  EXPECT_EQ(std::get<bool>(gf.blocks[0].guard_reg), true);
  const auto &orig = m.entry_function().blocks[0].body;
  ASSERT_EQ(gf.blocks[0].body.size(), orig.size());
  for (size_t i = 0; i < orig.size(); ++i)
    EXPECT_EQ(emit_instruction(gf.vars, gf.blocks[0].body[i]),
              emit_instruction(m.entry_function(), orig[i]));
  EXPECT_EQ(gf.new_vregs, 0);
}

// Diamond whose two input bits are set by X gates; the phi picks the angle.
Module diamond(bool b0, bool b1) {
  std::string pre = std::string(b0 ? "  x q0\n" : "") + (b1 ? "  x q1\n" : "");
  return prog("block entry:\n" + pre + R"(  mz q0 -> r0
  mz q1 -> r1
  %a = read_result r0
  %b = read_result r1
  %c = xor %a, %b
  br %c, left, right
block left:
  %u = add 0.75, 0.5
  jmp merge
block right:
  %v = mul 0.5, 0.25
  h q2
  jmp merge
block merge:
  %p = phi [%u, left], [%v, right]
  ry(%p) q2
  mz q2 -> r2
  output array_start
  output result r0
  output result r1
  output result r2
  output array_end
  ret
)");
}

TEST(IfConvert, DiamondWithPhiMatchesOnAllInputs) {
  for (bool b0 : {false, true})
    for (bool b1 : {false, true}) {
      Module m = diamond(b0, b1);
      GuardedFunction gf = if_convert(m);
      int selects = 0;
      for (auto &b : gf.blocks)
        for (auto &i : b.body) selects += std::holds_alternative<Select>(i);
      EXPECT_EQ(selects, 1);
      EXPECT_EQ(gf.blocks.size(), 4u);
      auto want = enumerate_module(m);
      auto got = enumerate_outcomes(lower(gf, TrapLayout::default_for(3), TransportMode::Conditional));
      EXPECT_LE(testing::max_distribution_gap(want, got), 1e-12) << b0 << b1;
      // Both arms merge, so exactly one of them ran.
      double total = 0;
      for (auto &[k, p] : got) total += p;
      EXPECT_NEAR(total, 1, 1e-12);
    }
}

TEST(IfConvert, RejectsCycles) {
  Module m = prog("block entry:\n  jmp a\nblock a:\n  x q0\n  jmp a\n");
  EXPECT_THROW(if_convert(m), CycleDetected);
}

TEST(IfConvert, RejectsNonSsa) {
  Module m = prog("block entry:\n  %a = add 1, 2\n  ret\n");
  m.functions[0].blocks[0].body.push_back(BinOp{BinOpKind::Add, VReg{0}, int64_t{1}, int64_t{1}});
  EXPECT_THROW(if_convert(m), NonSSA);
}

TEST(IfConvert, RejectsCalls) {
  Module m = parse(R"(module t
attrs required_qubits=1 required_results=0
entry @main
func @main() {
block entry:
  call @f(q0)
  ret
}
func @f(%q: qubit) {
block entry:
  ret
}
)");
  EXPECT_THROW(if_convert(m), std::invalid_argument);
}

TEST(IfConvert, EmitGuardedShowsGuards) {
  std::string text = emit_guarded(if_convert(prog(kNested)));
  EXPECT_NE(text.find("guarded @main"), std::string::npos) << text;
  EXPECT_NE(text.find("block rot ; guard (g(body) & %r1)"), std::string::npos) << text;
  EXPECT_NE(text.find("if "), std::string::npos);
}

int phi_slack(const Function &f) {
  int n = 0;
  for (auto &b : f.blocks)
    for (auto &p : b.phis) n += std::max<int>(0, static_cast<int>(p.incoming.size()) - 2);
  return n;
}

// Over random acyclic programs: block count, order soundness, linear register
// overhead, and exact distribution equivalence.
TEST(IfConvertProperty, RandomPrograms) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 200; ++i) {
    Module m = testing::random_program(rng);
    const Function &f = m.entry_function();
    GuardedFunction gf = if_convert(m);
    ASSERT_EQ(gf.blocks.size(), f.blocks.size());
    std::map<std::string, size_t> pos;
    for (size_t k = 0; k < gf.blocks.size(); ++k) pos[gf.blocks[k].label] = k;
    Cfg cfg = Cfg::build(f);
    for (auto &e : cfg.edges) EXPECT_LT(pos[cfg.nodes[e.from]], pos[cfg.nodes[e.to]]);
    int branches = testing::count_branches(m);
    EXPECT_LE(gf.new_vregs, 3 * branches + phi_slack(f));
    auto want = enumerate_module(m);
    for (auto mode : {TransportMode::Conditional, TransportMode::Always}) {
      auto got = enumerate_outcomes(lower(gf, TrapLayout::default_for(m.required_qubits), mode));
      ASSERT_LE(testing::max_distribution_gap(want, got), 1e-12) << emit(m);
    }
  }
}

} // namespace
} // namespace qirq
