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

#include <algorithm>

#include "qirq/ir.hpp"
#include "qirq/textir.hpp"
#include "random_programs.hpp"

namespace qirq {
namespace {

const char *kDiamond = R"(
module diamond
attrs required_qubits=3 required_results=1
entry @main
func @main() {
block entry:
  h q0
  mz q0 -> r0
  %c = read_result r0
  br %c, then, else
block then:
  x q1
  jmp merge
block else:
  z q1
  jmp merge
block merge:
  cx q1, q2
  ret
}
)";

Module wrap(const std::string &blocks, int qubits = 3, int results = 2) {
  return parse("module t\nattrs required_qubits=" + std::to_string(qubits) +
               " required_results=" + std::to_string(results) + "\nentry @main\nfunc @main() {\n" +
               blocks + "}\n");
}

TEST(Validate, DiamondIsCompliant) {
  auto d = validate_profile(parse(kDiamond));
  EXPECT_TRUE(d.items.empty()) << d.to_string();
}

TEST(Validate, SelfLoopIsBackEdge) {
  auto d = validate_profile(wrap("block entry:\n  jmp spin\nblock spin:\n  x q0\n  jmp spin\n"));
  EXPECT_TRUE(d.has("BACK_EDGE"));
  EXPECT_TRUE(d.has_errors());
}

TEST(Validate, LenientDowngradesBackEdgeToWarning) {
  auto d = validate_profile(wrap("block entry:\n  jmp spin\nblock spin:\n  x q0\n  jmp spin\n"),
                            Strictness::Lenient);
  EXPECT_TRUE(d.has("BACK_EDGE"));
  EXPECT_FALSE(d.has_errors());
}

TEST(Validate, QubitOutOfRange) {
  auto d = validate_profile(wrap("block entry:\n  h q5\n  ret\n", 3));
  EXPECT_TRUE(d.has("QUBIT_RANGE"));
}

TEST(Validate, ResultOutOfRange) {
  auto d = validate_profile(wrap("block entry:\n  mz q0 -> r4\n  ret\n", 3, 2));
  EXPECT_TRUE(d.has("RESULT_RANGE"));
}

TEST(Validate, UnknownGate) {
  auto d = validate_profile(wrap("block entry:\n  ccz q0\n  ret\n"));
  EXPECT_TRUE(d.has("UNKNOWN_GATE"));
}

TEST(Validate, UseBeforeDefinitionAcrossBranches) {
  auto d = validate_profile(wrap(R"(block entry:
  mz q0 -> r0
  %c = read_result r0
  br %c, a, b
block a:
  %v = add 1, 2
  jmp b
block b:
  %w = add %v, 1
  ret
)"));
  EXPECT_TRUE(d.has("USE_BEFORE_DEF"));
}

TEST(Validate, DoubleDefinition) {
  Module m = wrap("block entry:\n  %a = add 1, 2\n  ret\n");
  auto &f = m.functions[0];
  f.blocks[0].body.push_back(BinOp{BinOpKind::Add, VReg{0}, int64_t{3}, int64_t{4}});
  EXPECT_TRUE(validate_profile(m).has("DOUBLE_DEF"));
}

TEST(Validate, UnresolvedCall) {
  auto d = validate_profile(wrap("block entry:\n  call @nowhere(q0)\n  ret\n"), Strictness::Lenient);
  EXPECT_TRUE(d.has("UNRESOLVED_CALL"));
}

TEST(Validate, CallsAreErrorsOnlyWhenStrict) {
  const char *src = R"(module t
attrs required_qubits=1 required_results=0
entry @main
func @main() {
block entry:
  call @f(q0)
  ret
}
func @f(%q: qubit) {
block entry:
  h %q
  ret
}
)";
  EXPECT_FALSE(validate_profile(parse(src), Strictness::Lenient).has_errors());
  EXPECT_TRUE(validate_profile(parse(src), Strictness::Strict).has_errors());
}

TEST(Validate, IdempotentOnAcceptedPrograms) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    Module m = testing::random_program(rng);
    auto a = validate_profile(m);
    auto b = validate_profile(m);
    ASSERT_FALSE(a.has_errors()) << a.to_string();
    EXPECT_EQ(a.to_string(), b.to_string());
  }
}

TEST(TopoSort, DiamondUsesSourceOrderTieBreak) {
  auto order = topo_sort(Cfg::build(parse(kDiamond).entry_function()));
  EXPECT_EQ(order, (std::vector<std::string>{"entry", "then", "else", "merge"}));
}

TEST(TopoSort, SingleBlock) {
  auto order = topo_sort(Cfg::build(wrap("block only:\n  ret\n").entry_function()));
  EXPECT_EQ(order, std::vector<std::string>{"only"});
}

TEST(TopoSort, Chain) {
  auto m = wrap("block A:\n  jmp B\nblock B:\n  jmp C\nblock C:\n  ret\n");
  EXPECT_EQ(topo_sort(Cfg::build(m.entry_function())), (std::vector<std::string>{"A", "B", "C"}));
}

TEST(TopoSort, SourceOrderBeatsDiscoveryOrder) {
  // `late` is listed first but only becomes ready after `early`.
  auto m = wrap(R"(block entry:
  mz q0 -> r0
  %c = read_result r0
  br %c, late, early
block late:
  ret
block early:
  jmp late2
block late2:
  ret
)");
  EXPECT_EQ(topo_sort(Cfg::build(m.entry_function())),
            (std::vector<std::string>{"entry", "late", "early", "late2"}));
}

TEST(TopoSort, CycleThrows) {
  auto m = wrap("block entry:\n  jmp a\nblock a:\n  jmp b\nblock b:\n  jmp a\n");
  Cfg cfg = Cfg::build(m.entry_function());
  EXPECT_FALSE(cfg.acyclic());
  EXPECT_THROW(topo_sort(cfg), CycleDetected);
}

TEST(Cfg, EdgeKindsMirrorTerminators) {
  Cfg cfg = Cfg::build(parse(kDiamond).entry_function());
  ASSERT_EQ(cfg.edges.size(), 4u);
  EXPECT_EQ(cfg.edges[0], (CfgEdge{0, 1, EdgeKind::TrueArm}));
  EXPECT_EQ(cfg.edges[1], (CfgEdge{0, 2, EdgeKind::FalseArm}));
  EXPECT_EQ(cfg.edges[2], (CfgEdge{1, 3, EdgeKind::Unconditional}));
  EXPECT_EQ(cfg.edges[3], (CfgEdge{2, 3, EdgeKind::Unconditional}));
}

// Properties over random programs: topo order is a permutation respecting
// every edge, and the edge set rebuilds the terminator shapes exactly.
TEST(CfgProperty, TopoOrderAndTerminatorRoundTrip) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    Module m = testing::random_program(rng);
    const Function &f = m.entry_function();
    Cfg cfg = Cfg::build(f);
    auto order = topo_sort(cfg);
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    auto nodes = cfg.nodes;
    std::sort(nodes.begin(), nodes.end());
    ASSERT_EQ(sorted, nodes);
    std::map<std::string, size_t> pos;
    for (size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
    for (auto &e : cfg.edges) EXPECT_LT(pos[cfg.nodes[e.from]], pos[cfg.nodes[e.to]]);

    auto rebuilt = reconstruct_terminators(cfg);
    ASSERT_EQ(rebuilt.size(), f.blocks.size());
    for (size_t b = 0; b < f.blocks.size(); ++b) {
      const auto &orig = f.blocks[b].term;
      ASSERT_EQ(orig.index(), rebuilt[b].index());
      if (auto *j = std::get_if<Jump>(&orig)) EXPECT_EQ(j->target, std::get<Jump>(rebuilt[b]).target);
      if (auto *br = std::get_if<Branch>(&orig)) {
        EXPECT_EQ(br->if_true, std::get<Branch>(rebuilt[b]).if_true);
        EXPECT_EQ(br->if_false, std::get<Branch>(rebuilt[b]).if_false);
      }
    }
  }
}

TEST(Dominators, Diamond) {
  auto idom = dominators(Cfg::build(parse(kDiamond).entry_function()));
  EXPECT_EQ(idom, (std::vector<int>{0, 0, 0, 0}));
}

TEST(Eval, IntegerAndBooleanOps) {
  EXPECT_EQ(std::get<int64_t>(eval_binop(BinOpKind::Add, int64_t{2}, int64_t{3})), 5);
  EXPECT_EQ(std::get<int64_t>(eval_binop(BinOpKind::Sub, int64_t{2}, int64_t{3})), -1);
  EXPECT_EQ(std::get<bool>(eval_binop(BinOpKind::Xor, true, true)), false);
  EXPECT_TRUE(eval_cmp(CmpKind::Gt, int64_t{4}, int64_t{3}));
  EXPECT_FALSE(eval_cmp(CmpKind::Ne, int64_t{4}, int64_t{4}));
}

} // namespace
} // namespace qirq
