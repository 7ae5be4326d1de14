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

#include <random>

#include "qirq/emulator.hpp"
#include "qirq/experiments.hpp"
#include "qirq/regalloc.hpp"
#include "qirq/textir.hpp"
#include "random_programs.hpp"

namespace qirq {
namespace {

GuardedFunction guarded(const std::string &blocks, int qubits = 3, int results = 3) {
  return if_convert(parse("module t\nattrs required_qubits=" + std::to_string(qubits) +
                          " required_results=" + std::to_string(results) +
                          "\nentry @main\nfunc @main() {\n" + blocks + "}\n"));
}

int id_of(const GuardedFunction &gf, const std::string &name) {
  for (size_t i = 0; i < gf.vars.vregs.size(); ++i)
    if (gf.vars.vregs[i].name == name) return static_cast<int>(i);
  throw std::out_of_range(name);
}

InterferenceGraph graph_of(const std::vector<std::pair<int, int>> &intervals) {
  std::vector<LiveRange> r;
  for (auto [b, e] : intervals) r.push_back({b, e});
  return build_interference(r);
}

// Per-position live sets from a flat scan of every instruction, independent
// of the interval bookkeeping in compute_liveness.
std::vector<std::set<int>> naive_live_sets(const GuardedFunction &gf) {
  std::vector<std::pair<std::vector<int>, std::vector<int>>> events(1); // [pos] -> (defs, uses)
  for (auto p : gf.vars.params) events[0].first.push_back(p.id);
  auto uses_of = [](const std::vector<Operand> &ops) {
    std::vector<int> u;
    for (auto &o : ops)
      if (auto *v = std::get_if<VReg>(&o)) u.push_back(v->id);
    return u;
  };
  for (auto &b : gf.blocks) {
    for (auto &i : b.guard_code) {
      auto d = defined_vreg(i);
      events.push_back({d ? std::vector<int>{d->id} : std::vector<int>{}, uses_of(used_operands(i))});
    }
    events.push_back({{}, uses_of({b.guard_reg})});
    for (auto &i : b.body) {
      auto d = defined_vreg(i);
      auto u = uses_of(used_operands(i));
      for (int g : uses_of({b.guard_reg})) u.push_back(g);
      events.push_back({d ? std::vector<int>{d->id} : std::vector<int>{}, u});
    }
  }
  std::vector<std::set<int>> live(events.size());
  for (size_t p = 0; p < events.size(); ++p)
    for (int v : events[p].first)
      for (size_t q = p + 1; q < events.size(); ++q)
        if (std::count(events[q].second.begin(), events[q].second.end(), v))
          for (size_t k = p; k < q; ++k) live[k].insert(v);
  return live;
}

TEST(Liveness, OperandsOfAnAddInterfere) {
  GuardedFunction gf = guarded(R"(block entry:
  mz q0 -> r0
  mz q1 -> r1
  %a = read_result r0
  %b = read_result r1
  %c = xor %a, %b
  br %c, x, y
block x:
  ret
block y:
  ret
)");
  auto r = compute_liveness(gf);
  int a = id_of(gf, "a"), b = id_of(gf, "b"), c = id_of(gf, "c");
  EXPECT_LT(r[a].begin, r[b].begin);
  EXPECT_EQ(r[a].end, r[c].begin);
  EXPECT_EQ(r[b].end, r[c].begin);
  auto g = build_interference(r);
  EXPECT_TRUE(g.has_edge(a, b));
  EXPECT_FALSE(g.has_edge(a, c));
  EXPECT_FALSE(g.has_edge(b, c));
}

TEST(Liveness, UnusedVregHasEmptyRange) {
  GuardedFunction gf = guarded("block entry:\n  mz q0 -> r0\n  %dead = read_result r0\n  ret\n");
  EXPECT_TRUE(compute_liveness(gf)[id_of(gf, "dead")].empty());
}

TEST(Liveness, GuardRegisterSpansConsecutiveBlocks) {
  GuardedFunction gf = guarded(R"(block entry:
  mz q0 -> r0
  %c = read_result r0
  br %c, one, out
block one:
  x q1
  jmp two
block two:
  x q2
  jmp three
block three:
  h q1
  jmp out
block out:
  ret
)");
  ASSERT_EQ(gf.blocks.size(), 5u);
  auto g1 = std::get<VReg>(gf.blocks[1].guard_reg);
  EXPECT_EQ(std::get<VReg>(gf.blocks[2].guard_reg), g1);
  EXPECT_EQ(std::get<VReg>(gf.blocks[3].guard_reg), g1);
  auto ranges = compute_liveness(gf);
  auto live = naive_live_sets(gf);
  // Position of the last body instruction of block `three`.
  int pos = 0;
  for (size_t b = 0; b < 4; ++b) pos += static_cast<int>(gf.blocks[b].guard_code.size() + 1 + gf.blocks[b].body.size());
  EXPECT_TRUE(live[pos - 1].count(g1.id));
  EXPECT_LE(ranges[g1.id].begin, pos - static_cast<int>(gf.blocks[3].body.size() + gf.blocks[2].body.size()));
  EXPECT_GE(ranges[g1.id].end, pos);
}

TEST(LivenessProperty, MatchesNaiveScan) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    GuardedFunction gf = if_convert(testing::random_program(rng));
    auto ranges = compute_liveness(gf);
    auto live = naive_live_sets(gf);
    for (size_t v = 0; v < ranges.size(); ++v)
      for (size_t p = 0; p < live.size(); ++p) {
        bool in = !ranges[v].empty() && ranges[v].begin <= static_cast<int>(p) &&
                  static_cast<int>(p) < ranges[v].end;
        ASSERT_EQ(in, live[p].count(static_cast<int>(v)) == 1) << "v" << v << " p" << p;
      }
  }
}

TEST(Interference, OverlapMakesEdge) {
  EXPECT_TRUE(graph_of({{0, 5}, {3, 8}}).has_edge(0, 1));
}

TEST(Interference, TouchingHalfOpenRangesDoNot) {
  auto g = graph_of({{0, 3}, {3, 6}});
  EXPECT_FALSE(g.has_edge(0, 1));
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(Interference, NestedRangesFormClique) {
  auto g = graph_of({{0, 10}, {1, 9}, {2, 8}, {3, 7}, {4, 6}});
  EXPECT_EQ(g.edge_count(), 10u);
  for (int a = 0; a < 5; ++a) EXPECT_FALSE(g.has_edge(a, a));
}

TEST(Interference, EmptyRangesAreNotNodes) {
  auto g = graph_of({{0, 4}, {2, 2}, {1, 3}});
  EXPECT_EQ(g.nodes, (std::vector<int>{0, 2}));
}

TEST(Color, TriangleNeedsThree) {
  auto g = graph_of({{0, 5}, {1, 5}, {2, 5}});
  try {
    color(g, 2);
    FAIL();
  } catch (const RegisterPressureExceeded &e) {
    EXPECT_EQ(e.k(), 2);
    EXPECT_EQ(e.needed_hint(), 3);
    EXPECT_NE(std::string(e.what()).find("register pressure exceeds real-time register file"),
              std::string::npos);
  }
  EXPECT_EQ(color(g, 3).colors_used(), 3);
}

TEST(Color, PathIsTwoColorable) {
  auto g = graph_of({{0, 2}, {1, 3}, {2, 4}, {3, 5}});
  RegFile rf = color(g, 2);
  // Simplify pops 0,1,2,3 (lowest id first); coloring runs 3,2,1,0.
  EXPECT_EQ(rf.assignment, (std::map<int, int>{{0, 1}, {1, 0}, {2, 1}, {3, 0}}));
}

TEST(Color, FiveCliqueWithFourRegistersFails) {
  EXPECT_THROW(color(graph_of({{0, 10}, {1, 9}, {2, 8}, {3, 7}, {4, 6}}), 4),
               RegisterPressureExceeded);
}

TEST(ColorProperty, RandomIntervalSetsColorValidly) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 500; ++t) {
    int n = std::uniform_int_distribution<int>(1, 40)(rng);
    std::vector<LiveRange> r;
    for (int i = 0; i < n; ++i) {
      int b = std::uniform_int_distribution<int>(0, 60)(rng);
      r.push_back({b, b + std::uniform_int_distribution<int>(0, 15)(rng)});
    }
    auto g = build_interference(r);
    // Chaitin is not optimal; leave headroom above the overlap depth.
    int depth = 0;
    for (int p = 0; p < 80; ++p) {
      int d = 0;
      for (auto &x : r) d += !x.empty() && x.begin <= p && p < x.end;
      depth = std::max(depth, d);
    }
    RegFile rf = color(g, std::max(depth, 1) + 8);
    for (int v : g.nodes)
      for (int u : g.adj.at(v)) ASSERT_NE(rf.assignment.at(u), rf.assignment.at(v));
    for (auto [v, c] : rf.assignment) ASSERT_LT(c, rf.k);
  }
}

TEST(Allocate, RusRecursionFitsThirtyTwo) {
  Compiled c = compile(build_rus({3, Basis::X, RusStyle::Recursion}), [] {
    CompileOptions o;
    o.registers = 32;
    return o;
  }());
  EXPECT_LE(c.alloc.regs.colors_used(), 32);
  EXPECT_GT(c.alloc.regs.colors_used(), 0);
}

TEST(Allocate, PressureIsACompileError) {
  CompileOptions o;
  o.registers = 1;
  EXPECT_THROW(compile(build_rus({3, Basis::X, RusStyle::Loop}), o), RegisterPressureExceeded);
}

TEST(Allocate, RewriteUsesPhysicalNames) {
  Allocation a = compile(build_msd({1, Basis::Z})).alloc;
  for (auto &v : a.code.vars.vregs) EXPECT_EQ(v.name[0], 'R');
  std::string text = emit_guarded(a.code);
  EXPECT_EQ(text.find('%' + std::string("fail")), std::string::npos);
}

TEST(AllocateProperty, RewritingKeepsDistribution) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 150; ++i) {
    Module m = testing::random_program(rng);
    GuardedFunction gf = if_convert(m);
    auto before = enumerate_outcomes(lower(gf, TrapLayout::default_for(3), TransportMode::Conditional));
    // The tightest register file that still colors, to force reuse.
    int k = 1;
    Allocation a;
    for (;; ++k) {
      try {
        a = allocate_registers(gf, k);
        break;
      } catch (const RegisterPressureExceeded &) {
      }
    }
    auto after = enumerate_outcomes(lower(a.code, TrapLayout::default_for(3), TransportMode::Conditional));
    ASSERT_LE(testing::max_distribution_gap(before, after), 1e-12) << emit(m);
  }
}

} // namespace
} // namespace qirq
