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

#include "qirq/emulator.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace qirq {

// --- state vector ------------------------------------------------------------------

StateVector::StateVector(int n) : n_(n), amp_(size_t{1} << n) {
  if (n < 0 || n > 24) throw std::invalid_argument("state vector size out of range");
  amp_[0] = 1;
}

void StateVector::apply(const Mat2 &m, int q) {
  const size_t bit = size_t{1} << q;
  for (size_t i = 0; i < amp_.size(); ++i) {
    if (i & bit) continue;
    cplx a = amp_[i], b = amp_[i | bit];
    amp_[i] = m[0] * a + m[1] * b;
    amp_[i | bit] = m[2] * a + m[3] * b;
  }
}

void StateVector::apply_cx(int control, int target) {
  const size_t c = size_t{1} << control, t = size_t{1} << target;
  for (size_t i = 0; i < amp_.size(); ++i)
    if ((i & c) && !(i & t)) std::swap(amp_[i], amp_[i | t]);
}

void StateVector::apply_pauli(int q, char p) {
  const size_t bit = size_t{1} << q;
  const cplx i1(0, 1);
  for (size_t i = 0; i < amp_.size(); ++i) {
    if (i & bit) continue;
    cplx &a = amp_[i], &b = amp_[i | bit];
    switch (p) {
    case 'X': std::swap(a, b); break;
    case 'Y': {
      cplx na = -i1 * b, nb = i1 * a;
      a = na;
      b = nb;
      break;
    }
    case 'Z': b = -b; break;
    default: throw std::invalid_argument("unknown Pauli");
    }
  }
}

double StateVector::prob_one(int q) const {
  const size_t bit = size_t{1} << q;
  double p = 0;
  for (size_t i = 0; i < amp_.size(); ++i)
    if (i & bit) p += std::norm(amp_[i]);
  return std::min(1.0, p);
}

void StateVector::collapse(int q, bool bit, double p) {
  const size_t mask = size_t{1} << q;
  const double scale = 1.0 / std::sqrt(p);
  for (size_t i = 0; i < amp_.size(); ++i) {
    if (static_cast<bool>(i & mask) == bit) amp_[i] *= scale;
    else amp_[i] = 0;
  }
}

double StateVector::norm() const {
  double s = 0;
  for (auto &a : amp_) s += std::norm(a);
  return s;
}

std::array<double, 3> StateVector::bloch(int q) const {
  const size_t bit = size_t{1} << q;
  cplx rho01 = 0;
  double p0 = 0, p1 = 0;
  for (size_t i = 0; i < amp_.size(); ++i) {
    if (i & bit) continue;
    rho01 += amp_[i] * std::conj(amp_[i | bit]);
    p0 += std::norm(amp_[i]);
    p1 += std::norm(amp_[i | bit]);
  }
  return {2 * rho01.real(), -2 * rho01.imag(), p0 - p1};
}

// --- noise config ----------------------------------------------------------------------

NoiseModel NoiseModel::synthetic_default() {
  NoiseModel n;
  n.p1 = 1e-4;
  n.p2 = 3e-3;
  n.p_meas = 3e-3;
  n.p_reset = 3e-3;
  n.p_transport = 2e-4;
  n.p_idle = 1e-4;
  return n;
}

void NoiseModel::check() const {
  for (double p : {p1, p2, p_meas, p_reset, p_transport, p_idle})
    if (!(p >= 0 && p <= 1)) throw std::invalid_argument("noise probabilities must lie in [0,1]");
  if (!std::isfinite(prep_overrotation)) throw std::invalid_argument("overrotation must be finite");
}

NoiseModel NoiseModel::from_json(const nlohmann::json &j) {
  NoiseModel n;
  if (j.value("preset", "") == "synthetic") n = synthetic_default();
  n.p1 = j.value("p1", n.p1);
  n.p2 = j.value("p2", n.p2);
  n.p_meas = j.value("p_meas", n.p_meas);
  n.p_reset = j.value("p_reset", n.p_reset);
  n.p_transport = j.value("p_transport", n.p_transport);
  n.p_idle = j.value("p_idle", n.p_idle);
  n.prep_overrotation = j.value("prep_overrotation", n.prep_overrotation);
  n.check();
  return n;
}

nlohmann::json NoiseModel::to_json() const {
  return {{"p1", p1},         {"p2", p2},
          {"p_meas", p_meas}, {"p_reset", p_reset},
          {"p_transport", p_transport}, {"p_idle", p_idle},
          {"prep_overrotation", prep_overrotation}};
}

std::string outcome_key(const std::vector<OutputEvent> &out) {
  std::string s;
  for (auto &e : out) {
    switch (e.kind) {
    case OutputKind::ArrayStart: s += '['; break;
    case OutputKind::ArrayEnd: s += ']'; break;
    case OutputKind::TupleStart: s += '('; break;
    case OutputKind::TupleEnd: s += ')'; break;
    case OutputKind::Result: s += e.bit ? '1' : '0'; break;
    }
  }
  return s;
}

std::vector<int> ShotResult::result_bits() const {
  std::vector<int> b;
  for (auto &e : outputs)
    if (e.kind == OutputKind::Result) b.push_back(e.bit);
  return b;
}

uint64_t shot_seed(uint64_t master, uint64_t index) {
  uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// --- machine ------------------------------------------------------------------------------

namespace {

struct NeedBranch {
  double p1;
};

// Enumeration replays a prefix of forced outcomes and asks for a branch at
// the first undecided one.
struct Replay {
  const std::vector<uint8_t> *prefix = nullptr;
  size_t next = 0;
  double prob = 1;
  int measures = 0;
};

class Machine {
public:
  Machine(int qubits, int results, const NoiseModel &noise, uint64_t seed, Replay *replay,
          const MeasureHook *hook)
      : sv(qubits), results(results, false), noise_(noise), rng_(seed), replay_(replay),
        hook_(hook) {}

  StateVector sv;
  std::vector<bool> results;
  std::vector<OutputEvent> outputs;
  std::vector<MeasureEvent> log;
  Counters counters;

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return p > 0 && uniform() < p; }

  void gate(const std::string &name, const std::vector<int> &qs, double angle) {
    ++counters.gates;
    if (name == "cx") {
      sv.apply_cx(qs[0], qs[1]);
      if (chance(noise_.p2)) {
        int k = 1 + static_cast<int>(uniform() * 15);
        pauli(qs[0], k % 4);
        pauli(qs[1], k / 4);
      }
      return;
    }
    if (name == "ry") angle += noise_.prep_overrotation;
    sv.apply(gate_matrix(name, angle), qs[0]);
    if (chance(noise_.p1)) pauli(qs[0], 1 + static_cast<int>(uniform() * 3));
  }

  void measure(const Measure &m, int q) {
    ++counters.gates;
    if (hook_ && *hook_) (*hook_)(sv, m, results);
    if (replay_ && ++replay_->measures > kMaxEnumeratedMeasurements)
      throw TooManyBranches("more than " + std::to_string(kMaxEnumeratedMeasurements) +
                            " measurements along one path");
    bool bit = project(q);
    bool recorded = bit != chance(noise_.p_meas);
    if (m.slot < 0 || m.slot >= static_cast<int>(results.size()))
      throw std::out_of_range("result slot r" + std::to_string(m.slot) + " out of range");
    results[m.slot] = recorded;
    log.push_back({q, m.slot, recorded});
  }

  void reset(int q) {
    ++counters.gates;
    if (project(q)) sv.apply_pauli(q, 'X');
    if (chance(noise_.p_reset)) sv.apply_pauli(q, 'X');
  }

  void output(const Output &o) {
    bool bit = false;
    if (o.kind == OutputKind::Result) {
      if (o.slot < 0 || o.slot >= static_cast<int>(results.size()))
        throw std::out_of_range("result slot r" + std::to_string(o.slot) + " out of range");
      bit = results[o.slot];
    }
    outputs.push_back({o.kind, bit});
  }

  void dephase(int q, double p) {
    if (chance(p)) sv.apply_pauli(q, 'Z');
  }

private:
  NoiseModel noise_;
  std::mt19937_64 rng_;
  Replay *replay_;
  const MeasureHook *hook_;

  void pauli(int q, int k) {
    if (k) sv.apply_pauli(q, "IXYZ"[k]);
  }

  bool project(int q) {
    double p1 = sv.prob_one(q);
    bool bit;
    if (replay_) {
      if (p1 < kPruneProbability) bit = false;
      else if (1 - p1 < kPruneProbability) bit = true;
      else if (replay_->next < replay_->prefix->size()) bit = (*replay_->prefix)[replay_->next++];
      else throw NeedBranch{p1};
      if (p1 >= kPruneProbability && 1 - p1 >= kPruneProbability)
        replay_->prob *= bit ? p1 : 1 - p1;
    } else {
      bit = uniform() < p1;
    }
    sv.collapse(q, bit, bit ? p1 : 1 - p1);
    return bit;
  }
};

Literal eval_operand(const Operand &o, const std::vector<Literal> &regs) {
  if (auto *v = std::get_if<VReg>(&o)) return regs.at(v->id);
  return *as_literal(o);
}

void exec_classical(const Instruction &ins, std::vector<Literal> &regs, Machine &m) {
  auto val = [&](const Operand &o) { return eval_operand(o, regs); };
  std::visit(
      [&](const auto &i) {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, BinOp>) regs.at(i.dst.id) = eval_binop(i.op, val(i.lhs), val(i.rhs));
        else if constexpr (std::is_same_v<T, Cmp>) regs.at(i.dst.id) = eval_cmp(i.op, val(i.lhs), val(i.rhs));
        else if constexpr (std::is_same_v<T, Select>)
          regs.at(i.dst.id) = truthy(val(i.cond)) ? val(i.if_true) : val(i.if_false);
        else if constexpr (std::is_same_v<T, ReadResult>) regs.at(i.dst.id) = static_cast<bool>(m.results.at(i.slot));
        else if constexpr (std::is_same_v<T, Output>) m.output(i);
        else throw std::invalid_argument("unexpected instruction in classical position");
      },
      ins);
}

class ExecRunner {
public:
  ExecRunner(const ExecProgram &p, const NoiseModel &noise, Machine &m)
      : p_(p), noise_(noise), m_(m), regs_(std::max(p.registers, 1), Literal{int64_t{0}}),
        place_(p.canonical) {}

  void run() {
    for (auto &item : p_.items) {
      if (auto *i = std::get_if<Instruction>(&item)) {
        exec_classical(*i, regs_, m_);
        continue;
      }
      const auto &b = std::get<ExecBlock>(item);
      if (truthy(eval_operand(b.guard, regs_))) {
        block(b);
      } else {
        ++m_.counters.skipped_blocks;
        if (!p_.conditional_transport) {
          for (auto &s : b.steps)
            if (auto *l = std::get_if<LayerStep>(&s)) transport(l->transport);
          transport(b.epilogue);
        }
      }
    }
  }

private:
  const ExecProgram &p_;
  const NoiseModel &noise_;
  Machine &m_;
  std::vector<Literal> regs_;
  Placement place_;

  void transport(const std::vector<TransportStep> &steps) {
    for (auto &s : steps) {
      apply_step(place_, s);
      ++m_.counters.transport_steps;
      if (noise_.p_transport > 0)
        for (int q = 0; q < p_.num_qubits; ++q) m_.dephase(q, noise_.p_transport);
    }
  }

  void check_zone(const ScheduledOp &op, const std::vector<int> &qs) {
    if (op.slot >= 0) {
      if (place_.slot_of[qs[0]] != op.slot)
        throw ZoneViolation("q" + std::to_string(qs[0]) + " is not in slot " + std::to_string(op.slot));
      return;
    }
    auto [z0, z1] = p_.trap.zones.at(op.zone);
    for (int q : qs) {
      int s = place_.slot_of[q];
      if (s != z0 && s != z1)
        throw ZoneViolation("q" + std::to_string(q) + " is not in gate zone " + std::to_string(op.zone));
    }
  }

  void block(const ExecBlock &b) {
    for (auto &s : b.steps) {
      if (auto *i = std::get_if<Instruction>(&s)) {
        exec_classical(*i, regs_, m_);
        continue;
      }
      const auto &l = std::get<LayerStep>(s);
      transport(l.transport);
      std::vector<bool> busy(p_.num_qubits, false);
      for (auto &op : l.layer.ops) {
        std::vector<int> qs;
        for (auto &q : qubits_of(op.op)) qs.push_back(q.index);
        check_zone(op, qs);
        for (int q : qs) busy[q] = true;
        if (auto *g = std::get_if<QGate>(&op.op)) {
          double angle = g->angle ? std::get<double>(coerce(eval_operand(*g->angle, regs_))) : 0.0;
          m_.gate(g->name, qs, angle);
        } else if (auto *ms = std::get_if<Measure>(&op.op)) {
          m_.measure(*ms, qs[0]);
        } else {
          m_.reset(qs[0]);
        }
      }
      if (noise_.p_idle > 0)
        for (int q = 0; q < p_.num_qubits; ++q)
          if (!busy[q]) m_.dephase(q, noise_.p_idle);
    }
    transport(b.epilogue);
  }

  static Literal coerce(const Literal &l) {
    if (auto *i = std::get_if<int64_t>(&l)) return static_cast<double>(*i);
    if (auto *b = std::get_if<bool>(&l)) return *b ? 1.0 : 0.0;
    return l;
  }
};

ShotResult finish(Machine &m, uint64_t seed) {
  ShotResult r;
  r.outputs = std::move(m.outputs);
  r.results = m.results;
  r.counters = m.counters;
  r.seed = seed;
  r.log = std::move(m.log);
  return r;
}

template <typename RunFn>
std::map<std::string, double> enumerate(const RunFn &run) {
  std::map<std::string, double> dist;
  std::vector<std::vector<uint8_t>> stack{{}};
  while (!stack.empty()) {
    auto prefix = std::move(stack.back());
    stack.pop_back();
    Replay replay{&prefix};
    try {
      std::string key = run(replay);
      dist[key] += replay.prob;
    } catch (const NeedBranch &) {
      // Push 1 first so the 0 branch is explored first.
      for (uint8_t bit : {1, 0}) {
        auto next = prefix;
        next.push_back(bit);
        stack.push_back(std::move(next));
      }
    }
  }
  return dist;
}

} // namespace

ShotResult run_shot(const ExecProgram &prog, const NoiseModel &noise, uint64_t seed) {
  noise.check();
  Machine m(prog.num_qubits, prog.num_results, noise, seed, nullptr, nullptr);
  ExecRunner(prog, noise, m).run();
  return finish(m, seed);
}

std::vector<ShotResult> run_shots(const ExecProgram &prog, const NoiseModel &noise, int shots,
                                  uint64_t master_seed, int parallelism) {
  if (shots < 1) throw std::invalid_argument("need at least one shot");
  std::vector<ShotResult> out(shots);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (int i; (i = next.fetch_add(1)) < shots;) {
      try {
        out[i] = run_shot(prog, noise, shot_seed(master_seed, static_cast<uint64_t>(i)));
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = shots;
      }
    }
  };
  int jobs = std::max(1, std::min(parallelism, shots));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto &t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::map<std::string, double> enumerate_outcomes(const ExecProgram &prog, const MeasureHook &hook) {
  return enumerate([&](Replay &replay) {
    Machine m(prog.num_qubits, prog.num_results, NoiseModel{}, 0, &replay, &hook);
    ExecRunner(prog, NoiseModel{}, m).run();
    return outcome_key(m.outputs);
  });
}

// --- direct IR interpreter ---------------------------------------------------------------

namespace {

class Interpreter {
public:
  Interpreter(const Module &mod, Machine &m) : mod_(mod), m_(m) {}

  void run() { call(mod_.entry_function(), {}, {}); }

private:
  const Module &mod_;
  Machine &m_;
  long steps_ = 0;
  int depth_ = 0;

  struct Frame {
    std::unordered_map<int, Literal> vals;
    std::unordered_map<int, int> qubits;
  };

  static Literal value(const Frame &fr, const Operand &o) {
    if (auto *v = std::get_if<VReg>(&o)) {
      auto it = fr.vals.find(v->id);
      if (it == fr.vals.end()) throw std::runtime_error("read of undefined value");
      return it->second;
    }
    return *as_literal(o);
  }
  static int qubit(const Frame &fr, const QubitRef &q) {
    return q.param ? fr.qubits.at(q.index) : q.index;
  }

  void call(const Function &f, std::vector<Literal> vals, std::vector<int> qubits) {
    if (++depth_ > 10000) throw std::runtime_error("call depth limit reached");
    Frame fr;
    size_t vi = 0, qi = 0;
    for (auto p : f.params) {
      if (f.info(p).type == Type::Qubit) fr.qubits[p.id] = qubits.at(qi++);
      else fr.vals[p.id] = vals.at(vi++);
    }
    const BasicBlock *b = &f.blocks.at(0);
    std::string prev;
    for (;;) {
      if (++steps_ > 10'000'000) throw std::runtime_error("step limit reached");
      std::vector<std::pair<int, Literal>> incoming;
      for (auto &p : b->phis) {
        bool found = false;
        for (auto &in : p.incoming)
          if (in.second == prev) {
            incoming.emplace_back(p.dst.id, value(fr, in.first));
            found = true;
            break;
          }
        if (!found) throw std::runtime_error("phi in " + b->label + " has no value for " + prev);
      }
      for (auto &[id, v] : incoming) fr.vals[id] = v;
      for (auto &ins : b->body) step(f, fr, ins);
      if (std::holds_alternative<Return>(b->term)) break;
      std::string next;
      if (auto *j = std::get_if<Jump>(&b->term)) next = j->target;
      else {
        auto &br = std::get<Branch>(b->term);
        next = truthy(value(fr, br.cond)) ? br.if_true : br.if_false;
      }
      prev = b->label;
      b = f.find_block(next);
      if (!b) throw std::runtime_error("jump to missing block " + next);
    }
    --depth_;
  }

  void step(const Function &, Frame &fr, const Instruction &ins) {
    std::visit(
        [&](const auto &i) {
          using T = std::decay_t<decltype(i)>;
          if constexpr (std::is_same_v<T, QGate>) {
            std::vector<int> qs;
            for (auto &q : i.qubits) qs.push_back(qubit(fr, q));
            double a = 0;
            if (i.angle) {
              Literal l = value(fr, *i.angle);
              a = std::holds_alternative<double>(l) ? std::get<double>(l)
                  : std::holds_alternative<int64_t>(l) ? static_cast<double>(std::get<int64_t>(l))
                                                        : (std::get<bool>(l) ? 1.0 : 0.0);
            }
            m_.gate(i.name, qs, a);
          } else if constexpr (std::is_same_v<T, Measure>) {
            m_.measure(i, qubit(fr, i.qubit));
          } else if constexpr (std::is_same_v<T, Reset>) {
            m_.reset(qubit(fr, i.qubit));
          } else if constexpr (std::is_same_v<T, ReadResult>) {
            fr.vals[i.dst.id] = static_cast<bool>(m_.results.at(i.slot));
          } else if constexpr (std::is_same_v<T, BinOp>) {
            fr.vals[i.dst.id] = eval_binop(i.op, value(fr, i.lhs), value(fr, i.rhs));
          } else if constexpr (std::is_same_v<T, Cmp>) {
            fr.vals[i.dst.id] = eval_cmp(i.op, value(fr, i.lhs), value(fr, i.rhs));
          } else if constexpr (std::is_same_v<T, Select>) {
            fr.vals[i.dst.id] = truthy(value(fr, i.cond)) ? value(fr, i.if_true) : value(fr, i.if_false);
          } else if constexpr (std::is_same_v<T, Output>) {
            m_.output(i);
          } else {
            const Function *callee = mod_.find(i.callee);
            if (!callee) throw std::runtime_error("call to undefined @" + i.callee);
            std::vector<Literal> vals;
            std::vector<int> qs;
            for (auto &a : i.args) {
              if (a.is_qubit) qs.push_back(qubit(fr, a.qubit));
              else vals.push_back(value(fr, a.value));
            }
            call(*callee, std::move(vals), std::move(qs));
          }
        },
        ins);
  }
};

int module_qubits(const Module &m) {
  int n = m.required_qubits;
  for (auto &f : m.functions)
    for (auto &b : f.blocks)
      for (auto &i : b.body)
        for (auto &q : qubits_of(i))
          if (!q.param) n = std::max(n, q.index + 1);
  return n;
}

} // namespace

std::map<std::string, double> enumerate_module(const Module &mod, const MeasureHook &hook) {
  const int nq = module_qubits(mod);
  return enumerate([&](Replay &replay) {
    Machine m(nq, mod.required_results, NoiseModel{}, 0, &replay, &hook);
    Interpreter(mod, m).run();
    return outcome_key(m.outputs);
  });
}

} // namespace qirq
