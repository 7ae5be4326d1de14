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

#include "qirq/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "qirq/textir.hpp"

namespace qirq {

Basis parse_basis(const std::string &s) {
  if (s == "X" || s == "x") return Basis::X;
  if (s == "Y" || s == "y") return Basis::Y;
  if (s == "Z" || s == "z") return Basis::Z;
  throw std::invalid_argument("basis must be X, Y or Z, got '" + s + "'");
}

char basis_char(Basis b) { return "XYZ"[static_cast<int>(b)]; }

RusStyle parse_style(const std::string &s) {
  if (s == "loop") return RusStyle::Loop;
  if (s == "recursion") return RusStyle::Recursion;
  throw std::invalid_argument("style must be loop or recursion, got '" + s + "'");
}

const char *style_name(RusStyle s) { return s == RusStyle::Loop ? "loop" : "recursion"; }

const std::vector<std::string> &msd_correction() {
  static const std::vector<std::string> c{"s", "x"};
  return c;
}

const std::vector<std::pair<std::string, std::vector<int>>> &msd_decoder() {
  static const auto dec = [] {
    // Gate name followed by its flat operand list; two-qubit gates consume
    // operands pairwise.
    const char *table[] = {
        "sdg 3 3 2 2 4", "h 4",   "sdg 4",   "cx 3 4",   "h 4",
        "cx 4 3 3 4 4 3 4 2 3 2", "h 3",     "sdg 3 2",  "h 2",
        "cx 2 1",        "h 2",   "sdg 2",   "cx 1 4",   "sdg 4 1",
        "h 1",           "sdg 1", "cx 4 1 1 4 4 1 3 0 1 0", "h 3 1",
        "sdg 3 1",       "cx 0 4"};
    std::vector<std::pair<std::string, std::vector<int>>> out;
    for (const char *line : table) {
      std::istringstream in(line);
      std::string g;
      in >> g;
      std::vector<int> qs;
      for (int q; in >> q;) qs.push_back(q);
      size_t arity = g == "cx" ? 2 : 1;
      for (size_t i = 0; i < qs.size(); i += arity)
        out.push_back({g, std::vector<int>(qs.begin() + static_cast<long>(i),
                                           qs.begin() + static_cast<long>(i + arity))});
    }
    return out;
  }();
  return dec;
}

namespace {

void line(std::ostringstream &os, const std::string &s) { os << "  " << s << "\n"; }

// Rotations taking |0> to the +1 eigenstate of the basis, and back.
void prep(std::ostringstream &os, Basis b, int q) {
  std::string t = " q" + std::to_string(q);
  if (b == Basis::X) line(os, "h" + t);
  if (b == Basis::Y) {
    line(os, "h" + t);
    line(os, "s" + t);
  }
}

void unprep(std::ostringstream &os, Basis b, int q) {
  std::string t = " q" + std::to_string(q);
  if (b == Basis::X) line(os, "h" + t);
  if (b == Basis::Y) {
    line(os, "sdg" + t);
    line(os, "h" + t);
  }
}

void outputs(std::ostringstream &os, int results) {
  line(os, "output array_start");
  for (int r = 0; r < results; ++r) line(os, "output result r" + std::to_string(r));
  line(os, "output array_end");
}

void magic_prep(std::ostringstream &os, int q) {
  std::string t = " q" + std::to_string(q);
  line(os, "ry(" + format_double(kMagicPhi) + ")" + t);
  line(os, "rz(%theta)" + t);
}

} // namespace

std::string build_msd_source(const MsdConfig &cfg) {
  if (cfg.limit < 0) throw std::invalid_argument("MSD limit must be >= 0");
  std::ostringstream os;
  const int results = cfg.limit == 0 ? 1 : 5;
  os << "module msd\n";
  os << "attrs required_qubits=5 required_results=" << results << "\n";
  os << "entry @main\n\n";
  os << "func @main() {\n";
  os << "block entry:\n";
  line(os, "%theta = mul 0.25, 3.141592653589793");
  if (cfg.limit == 0) {
    magic_prep(os, 0);
    unprep(os, cfg.basis, 0);
    line(os, "mz q0 -> r0");
    outputs(os, results);
    line(os, "ret");
    os << "}\n";
    return os.str();
  }
  line(os, "jmp attempt");
  os << "repeat " << cfg.limit << " {\n";
  os << "block attempt:\n";
  for (int q = 0; q < 5; ++q) line(os, "reset q" + std::to_string(q));
  for (int q = 0; q < 5; ++q) magic_prep(os, q);
  for (auto &[g, qs] : msd_decoder()) {
    std::string s = g + " q" + std::to_string(qs[0]);
    if (qs.size() == 2) s += ", q" + std::to_string(qs[1]);
    line(os, s);
  }
  for (int k = 0; k < 4; ++k) line(os, "mz q" + std::to_string(k + 1) + " -> r" + std::to_string(k));
  for (int k = 0; k < 4; ++k) line(os, "%s" + std::to_string(k) + " = read_result r" + std::to_string(k));
  line(os, "%f01 = or %s0, %s1");
  line(os, "%f012 = or %f01, %s2");
  line(os, "%fail = or %f012, %s3");
  line(os, "br %fail, continue, done");
  os << "}\n";
  os << "block exhausted:\n";
  line(os, "jmp finale");
  os << "block done:\n";
  for (auto &g : msd_correction()) line(os, g + " q0");
  line(os, "jmp finale");
  os << "block finale:\n";
  unprep(os, cfg.basis, 0);
  line(os, "mz q0 -> r4");
  outputs(os, results);
  line(os, "ret");
  os << "}\n";
  return os.str();
}

namespace {

void rus_round(std::ostringstream &os) {
  for (auto g : {"t q2", "z q2", "h q0", "h q1", "tdg q0", "cx q1, q0", "t q0", "h q0", "mz q0 -> r0"})
    line(os, g);
  line(os, "%m0 = read_result r0");
}

void rus_stage2(std::ostringstream &os) {
  for (auto g : {"cx q2, q1", "t q1", "h q1", "mz q1 -> r1"}) line(os, g);
  line(os, "%m1 = read_result r1");
}

void rus_reset(std::ostringstream &os, Basis b) {
  for (int q = 0; q < 3; ++q) line(os, "reset q" + std::to_string(q));
  prep(os, b, 2);
}

void rus_finale(std::ostringstream &os, Basis b) {
  os << "block finale:\n";
  line(os, "rz(%alpha) q2");
  unprep(os, b, 2);
  line(os, "mz q2 -> r2");
  outputs(os, 3);
  line(os, "ret");
}

} // namespace

std::string build_rus_source(const RusConfig &cfg) {
  if (cfg.limit < 1) throw std::invalid_argument("RUS limit must be >= 1");
  std::ostringstream os;
  os << "module rus_" << style_name(cfg.style) << "\n";
  os << "attrs required_qubits=3 required_results=3\n";
  os << "entry @main\n\n";
  os << "func @main() {\n";
  os << "block entry:\n";
  line(os, "%alpha = mul 2.0, 1.1071487177940904");
  if (cfg.style == RusStyle::Loop) {
    line(os, "jmp round");
    os << "repeat " << cfg.limit << " {\n";
    os << "block round:\n";
    rus_reset(os, cfg.basis);
    rus_round(os);
    line(os, "br %m0, continue, stage2");
    os << "block stage2:\n";
    rus_stage2(os);
    line(os, "br %m1, continue, finale");
    os << "}\n";
    rus_finale(os, cfg.basis);
    os << "}\n";
    return os.str();
  }
  rus_reset(os, cfg.basis);
  line(os, "call @attempt(" + std::to_string(cfg.limit) + ")");
  line(os, "jmp finale");
  rus_finale(os, cfg.basis);
  os << "}\n\n";
  os << "func @attempt(%n: int) {\n";
  os << "block round:\n";
  rus_round(os);
  line(os, "br %m0, retry, stage2");
  os << "block stage2:\n";
  rus_stage2(os);
  line(os, "br %m1, retry, done");
  os << "block done:\n";
  line(os, "ret");
  os << "block retry:\n";
  line(os, "%left = sub %n, 1");
  line(os, "%more = cmp gt %left, 0");
  line(os, "br %more, again, giveup");
  os << "block again:\n";
  rus_reset(os, cfg.basis);
  line(os, "call @attempt(%left)");
  line(os, "jmp back");
  os << "block back:\n";
  line(os, "ret");
  os << "block giveup:\n";
  line(os, "ret");
  os << "}\n";
  return os.str();
}

Module build_msd(const MsdConfig &cfg) { return parse(build_msd_source(cfg)); }
Module build_rus(const RusConfig &cfg) { return parse(build_rus_source(cfg)); }

// --- pipeline ----------------------------------------------------------------------

Compiled compile(const Module &m, const CompileOptions &opt) {
  Module cur = m;
  if (opt.fold) cur = fold_constants(cur);
  auto pre = validate_profile(cur, Strictness::Lenient);
  if (pre.has_errors()) throw std::runtime_error(pre.to_string());
  if (opt.flatten) cur = flatten(cur, opt.limits);
  if (opt.fold) cur = fold_constants(cur);
  if (opt.peephole) cur = peephole(cur);
  auto post = validate_profile(cur, Strictness::Strict);
  if (post.has_errors()) throw std::runtime_error(post.to_string());

  Compiled c;
  c.flat = cur;
  c.blocks = static_cast<int>(cur.entry_function().blocks.size());
  c.guarded = if_convert(cur);
  c.alloc = allocate_registers(c.guarded, opt.registers);
  int nq = std::max(cur.required_qubits, 1);
  TrapLayout trap = opt.trap ? *opt.trap : TrapLayout::default_for(nq);
  c.exec = lower(c.alloc.code, trap, opt.mode);
  c.exec.colors_used = c.alloc.regs.colors_used();
  return c;
}

// --- statistics ----------------------------------------------------------------------

ExperimentReport summarize(const std::vector<ShotResult> &shots, const RunMeta &meta) {
  if (shots.empty()) throw EmptyInput("no shots to summarize");
  ExperimentReport r;
  r.experiment = meta.experiment;
  r.style = meta.style;
  r.basis = meta.basis;
  r.limit = meta.limit;
  r.blocks = meta.blocks;
  r.colors = meta.colors;
  r.shots = static_cast<int>(shots.size());
  long sum_all = 0, sum_ok = 0, zero_ok = 0;
  double transport = 0;
  for (auto &s : shots) {
    auto bits = s.result_bits();
    if (bits.empty()) throw std::invalid_argument("shot recorded no results");
    bool ok = true;
    for (size_t i = 0; i + 1 < bits.size(); ++i) ok = ok && bits[i] == 0;
    int v = bits.back() ? -1 : 1;
    sum_all += v;
    transport += static_cast<double>(s.counters.transport_steps);
    if (!ok) continue;
    ++r.success_count;
    sum_ok += v;
    zero_ok += bits.back() == 0;
    if (meta.attempt_qubit >= 0) {
      int n = 0;
      for (auto &e : s.log) n += e.qubit == meta.attempt_qubit;
      if (n > 0) {
        if (static_cast<int>(r.attempts.size()) < n) r.attempts.resize(n, 0);
        ++r.attempts[n - 1];
      }
    }
  }
  const int b = static_cast<int>(meta.basis);
  r.success_fraction = static_cast<double>(r.success_count) / r.shots;
  r.expectation_all[b] = static_cast<double>(sum_all) / r.shots;
  r.expectation[b] = r.success_count ? static_cast<double>(sum_ok) / r.success_count : NAN;
  r.survival = r.success_count ? static_cast<double>(zero_ok) / r.success_count : NAN;
  r.avg_transport = transport / r.shots;
  return r;
}

double ideal_reference(Reference kind, int limit) {
  switch (kind) {
  case Reference::MsdCumulative: return 1.0 - std::pow(5.0 / 6.0, limit);
  case Reference::MsdExpectation: return 1.0 / std::sqrt(3.0);
  case Reference::RusSurvival: return 1.0;
  }
  return NAN;
}

namespace {

ExperimentReport run(const Module &m, const RunOptions &opt, RunMeta meta) {
  Compiled c = compile(m, opt.compile);
  meta.blocks = c.blocks;
  meta.colors = c.exec.colors_used;
  auto shots = run_shots(c.exec, opt.noise, opt.shots, opt.seed, opt.jobs);
  return summarize(shots, meta);
}

} // namespace

ExperimentReport run_msd(const MsdConfig &cfg, const RunOptions &opt) {
  RunMeta meta{"msd", "loop", cfg.basis, cfg.limit, 0, 0, cfg.limit > 0 ? 1 : -1};
  return run(build_msd(cfg), opt, meta);
}

ExperimentReport run_rus(const RusConfig &cfg, const RunOptions &opt) {
  RunMeta meta{"rus", style_name(cfg.style), cfg.basis, cfg.limit, 0, 0, 0};
  return run(build_rus(cfg), opt, meta);
}

// --- report files ------------------------------------------------------------------

static std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

static nlohmann::json num_json(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

std::string report_csv_row(const ExperimentReport &r) {
  std::ostringstream os;
  os << r.experiment << "," << r.style << "," << basis_char(r.basis) << "," << r.limit << ","
     << r.shots << "," << num(r.success_fraction);
  for (int b = 0; b < 3; ++b) os << "," << (b == static_cast<int>(r.basis) ? num(r.expectation[b]) : "");
  os << "," << num(r.survival) << "," << num(r.avg_transport) << "," << r.blocks << "," << r.colors;
  return os.str();
}

std::string report_csv(const std::vector<ExperimentReport> &rows) {
  std::string s = std::string(kReportHeader) + "\n";
  for (auto &r : rows) s += report_csv_row(r) + "\n";
  return s;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json post, all;
  for (int b = 0; b < 3; ++b) {
    std::string k(1, static_cast<char>(std::tolower("XYZ"[b])));
    post["exp_" + k] = num_json(expectation[b]);
    all["exp_" + k] = num_json(expectation_all[b]);
  }
  return {{"experiment", experiment},
          {"style", style},
          {"basis", std::string(1, basis_char(basis))},
          {"limit", limit},
          {"shots", shots},
          {"success_count", success_count},
          {"success_fraction", success_fraction},
          {"post_selected", post},
          {"unconditional", all},
          {"survival", num_json(survival)},
          {"avg_transport", avg_transport},
          {"blocks", blocks},
          {"colors", colors},
          {"attempts", attempts}};
}

std::vector<std::vector<std::string>> read_report_csv(const std::string &text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string l;
  bool first = true;
  while (std::getline(in, l)) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    if (l.empty()) continue;
    if (l == kReportHeader) {
      first = false;
      continue;
    }
    if (first) throw std::invalid_argument("report CSV does not start with the expected header");
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!l.empty() && l.back() == ',') f.emplace_back();
    if (f.size() != 13) throw std::invalid_argument("report row has " + std::to_string(f.size()) + " fields");
    rows.push_back(std::move(f));
  }
  return rows;
}

nlohmann::json report_rows_json(const std::vector<std::vector<std::string>> &rows) {
  static const char *cols[] = {"experiment", "style", "basis", "limit", "shots",
                               "success_fraction", "exp_x", "exp_y", "exp_z", "survival",
                               "avg_transport", "blocks", "colors"};
  nlohmann::json out = nlohmann::json::array();
  for (auto &r : rows) {
    nlohmann::json o;
    for (size_t i = 0; i < 13; ++i) {
      const std::string &v = r[i];
      if (i < 3) o[cols[i]] = v;
      else if (v.empty() || v == "nan") o[cols[i]] = nullptr;
      else if (i == 3 || i == 4 || i == 11 || i == 12) o[cols[i]] = std::stol(v);
      else o[cols[i]] = std::stod(v);
    }
    out.push_back(o);
  }
  return out;
}

} // namespace qirq
