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

// qirq command line: compile, run, experiment, report.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include "qirq/experiments.hpp"
#include "qirq/predication.hpp"
#include "qirq/textir.hpp"

using namespace qirq;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string &path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spill(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct BackendFlags {
  std::string passes = "fold,flatten,fold,peephole";
  int registers = 64;
  std::string trap;
  std::string transport_mode = "conditional";
  int max_inline_depth = FlattenConfig{}.max_inline_depth;
  int max_unroll = FlattenConfig{}.max_unroll;

  void add(CLI::App *app, bool with_passes) {
    if (with_passes)
      app->add_option("--passes", passes, "Comma-separated pass order (fold, flatten, peephole)");
    app->add_option("--registers", registers, "Real-time register file size K")
        ->check(CLI::PositiveNumber);
    app->add_option("--trap", trap, "Trap layout JSON file");
    app->add_option("--transport-mode", transport_mode, "conditional or always")
        ->check(CLI::IsMember({"conditional", "always"}));
    app->add_option("--max-inline-depth", max_inline_depth)->check(CLI::NonNegativeNumber);
    app->add_option("--max-unroll", max_unroll)->check(CLI::PositiveNumber);
  }

  CompileOptions options() const {
    CompileOptions o;
    o.registers = registers;
    o.limits = {max_inline_depth, max_unroll};
    o.mode = transport_mode == "always" ? TransportMode::Always : TransportMode::Conditional;
    if (!trap.empty()) {
      o.trap = TrapLayout::from_json(nlohmann::json::parse(slurp(trap)));
      o.trap->check();
    }
    return o;
  }

  // Applies --passes in order; the backend stages then run with no further passes.
  Compiled build(Module m) const {
    CompileOptions o = options();
    std::stringstream list(passes);
    for (std::string p; std::getline(list, p, ',');) {
      if (p == "fold") m = fold_constants(m);
      else if (p == "flatten") m = flatten(m, o.limits);
      else if (p == "peephole") m = peephole(m);
      else if (!p.empty()) throw UsageError("unknown pass '" + p + "'");
    }
    o.fold = o.flatten = o.peephole = false;
    return compile(m, o);
  }
};

struct NoiseFlags {
  std::string file;
  bool noiseless = false;
  double overrotation = 0;

  void add(CLI::App *app) {
    app->add_option("--noise", file, "Noise model JSON file (default: synthetic preset)");
    app->add_flag("--noiseless", noiseless, "Disable every noise channel");
    app->add_option("--overrotation", overrotation, "Systematic preparation over-rotation (rad)");
  }

  NoiseModel model() const {
    if (noiseless && !file.empty()) throw UsageError("--noise and --noiseless are exclusive");
    NoiseModel n = noiseless   ? NoiseModel{}
                   : file.empty() ? NoiseModel::synthetic_default()
                                  : NoiseModel::from_json(nlohmann::json::parse(slurp(file)));
    if (overrotation != 0) n.prep_overrotation = overrotation;
    n.check();
    return n;
  }
};

struct ShotFlags {
  int shots = 10000;
  uint64_t seed = 1;
  int jobs = 1;

  void add(CLI::App *app) {
    app->add_option("--shots", shots)->check(CLI::PositiveNumber);
    app->add_option("--seed", seed);
    app->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  }
};

int cmd_compile(const std::string &file, const std::string &emit_kind, const BackendFlags &bf) {
  Compiled c = bf.build(parse(slurp(file)));
  if (emit_kind == "ir") std::cout << emit(c.flat);
  else if (emit_kind == "guarded") std::cout << emit_guarded(c.alloc.code);
  else std::cout << c.exec.to_json().dump(2) << "\n";
  return 0;
}

int cmd_run(const std::string &file, const BackendFlags &bf, const NoiseFlags &nf,
            const ShotFlags &sf, const std::string &csv) {
  Compiled c = bf.build(parse(slurp(file)));
  auto shots = run_shots(c.exec, nf.model(), sf.shots, sf.seed, sf.jobs);
  std::map<std::string, int> counts;
  long transport = 0;
  for (auto &s : shots) {
    ++counts[s.record()];
    transport += s.counters.transport_steps;
  }
  nlohmann::json j{{"shots", sf.shots},
                   {"seed", sf.seed},
                   {"counts", counts},
                   {"avg_transport", static_cast<double>(transport) / sf.shots},
                   {"blocks", c.blocks},
                   {"colors", c.exec.colors_used}};
  std::cout << j.dump(2) << "\n";
  if (!csv.empty()) {
    std::ostringstream os;
    os << "shot,seed,outputs,transport_steps,gates,skipped_blocks\n";
    for (size_t i = 0; i < shots.size(); ++i)
      os << i << "," << shots[i].seed << "," << shots[i].record() << ","
         << shots[i].counters.transport_steps << "," << shots[i].counters.gates << ","
         << shots[i].counters.skipped_blocks << "\n";
    spill(csv, os.str());
  }
  return 0;
}

struct ExperimentFlags {
  int limit = 1;
  std::string basis = "Z";
  std::string style = "loop";
  std::string out;
  std::string json;
  std::string emit_kind;
};

int cmd_experiment(const std::string &which, const ExperimentFlags &ef, const BackendFlags &bf,
                   const NoiseFlags &nf, const ShotFlags &sf) {
  Basis b = parse_basis(ef.basis);
  Module m = which == "msd" ? build_msd({ef.limit, b})
                            : build_rus({ef.limit, b, parse_style(ef.style)});
  if (ef.emit_kind == "ir") {
    std::cout << emit(m);
    return 0;
  }
  RunOptions ro;
  ro.shots = sf.shots;
  ro.seed = sf.seed;
  ro.jobs = sf.jobs;
  ro.noise = nf.model();
  ro.compile = bf.options();
  if (ef.emit_kind == "exec") {
    Compiled c = compile(m, ro.compile);
    nlohmann::json j{{"experiment", which}, {"style", which == "msd" ? "loop" : ef.style},
                     {"limit", ef.limit},   {"cfg_block_count", c.blocks},
                     {"colors", c.exec.colors_used}, {"program", c.exec.to_json()}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  ExperimentReport r = which == "msd" ? run_msd({ef.limit, b}, ro)
                                      : run_rus({ef.limit, b, parse_style(ef.style)}, ro);
  spill(ef.out, report_csv({r}));
  if (!ef.json.empty()) spill(ef.json, r.to_json().dump(2) + "\n");
  return 0;
}

int cmd_report(const std::vector<std::string> &inputs, const std::string &out,
               const std::string &json) {
  std::vector<std::vector<std::string>> rows;
  for (auto &f : inputs) {
    auto part = read_report_csv(slurp(f));
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::ostringstream os;
  os << kReportHeader << "\n";
  for (auto &r : rows) {
    for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  spill(out, os.str());
  if (!json.empty()) spill(json, report_rows_json(rows).dump(2) + "\n");
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"qirq: hybrid quantum/classical IR compiler and trapped-ion emulator"};
  app.require_subcommand(1);

  std::string file;
  std::string emit_kind = "exec";
  BackendFlags compile_bf;
  auto *c = app.add_subcommand("compile", "Compile a textual IR file");
  c->add_option("file", file, "Input path or - for stdin")->required();
  c->add_option("--emit", emit_kind)->check(CLI::IsMember({"ir", "guarded", "exec"}));
  compile_bf.add(c, true);

  std::string run_file, csv;
  BackendFlags run_bf;
  NoiseFlags run_nf;
  ShotFlags run_sf;
  auto *r = app.add_subcommand("run", "Compile and execute shots on the emulator");
  r->add_option("file", run_file, "Input path or - for stdin")->required();
  r->add_option("--csv", csv, "Per-shot CSV output path");
  run_bf.add(r, true);
  run_nf.add(r);
  run_sf.add(r);

  std::string which;
  ExperimentFlags ef;
  BackendFlags exp_bf;
  NoiseFlags exp_nf;
  ShotFlags exp_sf;
  auto *e = app.add_subcommand("experiment", "Build, compile and run a distillation or RUS experiment");
  e->add_option("kind", which)->required()->check(CLI::IsMember({"msd", "rus"}));
  e->add_option("--limit", ef.limit)->check(CLI::NonNegativeNumber);
  e->add_option("--basis", ef.basis)->check(CLI::IsMember({"X", "Y", "Z", "x", "y", "z"}));
  e->add_option("--style", ef.style)->check(CLI::IsMember({"loop", "recursion"}));
  e->add_option("--out", ef.out, "CSV report path (default stdout)");
  e->add_option("--json", ef.json, "JSON report path");
  e->add_option("--emit", ef.emit_kind, "Print the program instead of running it")
      ->check(CLI::IsMember({"ir", "exec"}));
  exp_bf.add(e, false);
  exp_nf.add(e);
  exp_sf.add(e);

  std::vector<std::string> inputs;
  std::string rep_out, rep_json;
  auto *p = app.add_subcommand("report", "Merge report CSV files into one CSV and JSON table");
  p->add_option("inputs", inputs)->required();
  p->add_option("--out", rep_out, "Merged CSV path (default stdout)");
  p->add_option("--json", rep_json, "Merged JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c) return cmd_compile(file, emit_kind, compile_bf);
    if (*r) return cmd_run(run_file, run_bf, run_nf, run_sf, csv);
    if (*e) return cmd_experiment(which, ef, exp_bf, exp_nf, exp_sf);
    if (*p) return cmd_report(inputs, rep_out, rep_json);
  } catch (const UsageError &ex) {
    std::cerr << "qirq: " << ex.what() << "\n";
    return 2;
  } catch (const ParseError &ex) {
    std::cerr << "qirq: parse error " << ex.what() << "\n";
    return 1;
  } catch (const std::exception &ex) {
    std::cerr << "qirq: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
