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

#include <array>
#include <cmath>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "qirq/emulator.hpp"
#include "qirq/passes.hpp"
#include "qirq/qccd.hpp"
#include "qirq/regalloc.hpp"

namespace qirq {

enum class Basis : uint8_t { X, Y, Z };
Basis parse_basis(const std::string &s);
char basis_char(Basis b);

enum class RusStyle : uint8_t { Loop, Recursion };
RusStyle parse_style(const std::string &s);
const char *style_name(RusStyle s);

// arccos(1/sqrt(3)) and 2*arctan(2).
inline constexpr double kMagicPhi = 0.9553166181245093;
inline constexpr double kRusAlpha = 2.214297435588181;

struct MsdConfig {
  int limit = 1;
  Basis basis = Basis::Z;
};

struct RusConfig {
  int limit = 1;
  Basis basis = Basis::Z;
  RusStyle style = RusStyle::Loop;
};

// Correction applied to the output qubit on the all-zero syndrome, in
// application order.
const std::vector<std::string> &msd_correction();

// Decoder of the five-qubit code as (gate, qubits) in application order.
const std::vector<std::pair<std::string, std::vector<int>>> &msd_decoder();

// Both programs record [heralds..., final] where success means every herald
// bit is 0 and the final bit is the basis measurement of the output qubit.
std::string build_msd_source(const MsdConfig &cfg);
std::string build_rus_source(const RusConfig &cfg);
Module build_msd(const MsdConfig &cfg);
Module build_rus(const RusConfig &cfg);

struct CompileOptions {
  bool fold = true;
  bool flatten = true;
  bool peephole = true;
  FlattenConfig limits;
  int registers = 64;
  std::optional<TrapLayout> trap;
  TransportMode mode = TransportMode::Conditional;
};

struct Compiled {
  Module flat;
  GuardedFunction guarded;
  Allocation alloc;
  ExecProgram exec;
  int blocks = 0;
};

// fold -> flatten -> fold -> peephole, strict validation, if-conversion,
// register allocation, lowering. Throws std::runtime_error carrying the
// diagnostics when validation fails.
Compiled compile(const Module &m, const CompileOptions &opt = {});

struct ExperimentReport {
  std::string experiment;
  std::string style;
  Basis basis = Basis::Z;
  int limit = 0;
  int shots = 0;
  int success_count = 0;
  double success_fraction = 0;
  // Indexed X, Y, Z; only the run's basis is measured, the others stay NaN.
  std::array<double, 3> expectation{NAN, NAN, NAN};
  std::array<double, 3> expectation_all{NAN, NAN, NAN};
  double survival = 0;
  double avg_transport = 0;
  int blocks = 0;
  int colors = 0;
  // attempts[k] = number of successful shots that needed k+1 attempts.
  std::vector<int> attempts;

  nlohmann::json to_json() const;
};

class EmptyInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct RunMeta {
  std::string experiment;
  std::string style;
  Basis basis = Basis::Z;
  int limit = 0;
  int blocks = 0;
  int colors = 0;
  // Qubit whose measurement count is the attempt number; -1 to skip.
  int attempt_qubit = -1;
};

ExperimentReport summarize(const std::vector<ShotResult> &shots, const RunMeta &meta);

enum class Reference : uint8_t { MsdCumulative, MsdExpectation, RusSurvival };
double ideal_reference(Reference kind, int limit = 0);

struct RunOptions {
  int shots = 10000;
  uint64_t seed = 1;
  int jobs = 1;
  NoiseModel noise;
  CompileOptions compile;
};

ExperimentReport run_msd(const MsdConfig &cfg, const RunOptions &opt);
ExperimentReport run_rus(const RusConfig &cfg, const RunOptions &opt);

inline constexpr const char *kReportHeader =
    "experiment,style,basis,limit,shots,success_fraction,exp_x,exp_y,exp_z,survival,"
    "avg_transport,blocks,colors";

std::string report_csv_row(const ExperimentReport &r);
std::string report_csv(const std::vector<ExperimentReport> &rows);

// Merges report CSV files (header checked, rows kept in input order).
std::vector<std::vector<std::string>> read_report_csv(const std::string &text);
nlohmann::json report_rows_json(const std::vector<std::vector<std::string>> &rows);

} // namespace qirq
