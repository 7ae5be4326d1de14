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

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qirq/ir.hpp"

namespace qirq {

class ParseError : public std::runtime_error {
public:
  ParseError(std::string code, int line, int col, std::vector<std::string> expected,
             const std::string &msg);

  const std::string &code() const { return code_; }
  int line() const { return line_; }
  int column() const { return col_; }
  const std::vector<std::string> &expected() const { return expected_; }

private:
  std::string code_;
  int line_, col_;
  std::vector<std::string> expected_;
};

// Parses the textual IR. `repeat n { ... }` regions are desugared into a
// counted loop whose back edge only the flatten pass removes.
Module parse(std::string_view src);

std::string emit(const Module &m);
std::string emit(const Function &f);

// Shortest decimal form that parses back to the same double; always carries
// a '.' or exponent so it re-lexes as a float.
std::string format_double(double v);
std::string format_operand(const Function &f, const Operand &o);
std::string emit_instruction(const Function &f, const Instruction &ins);

} // namespace qirq
