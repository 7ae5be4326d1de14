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

#include "qirq/gates.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qirq {

Mat2 gate_matrix(std::string_view name, double a) {
  const double r = 1.0 / std::numbers::sqrt2;
  const cplx i(0, 1);
  if (name == "x") return {0, 1, 1, 0};
  if (name == "y") return {0, -i, i, 0};
  if (name == "z") return {1, 0, 0, -1};
  if (name == "h") return {r, r, r, -r};
  if (name == "s") return {1, 0, 0, i};
  if (name == "sdg") return {1, 0, 0, -i};
  if (name == "t") return {1, 0, 0, std::polar(1.0, std::numbers::pi / 4)};
  if (name == "tdg") return {1, 0, 0, std::polar(1.0, -std::numbers::pi / 4)};
  const double c = std::cos(a / 2), s = std::sin(a / 2);
  if (name == "rx") return {c, -i * s, -i * s, c};
  if (name == "ry") return {c, -s, s, c};
  if (name == "rz") return {std::polar(1.0, -a / 2), 0, 0, std::polar(1.0, a / 2)};
  throw std::invalid_argument("no single-qubit matrix for gate '" + std::string(name) + "'");
}

} // namespace qirq
