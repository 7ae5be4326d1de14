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
#include <complex>
#include <string_view>

namespace qirq {

using cplx = std::complex<double>;
// Row-major 2x2 unitary.
using Mat2 = std::array<cplx, 4>;

// Rz(t) = diag(e^{-it/2}, e^{it/2}); Ry(t) = exp(-i t Y / 2); Rx(t) = exp(-i t X / 2).
Mat2 gate_matrix(std::string_view name, double angle = 0.0);

} // namespace qirq
